#include "metafill/lm_backend.hpp"

#include <algorithm>

#include "metafill/errors.hpp"

namespace metafill {

std::vector<double> ScorerBackend::score_batch(const std::vector<Tokens>& sequences) const {
  std::vector<double> out;
  out.reserve(sequences.size());
  for (const auto& s : sequences) out.push_back(score(s));
  return out;
}

void rank_fills(std::vector<Fill>& fills, std::size_t k) {
  std::stable_sort(fills.begin(), fills.end(), [](const Fill& a, const Fill& b) {
    if (a.log_score != b.log_score) return a.log_score > b.log_score;
    return a.tokens < b.tokens;
  });
  if (fills.size() > k) fills.resize(k);
}

std::vector<Fill> fill_candidates(const ScorerBackend& backend, const MaskedTemplate& tmpl,
                                  std::size_t mask_position, const std::vector<Tokens>& candidates,
                                  std::size_t k, FillScoring scoring) {
  if (candidates.empty()) throw UsageError("fill_candidates: empty candidate set");
  if (mask_position >= tmpl.slots.size() || !tmpl.slots[mask_position].is_mask())
    throw UsageError("fill_candidates: position " + std::to_string(mask_position) + " is not a mask");
  if (scoring == FillScoring::kLeftContext) return backend.fill(tmpl, mask_position, &candidates, k);

  std::vector<Tokens> sequences;
  sequences.reserve(candidates.size());
  for (const auto& c : candidates) sequences.push_back(tmpl.filled(mask_position, c).literal_tokens());
  auto scores = backend.score_batch(sequences);
  std::vector<Fill> fills;
  fills.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) fills.push_back({candidates[i], scores[i]});
  rank_fills(fills, k);
  return fills;
}

}  // namespace metafill
