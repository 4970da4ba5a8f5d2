#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "metafill/tokens.hpp"
#include "metafill/verbalizer.hpp"

namespace metafill {

struct BackendInfo {
  std::size_t embedding_dim = 0;
  std::vector<std::string> capabilities;  // subset of {"score", "fill", "embed"}
};

struct Fill {
  Tokens tokens;
  double log_score = 0.0;
};

// How candidates are scored when filling a mask.
enum class FillScoring {
  kLeftContext,   // template up to and including the mask (greedy)
  kFullSequence,  // whole template, other unfilled masks dropped
};

// The language-model contract used by sampling, classification and the
// hypothesis study: score a token sequence, propose fills for a mask, embed
// a token sequence. Implementations must be safe for concurrent const use.
class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;

  virtual BackendInfo info() const = 0;

  // Summed conditional log-probability of `tokens` (<= 0).
  virtual double score(const Tokens& tokens) const = 0;
  virtual std::vector<double> score_batch(const std::vector<Tokens>& sequences) const;

  // Top-k fills for the mask at slot `mask_position`, descending log-score,
  // ties broken by lexicographic token order. `candidates == nullptr` lets the
  // backend choose (built-in: every node name; remote: free generation).
  virtual std::vector<Fill> fill(const MaskedTemplate& tmpl, std::size_t mask_position,
                                 const std::vector<Tokens>* candidates, std::size_t k) const = 0;

  virtual std::vector<double> embed(const Tokens& tokens) const = 0;

  std::size_t embedding_dim() const { return info().embedding_dim; }
};

// Candidate-restricted fill. Left-context scoring goes through the backend's
// own fill; full-sequence scoring substitutes each candidate and rescores
// the whole template via score_batch.
std::vector<Fill> fill_candidates(const ScorerBackend& backend, const MaskedTemplate& tmpl,
                                  std::size_t mask_position, const std::vector<Tokens>& candidates,
                                  std::size_t k, FillScoring scoring = FillScoring::kLeftContext);

// Sorts by (score desc, tokens asc) and truncates to k.
void rank_fills(std::vector<Fill>& fills, std::size_t k);

}  // namespace metafill
