#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "metafill/hin.hpp"
#include "metafill/lm_backend.hpp"
#include "metafill/skipgram.hpp"

namespace metafill {

struct BuiltinLmOptions {
  int order = 4;             // n-gram order, >= 2
  double smoothing = 0.1;    // add-k constant
  std::size_t dim = 32;      // token embedding dimension
  std::size_t epochs = 5;    // skip-gram epochs over the corpus
  std::size_t window = 2;
  std::size_t negatives = 5;
  double lr = 0.025;
  double unk_rate = 0.05;    // token dropout that trains the UNK row
  std::uint64_t seed = 1;
};

// Desk-scale language model: add-k smoothed n-grams for scoring, skip-gram
// token embeddings for `embed`. Contexts back off to the longest suffix that
// was observed in training; each conditional is a full add-k distribution
// over the vocabulary, so it always sums to one.
//
// Template literals "." and "It" never occur in the training corpus; they
// are transparent to scoring (log-prob 0, not part of the context).
class BuiltinLm final : public ScorerBackend {
 public:
  static constexpr std::uint32_t kBos = 0xffffffffu;
  static constexpr std::uint32_t kUnk = 0xfffffffeu;

  // Corpus = the four verbalized templates of every edge, targets filled in.
  static BuiltinLm train(const Hin& hin, const BuiltinLmOptions& options);
  static BuiltinLm train_on_corpus(const std::vector<Tokens>& corpus,
                                   const std::vector<Tokens>& name_index,
                                   const BuiltinLmOptions& options);

  BackendInfo info() const override;
  double score(const Tokens& tokens) const override;
  std::vector<Fill> fill(const MaskedTemplate& tmpl, std::size_t mask_position,
                         const std::vector<Tokens>* candidates, std::size_t k) const override;
  std::vector<double> embed(const Tokens& tokens) const override;

  // P(token | context) with context given as tokens (only the last order-1
  // scoring-relevant tokens are used).
  double probability(const Tokens& context, const std::string& token) const;
  // Full conditional distribution over vocabulary() for the context.
  std::vector<double> distribution(const Tokens& context) const;
  // Every context observed in training (id form, possibly shorter than order-1).
  std::vector<std::vector<std::uint32_t>> observed_contexts() const;
  std::vector<double> distribution_for_ids(const std::vector<std::uint32_t>& context) const;

  const std::vector<std::string>& vocabulary() const { return vocab_; }
  std::optional<std::uint32_t> token_id(const std::string& token) const;
  const std::vector<Tokens>& name_index() const { return names_; }
  const std::vector<Tokens>& corpus() const { return corpus_; }
  const BuiltinLmOptions& options() const { return options_; }
  std::size_t embedding_row(const std::string& token) const;  // UNK row for unknown tokens

  // Token embedding table (vocabulary rows followed by the UNK row). Mutable
  // access exists for joint fine-tuning with the node-type classifier.
  const EmbeddingMatrix& embeddings() const { return embeddings_; }
  EmbeddingMatrix& mutable_embeddings() { return embeddings_; }

  void save(const std::filesystem::path& file) const;
  static BuiltinLm load(const std::filesystem::path& file);
  std::string to_json() const;
  static BuiltinLm from_json(const std::string& text);

  friend bool operator==(const BuiltinLm& a, const BuiltinLm& b) {
    return a.vocab_ == b.vocab_ && a.counts_ == b.counts_ && a.embeddings_ == b.embeddings_ &&
           a.names_ == b.names_;
  }

 private:
  struct ContextCounts {
    std::uint64_t total = 0;
    std::map<std::uint32_t, std::uint64_t> next;
    friend bool operator==(const ContextCounts&, const ContextCounts&) = default;
  };

  std::uint32_t id_or_unk(const std::string& token) const;
  static bool transparent(const std::string& token);
  // Scoring-relevant ids of `tokens` (transparent tokens removed).
  std::vector<std::uint32_t> encode(const Tokens& tokens) const;
  const ContextCounts& resolve(const std::vector<std::uint32_t>& history) const;
  double log_prob_next(const std::vector<std::uint32_t>& history, std::uint32_t token) const;
  double extend(std::vector<std::uint32_t>& history, const Tokens& tokens) const;
  void rebuild_index();

  BuiltinLmOptions options_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::uint32_t> vocab_index_;
  std::map<std::vector<std::uint32_t>, ContextCounts> counts_;
  std::vector<Tokens> names_;
  std::vector<Tokens> corpus_;
  EmbeddingMatrix embeddings_;
};

}  // namespace metafill
