#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace metafill {

// Dense row-major matrix of float64 rows.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim) : rows_(rows), dim_(dim), data_(rows * dim) {}

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * dim_, dim_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * dim_, dim_}; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double sigmoid(double x);

struct SkipGramOptions {
  std::size_t dim = 128;
  std::size_t window = 2;
  std::size_t negatives = 5;
  double lr = 0.001;
  std::size_t epochs = 5;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  bool deterministic = true;
};

// One (center, context) pair with its negative draws. All three index into
// the same table: e_c . e_o is the positive score, e_c . e_n the negatives.
struct SkipGramExample {
  std::size_t center = 0;
  std::size_t context = 0;
  std::vector<std::size_t> negatives;
};

// -log s(e_c.e_o) - sum_n log s(-e_c.e_n)
double sgns_loss(const EmbeddingMatrix& table, const SkipGramExample& ex);
double sgns_loss(const EmbeddingMatrix& table, std::span<const SkipGramExample> batch);

// Gradient of sgns_loss as (row, d loss / d row) pairs; rows that appear
// more than once are merged.
std::vector<std::pair<std::size_t, std::vector<double>>> sgns_gradient(
    const EmbeddingMatrix& table, const SkipGramExample& ex);

// One plain SGD step on a single example.
void sgns_step(EmbeddingMatrix& table, const SkipGramExample& ex, double lr);

// Seeded uniform(-0.5/dim, 0.5/dim) initialisation.
EmbeddingMatrix init_embeddings(std::size_t rows, std::size_t dim, std::uint64_t seed);

struct SkipGramResult {
  EmbeddingMatrix vectors;
  std::vector<bool> visited;        // row occurred in some sequence
  std::vector<double> epoch_loss;   // mean example loss per epoch
  std::size_t examples_per_epoch = 0;
};

// Skip-gram with negative sampling over id sequences. Negatives come from
// the unigram^(3/4) distribution of the sequences; draws equal to the center
// or the positive context are skipped. With workers > 1 and deterministic
// off, updates run Hogwild-style across threads.
SkipGramResult train_sgns(const std::vector<std::vector<std::size_t>>& sequences,
                          std::size_t vocab_size, const SkipGramOptions& options);

}  // namespace metafill
