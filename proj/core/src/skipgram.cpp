#include "metafill/skipgram.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "metafill/errors.hpp"
#include "metafill/random.hpp"

namespace metafill {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

// log s(x) without overflow.
double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

void add_scaled(std::vector<std::pair<std::size_t, std::vector<double>>>& grads, std::size_t row,
                std::span<const double> v, double scale) {
  auto it = std::find_if(grads.begin(), grads.end(), [&](const auto& g) { return g.first == row; });
  if (it == grads.end()) {
    grads.emplace_back(row, std::vector<double>(v.size(), 0.0));
    it = std::prev(grads.end());
  }
  for (std::size_t i = 0; i < v.size(); ++i) it->second[i] += scale * v[i];
}

// Hogwild variant: relaxed atomic loads/stores on the shared table. Returns
// the example loss at the values read.
double sgns_step_relaxed(EmbeddingMatrix& table, const SkipGramExample& ex, double lr,
                         std::vector<double>& center_buf, std::vector<double>& grad_buf,
                         std::vector<double>& other_buf) {
  const std::size_t d = table.dim();
  auto load_row = [&](std::size_t r, std::vector<double>& out) {
    auto row = table.row(r);
    for (std::size_t i = 0; i < d; ++i)
      out[i] = std::atomic_ref<double>(row[i]).load(std::memory_order_relaxed);
  };
  load_row(ex.center, center_buf);
  std::fill(grad_buf.begin(), grad_buf.end(), 0.0);
  double loss = 0.0;
  auto update = [&](std::size_t r, bool positive) {
    load_row(r, other_buf);
    double x = dot(center_buf, other_buf);
    loss -= positive ? log_sigmoid(x) : log_sigmoid(-x);
    double g = positive ? sigmoid(x) - 1.0 : sigmoid(x);
    for (std::size_t i = 0; i < d; ++i) grad_buf[i] += g * other_buf[i];
    auto row = table.row(r);
    for (std::size_t i = 0; i < d; ++i)
      std::atomic_ref<double>(row[i]).store(other_buf[i] - lr * g * center_buf[i],
                                            std::memory_order_relaxed);
  };
  update(ex.context, true);
  for (auto n : ex.negatives) update(n, false);
  auto center = table.row(ex.center);
  for (std::size_t i = 0; i < d; ++i) {
    std::atomic_ref<double> cell(center[i]);
    cell.store(cell.load(std::memory_order_relaxed) - lr * grad_buf[i], std::memory_order_relaxed);
  }
  return loss;
}

struct PairSource {
  const std::vector<std::vector<std::size_t>>& sequences;
  std::size_t window;

  template <typename Fn>
  void for_each_pair(std::size_t seq_begin, std::size_t seq_end, Fn&& fn) const {
    for (std::size_t s = seq_begin; s < seq_end; ++s) {
      const auto& seq = sequences[s];
      for (std::size_t i = 0; i < seq.size(); ++i) {
        std::size_t lo = i >= window ? i - window : 0;
        std::size_t hi = std::min(seq.size() - 1, i + window);
        for (std::size_t j = lo; j <= hi; ++j)
          if (j != i) fn(seq[i], seq[j]);
      }
    }
  }
};

}  // namespace

double sgns_loss(const EmbeddingMatrix& table, const SkipGramExample& ex) {
  auto c = table.row(ex.center);
  double loss = -log_sigmoid(dot(c, table.row(ex.context)));
  for (auto n : ex.negatives) loss -= log_sigmoid(-dot(c, table.row(n)));
  return loss;
}

double sgns_loss(const EmbeddingMatrix& table, std::span<const SkipGramExample> batch) {
  double total = 0.0;
  for (const auto& ex : batch) total += sgns_loss(table, ex);
  return total;
}

std::vector<std::pair<std::size_t, std::vector<double>>> sgns_gradient(
    const EmbeddingMatrix& table, const SkipGramExample& ex) {
  std::vector<std::pair<std::size_t, std::vector<double>>> grads;
  auto c = table.row(ex.center);
  auto o = table.row(ex.context);
  // d/dx [-log s(x)] = s(x) - 1 ; d/dx [-log s(-x)] = s(x)
  double gpos = sigmoid(dot(c, o)) - 1.0;
  add_scaled(grads, ex.center, o, gpos);
  add_scaled(grads, ex.context, c, gpos);
  for (auto n : ex.negatives) {
    auto v = table.row(n);
    double gneg = sigmoid(dot(c, v));
    add_scaled(grads, ex.center, v, gneg);
    add_scaled(grads, n, c, gneg);
  }
  return grads;
}

void sgns_step(EmbeddingMatrix& table, const SkipGramExample& ex, double lr) {
  for (const auto& [row, g] : sgns_gradient(table, ex)) {
    auto r = table.row(row);
    for (std::size_t i = 0; i < g.size(); ++i) r[i] -= lr * g[i];
  }
}

EmbeddingMatrix init_embeddings(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  EmbeddingMatrix m(rows, dim);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-0.5 / static_cast<double>(dim), 0.5 / static_cast<double>(dim));
  for (auto& x : m.data()) x = u(rng);
  return m;
}

SkipGramResult train_sgns(const std::vector<std::vector<std::size_t>>& sequences,
                          std::size_t vocab_size, const SkipGramOptions& options) {
  if (options.dim < 1) throw UsageError("embedding dimension must be >= 1");
  if (sequences.empty()) throw UsageError("skip-gram needs at least one walk");

  SkipGramResult result;
  result.vectors = init_embeddings(vocab_size, options.dim, options.seed);
  result.visited.assign(vocab_size, false);

  std::vector<double> weights(vocab_size, 0.0);
  for (const auto& seq : sequences)
    for (auto id : seq) {
      if (id >= vocab_size) throw UsageError("walk id out of range");
      weights[id] += 1.0;
      result.visited[id] = true;
    }
  for (auto& w : weights) w = std::pow(w, 0.75);
  std::discrete_distribution<std::size_t> noise(weights.begin(), weights.end());

  PairSource pairs{sequences, options.window};
  auto draw_example = [&](std::size_t center, std::size_t context, Rng& rng,
                          std::discrete_distribution<std::size_t>& dist) {
    SkipGramExample ex{center, context, {}};
    for (std::size_t k = 0; k < options.negatives; ++k) {
      auto n = dist(rng);
      if (n == center || n == context) continue;
      ex.negatives.push_back(n);
    }
    return ex;
  };

  const bool hogwild = options.workers > 1 && !options.deterministic;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    double total = 0.0;
    std::size_t count = 0;
    if (!hogwild) {
      Rng rng(derive_seed(options.seed, epoch));
      pairs.for_each_pair(0, sequences.size(), [&](std::size_t c, std::size_t o) {
        auto ex = draw_example(c, o, rng, noise);
        total += sgns_loss(result.vectors, ex);
        sgns_step(result.vectors, ex, options.lr);
        ++count;
      });
    } else {
      std::vector<std::thread> threads;
      std::vector<double> totals(options.workers, 0.0);
      std::vector<std::size_t> counts(options.workers, 0);
      const std::size_t chunk = (sequences.size() + options.workers - 1) / options.workers;
      for (std::size_t w = 0; w < options.workers; ++w) {
        threads.emplace_back([&, w] {
          Rng rng(derive_seed(derive_seed(options.seed, epoch), w));
          std::vector<double> c(options.dim), g(options.dim), o(options.dim);
          auto local_noise = noise;
          std::size_t begin = std::min(sequences.size(), w * chunk);
          std::size_t end = std::min(sequences.size(), begin + chunk);
          pairs.for_each_pair(begin, end, [&](std::size_t center, std::size_t context) {
            auto ex = draw_example(center, context, rng, local_noise);
            totals[w] += sgns_step_relaxed(result.vectors, ex, options.lr, c, g, o);
            ++counts[w];
          });
        });
      }
      for (auto& t : threads) t.join();
      for (std::size_t w = 0; w < options.workers; ++w) {
        count += counts[w];
        total += totals[w];
      }
    }
    result.examples_per_epoch = count;
    result.epoch_loss.push_back(count ? total / static_cast<double>(count) : 0.0);
  }
  return result;
}

}  // namespace metafill
