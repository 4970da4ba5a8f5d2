#include "metafill/type_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "metafill/binary_io.hpp"
#include "metafill/builtin_lm.hpp"
#include "metafill/errors.hpp"
#include "metafill/random.hpp"
#include "metafill/verbalizer.hpp"

namespace metafill {

namespace {

constexpr const char* kMagic = "MFTCLS01";

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> x;
  x.reserve(a.size() + b.size());
  x.insert(x.end(), a.begin(), a.end());
  x.insert(x.end(), b.begin(), b.end());
  return x;
}

ClassifierLoss accumulate(const ClassifierParams& params, std::span<const ClassifierExample> batch,
                          ClassifierParams* grad) {
  ClassifierLoss out;
  if (batch.empty()) return out;
  const double inv = 1.0 / static_cast<double>(batch.size());
  double node_sum = 0.0;
  double neighbor_sum = 0.0;
  for (const auto& ex : batch) {
    auto xi = concat(ex.node, ex.context);
    auto xj = concat(ex.neighbor, ex.context);
    node_sum += params.node_head.loss(xi, ex.node_type, inv, grad ? &grad->node_head : nullptr);
    neighbor_sum += params.neighbor_head.loss(xj, ex.neighbor_type, params.lambda * inv,
                                              grad ? &grad->neighbor_head : nullptr);
  }
  out.node = node_sum * inv;
  out.neighbor = neighbor_sum * inv;
  out.total = out.node + params.lambda * out.neighbor;
  return out;
}

void check_dims(const ClassifierParams& params, std::size_t a, std::size_t b) {
  if (a != params.dim || b != params.dim)
    throw UsageError("classifier expects " + std::to_string(params.dim) +
                     "-dimensional features, got " + std::to_string(a) + " and " +
                     std::to_string(b));
}

void refresh_features(const BuiltinLm& lm, ClassifierExample& ex) {
  ex.node = lm.embed(ex.node_tokens);
  ex.context = lm.embed(ex.context_tokens);
  ex.neighbor = lm.embed(ex.neighbor_tokens);
}

// Pushes dL/d(mean-pooled feature) back onto the token rows it was pooled from.
void backprop_tokens(BuiltinLm& lm, const Tokens& tokens, std::span<const double> dfeature, double lr) {
  auto& table = lm.mutable_embeddings();
  const double share = lr / static_cast<double>(tokens.size());
  for (const auto& t : tokens) {
    auto row = table.row(lm.embedding_row(t));
    for (std::size_t i = 0; i < row.size(); ++i) row[i] -= share * dfeature[i];
  }
}

ClassifierTraining run(std::vector<ClassifierExample> examples, std::size_t num_types,
                       std::size_t dim, const ClassifierTrainOptions& options, BuiltinLm* lm) {
  if (num_types < 2)
    throw DataError("node-type classification needs at least 2 node types (graph has " +
                    std::to_string(num_types) + ")");
  if (examples.empty()) throw DataError("no classifier training examples (graph has no edges)");
  if (options.batch_size == 0) throw UsageError("classifier batch size must be >= 1");
  if (!(options.lambda >= 0)) throw UsageError("lambda must be non-negative");

  Rng rng(options.seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(examples.size()) *
                                                   options.validation_fraction));
  if (n_val >= examples.size()) n_val = examples.size() - 1;
  std::vector<ClassifierExample> validation;
  std::vector<ClassifierExample> train;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_val ? validation : train).push_back(std::move(examples[order[i]]));
  // Too little data for a held-out split: validate on the training split.
  const bool validate_on_train = validation.empty();

  ClassifierTraining result;
  result.params = ClassifierParams(num_types, dim, options.lambda);
  result.history.train_examples = train.size();
  result.history.validation_examples = validate_on_train ? train.size() : validation.size();

  ClassifierParams grad(num_types, dim, options.lambda);
  ClassifierParams best = result.params;
  std::optional<EmbeddingMatrix> best_embeddings;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  std::vector<std::size_t> batch_order(train.size());
  std::iota(batch_order.begin(), batch_order.end(), 0);
  std::vector<ClassifierExample> batch;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(batch_order.begin(), batch_order.end(), rng);
    for (std::size_t start = 0; start < train.size(); start += options.batch_size) {
      const std::size_t end = std::min(train.size(), start + options.batch_size);
      if (!lm) {
        batch.clear();
        for (std::size_t i = start; i < end; ++i) batch.push_back(train[batch_order[i]]);
        classifier_gradient(result.params, batch, grad);
      } else {
        grad.node_head.zero();
        grad.neighbor_head.zero();
        const double inv = 1.0 / static_cast<double>(end - start);
        struct TokenGrad {
          std::size_t example;
          std::vector<double> node, context, neighbor;
        };
        std::vector<TokenGrad> token_grads;
        for (std::size_t i = start; i < end; ++i) {
          auto& ex = train[batch_order[i]];
          refresh_features(*lm, ex);
          std::vector<double> dxi(2 * dim, 0.0), dxj(2 * dim, 0.0);
          result.params.node_head.loss(concat(ex.node, ex.context), ex.node_type, inv,
                                       &grad.node_head, dxi);
          result.params.neighbor_head.loss(concat(ex.neighbor, ex.context), ex.neighbor_type,
                                           options.lambda * inv, &grad.neighbor_head, dxj);
          TokenGrad tg{batch_order[i], {}, {}, {}};
          tg.node.assign(dxi.begin(), dxi.begin() + static_cast<long>(dim));
          tg.neighbor.assign(dxj.begin(), dxj.begin() + static_cast<long>(dim));
          tg.context.resize(dim);
          for (std::size_t k = 0; k < dim; ++k) tg.context[k] = dxi[dim + k] + dxj[dim + k];
          token_grads.push_back(std::move(tg));
        }
        for (const auto& tg : token_grads) {
          const auto& ex = train[tg.example];
          backprop_tokens(*lm, ex.node_tokens, tg.node, options.lr);
          backprop_tokens(*lm, ex.context_tokens, tg.context, options.lr);
          backprop_tokens(*lm, ex.neighbor_tokens, tg.neighbor, options.lr);
        }
      }
      result.params.node_head.axpy(-options.lr, grad.node_head);
      result.params.neighbor_head.axpy(-options.lr, grad.neighbor_head);
    }

    if (lm) {
      for (auto& ex : train) refresh_features(*lm, ex);
      for (auto& ex : validation) refresh_features(*lm, ex);
    }
    auto tl = classifier_loss(result.params, train);
    auto vl = validate_on_train ? tl : classifier_loss(result.params, validation);
    result.history.train_node.push_back(tl.node);
    result.history.train_neighbor.push_back(tl.neighbor);
    result.history.train_total.push_back(tl.total);
    result.history.validation_total.push_back(vl.total);
    if (vl.total < best_val) {
      best_val = vl.total;
      best = result.params;
      result.history.best_epoch = epoch;
      if (lm) best_embeddings = lm->embeddings();
      since_best = 0;
    } else if (++since_best >= options.patience) {
      break;
    }
  }
  result.params = std::move(best);
  if (lm && best_embeddings) lm->mutable_embeddings() = std::move(*best_embeddings);
  return result;
}

}  // namespace

ClassifierFeatures classifier_features(const ScorerBackend& backend, const Tokens& node_name,
                                       const Tokens& neighbor_name, const Tokens& edge_type_name) {
  if (node_name.empty() || neighbor_name.empty())
    throw UsageError("classifier features need non-empty names");
  return {backend.embed(node_name),
          backend.embed(verbalize_context(neighbor_name, edge_type_name, node_name))};
}

std::vector<double> classify(const ClassifierParams& params, std::span<const double> node_feature,
                             std::span<const double> context_feature) {
  check_dims(params, node_feature.size(), context_feature.size());
  return params.node_head.probabilities(concat(node_feature, context_feature));
}

TypeId predict_type(const ClassifierParams& params, std::span<const double> node_feature,
                    std::span<const double> context_feature) {
  return static_cast<TypeId>(argmax(classify(params, node_feature, context_feature)));
}

std::vector<ClassifierExample> build_classifier_examples(const Hin& hin, const ScorerBackend& backend) {
  std::vector<ClassifierExample> out;
  out.reserve(2 * hin.num_edges());
  for (const auto& e : hin.edges()) {
    const auto& rel = hin.edge_type_name(e.type);
    for (int dir = 0; dir < 2; ++dir) {
      const Node& vi = hin.node(dir == 0 ? e.dst : e.src);
      const Node& vj = hin.node(dir == 0 ? e.src : e.dst);
      ClassifierExample ex;
      ex.node_tokens = vi.name;
      ex.neighbor_tokens = vj.name;
      ex.context_tokens = verbalize_context(vj.name, rel, vi.name);
      ex.node = backend.embed(ex.node_tokens);
      ex.context = backend.embed(ex.context_tokens);
      ex.neighbor = backend.embed(ex.neighbor_tokens);
      ex.node_type = vi.type;
      ex.neighbor_type = vj.type;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

ClassifierLoss classifier_loss(const ClassifierParams& params, std::span<const ClassifierExample> batch) {
  return accumulate(params, batch, nullptr);
}

ClassifierLoss classifier_gradient(const ClassifierParams& params,
                                   std::span<const ClassifierExample> batch, ClassifierParams& grad) {
  grad = ClassifierParams(params.num_types, params.dim, params.lambda);
  return accumulate(params, batch, &grad);
}

ClassifierTraining train_classifier(std::vector<ClassifierExample> examples, std::size_t num_types,
                                    const ClassifierTrainOptions& options) {
  const std::size_t dim = examples.empty() ? 0 : examples.front().node.size();
  return run(std::move(examples), num_types, dim, options, nullptr);
}

ClassifierTraining train_classifier(const Hin& hin, const ScorerBackend& backend,
                                    const ClassifierTrainOptions& options) {
  if (hin.num_node_types() < 2)
    throw DataError("node-type classification needs at least 2 node types (graph has " +
                    std::to_string(hin.num_node_types()) + ")");
  return run(build_classifier_examples(hin, backend), hin.num_node_types(),
             backend.embedding_dim(), options, nullptr);
}

ClassifierTraining train_classifier_joint(const Hin& hin, BuiltinLm& lm,
                                          const ClassifierTrainOptions& options) {
  if (hin.num_node_types() < 2)
    throw DataError("node-type classification needs at least 2 node types (graph has " +
                    std::to_string(hin.num_node_types()) + ")");
  return run(build_classifier_examples(hin, lm), hin.num_node_types(), lm.embedding_dim(), options,
             &lm);
}

double classifier_accuracy(const ClassifierParams& params, std::span<const ClassifierExample> examples) {
  if (examples.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& ex : examples) hits += predict_type(params, ex.node, ex.context) == ex.node_type;
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

void save_classifier(const ClassifierParams& params, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  binary::write_magic(out, kMagic);
  binary::write_u64(out, params.num_types);
  binary::write_u64(out, params.dim);
  binary::write_f64(out, params.lambda);
  for (const auto* head : {&params.node_head, &params.neighbor_head}) {
    for (double w : head->weight) binary::write_f64(out, w);
    for (double b : head->bias) binary::write_f64(out, b);
  }
  if (!out) throw DataError("failed writing " + file.string());
}

ClassifierParams load_classifier(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open classifier " + file.string());
  binary::expect_magic(in, kMagic, file.string());
  auto k = binary::read_u64(in);
  auto d = binary::read_u64(in);
  double lambda = binary::read_f64(in);
  if (k == 0 || d == 0 || k > (1u << 20) || d > (1u << 20))
    throw DataError(file.string() + ": implausible classifier shape");
  ClassifierParams params(k, d, lambda);
  for (auto* head : {&params.node_head, &params.neighbor_head}) {
    for (double& w : head->weight) w = binary::read_f64(in);
    for (double& b : head->bias) b = binary::read_f64(in);
  }
  return params;
}

}  // namespace metafill
