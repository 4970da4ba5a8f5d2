#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "metafill/hin.hpp"
#include "metafill/linear_softmax.hpp"
#include "metafill/lm_backend.hpp"

namespace metafill {

class BuiltinLm;

// Context-aware node-type classifier. The node head maps [h_i ; h_e] to a
// distribution over the K node types; the neighbour head maps [h_j ; h_e] to
// the neighbour's type and only serves as an auxiliary training signal.
struct ClassifierParams {
  std::size_t num_types = 0;  // K
  std::size_t dim = 0;        // backend embedding dimension d
  double lambda = 1.0;
  LinearSoftmax node_head;      // W1 (K x 2d), b1
  LinearSoftmax neighbor_head;  // W2 (K x 2d), b2

  ClassifierParams() = default;
  ClassifierParams(std::size_t k, std::size_t d, double lam)
      : num_types(k), dim(d), lambda(lam), node_head(k, 2 * d), neighbor_head(k, 2 * d) {}

  friend bool operator==(const ClassifierParams&, const ClassifierParams&) = default;
};

struct ClassifierFeatures {
  std::vector<double> node;     // h_i = embed(v_i)
  std::vector<double> context;  // h_e = embed(v_j [SEP] a [SEP] v_i)
};

ClassifierFeatures classifier_features(const ScorerBackend& backend, const Tokens& node_name,
                                       const Tokens& neighbor_name, const Tokens& edge_type_name);

std::vector<double> classify(const ClassifierParams& params, std::span<const double> node_feature,
                             std::span<const double> context_feature);
// Most probable type; lowest type id wins exact ties.
TypeId predict_type(const ClassifierParams& params, std::span<const double> node_feature,
                    std::span<const double> context_feature);

// One (v_i, e) incidence: e connects v_j and v_i.
struct ClassifierExample {
  std::vector<double> node;      // h_i
  std::vector<double> context;   // h_e
  std::vector<double> neighbor;  // h_j
  TypeId node_type = 0;
  TypeId neighbor_type = 0;
  // Token provenance of the three features (used for joint fine-tuning).
  Tokens node_tokens;
  Tokens context_tokens;
  Tokens neighbor_tokens;
};

// Every incidence in both directions: for edge (s -r-> d) one example with
// v_i = d, v_j = s and one with v_i = s, v_j = d.
std::vector<ClassifierExample> build_classifier_examples(const Hin& hin, const ScorerBackend& backend);

struct ClassifierLoss {
  double node = 0.0;      // L
  double neighbor = 0.0;  // L_ngh
  double total = 0.0;     // L + lambda * L_ngh
};

// Mean per-example losses.
ClassifierLoss classifier_loss(const ClassifierParams& params,
                               std::span<const ClassifierExample> batch);
// Same losses plus the gradient of `total` w.r.t. all four parameter blocks
// (written into `grad`, which is resized and zeroed first).
ClassifierLoss classifier_gradient(const ClassifierParams& params,
                                   std::span<const ClassifierExample> batch, ClassifierParams& grad);

struct ClassifierTrainOptions {
  double lambda = 1.0;
  double lr = 0.1;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::size_t patience = 10;
  double validation_fraction = 0.2;  // train:validation = 4:1
  std::uint64_t seed = 1;
  bool fine_tune_backend = false;  // joint updates; BuiltinLm only
};

struct ClassifierHistory {
  std::vector<double> train_node;      // L per epoch (full training split)
  std::vector<double> train_neighbor;  // L_ngh per epoch
  std::vector<double> train_total;     // L_node per epoch
  std::vector<double> validation_total;
  std::size_t best_epoch = 0;          // 0-based index into the vectors above
  std::size_t train_examples = 0;
  std::size_t validation_examples = 0;
};

struct ClassifierTraining {
  ClassifierParams params;
  ClassifierHistory history;
};

// Mini-batch SGD on L_node over precomputed (frozen) features with early
// stopping on validation L_node. Returns the best-validation parameters.
ClassifierTraining train_classifier(std::vector<ClassifierExample> examples, std::size_t num_types,
                                    const ClassifierTrainOptions& options);

ClassifierTraining train_classifier(const Hin& hin, const ScorerBackend& backend,
                                    const ClassifierTrainOptions& options);

// Joint variant: gradients also flow into the LM's token embeddings through
// the mean-pooled features. The LM is updated in place; it ends at the state
// of the best validation epoch.
ClassifierTraining train_classifier_joint(const Hin& hin, BuiltinLm& lm,
                                          const ClassifierTrainOptions& options);

double classifier_accuracy(const ClassifierParams& params, std::span<const ClassifierExample> examples);

// Flat little-endian file: magic, K, d, lambda, then W1, b1, W2, b2 row-major float64.
void save_classifier(const ClassifierParams& params, const std::filesystem::path& file);
ClassifierParams load_classifier(const std::filesystem::path& file);

}  // namespace metafill
