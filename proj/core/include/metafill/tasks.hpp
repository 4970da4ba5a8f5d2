#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "metafill/embedder.hpp"
#include "metafill/hin.hpp"
#include "metafill/linear_softmax.hpp"
#include "metafill/lm_backend.hpp"
#include "metafill/metrics.hpp"

namespace metafill {

using NodePair = std::pair<NodeId, NodeId>;

// sigma(e_u . e_v)
double edge_score(const EmbeddingTable& table, NodeId u, NodeId v);

// ---- link prediction ----

struct LinkPredictionData {
  std::string target;  // edge-type name
  std::vector<NodePair> train_positives;
  std::vector<NodePair> train_negatives;
  std::vector<NodePair> test_positives;
  std::vector<NodePair> test_negatives;
};

struct LinkPredictionSplit {
  Hin train_graph;  // input graph minus the test positives
  LinkPredictionData data;
};

struct LpSplitOptions {
  double test_fraction = 0.2;
  std::uint64_t seed = 1;
};

// Holds out a fraction of the target-type edges as test positives. Negatives
// corrupt the tail of each positive with a node whose type is an observed
// tail type of the target relation, 1:1, never hitting a true target edge.
LinkPredictionSplit split_link_prediction(const Hin& hin, const std::string& target,
                                          const LpSplitOptions& options);

// Tail-corrupted negatives for arbitrary positives (e.g. zero-shot pairs).
std::vector<NodePair> corrupt_tails(const Hin& hin, EdgeTypeId target, const std::vector<NodePair>& positives,
                                    std::uint64_t seed);

std::string lp_data_to_json(const LinkPredictionData& data);
LinkPredictionData lp_data_from_json(const std::string& text);
void write_lp_data(const LinkPredictionData& data, const std::filesystem::path& file);
LinkPredictionData read_lp_data(const std::filesystem::path& file);

struct LinkPredictionResult {
  double auc = 0.0;
  double ap = 0.0;
  std::vector<NodePair> pairs;  // test positives then test negatives
  std::vector<double> scores;
  std::vector<int> labels;
};

LinkPredictionResult eval_link_prediction(const EmbeddingTable& table, const LinkPredictionData& data);

// Columns: u,v,label,score
void write_scores_csv(const LinkPredictionResult& result, const std::filesystem::path& file);
// Columns: threshold,fpr,tpr
void write_roc_csv(const LinkPredictionResult& result, const std::filesystem::path& file);

// Optional fine-tuning of the embeddings on
// L = -sum_pos log sigma(e_u.e_v) - sum_neg log sigma(-e_u.e_v).
double lp_loss(const EmbeddingTable& table, const std::vector<NodePair>& positives,
               const std::vector<NodePair>& negatives);

struct LpFineTuneOptions {
  double lr = 0.001;
  std::size_t epochs = 1;
  std::uint64_t seed = 1;
};

// Per-pair SGD in a seeded shuffled order. Returns the loss before training
// followed by the loss after each epoch.
std::vector<double> finetune_link_prediction(EmbeddingTable& table, const std::vector<NodePair>& positives,
                                             const std::vector<NodePair>& negatives,
                                             const LpFineTuneOptions& options);

// ---- node classification ----

// node id -> labels in file order. File rows: node_id<TAB>label.
using NodeLabels = std::map<NodeId, std::vector<std::string>>;
NodeLabels read_labels(const std::filesystem::path& file, const Hin& hin);

// Multi-hot label vectors per node index over the sorted label vocabulary
// (empty for unlabeled nodes).
std::vector<std::vector<double>> label_vectors(const Hin& hin, const NodeLabels& labels);

struct NodeClassificationData {
  std::vector<std::string> class_names;  // sorted; class id = position
  std::vector<NodeId> train_nodes;
  std::vector<std::size_t> train_labels;
  std::vector<NodeId> test_nodes;
  std::vector<std::size_t> test_labels;

  std::size_t classes() const { return class_names.size(); }
};

struct NcSplitOptions {
  double test_fraction = 0.2;
  std::uint64_t seed = 1;
};

// Each node's class is its first listed label.
NodeClassificationData split_node_classification(const NodeLabels& labels, const NcSplitOptions& options);

struct NcTrainOptions {
  double lr = 0.1;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::size_t patience = 10;
  double validation_fraction = 0.125;
  std::uint64_t seed = 1;
};

struct NcTraining {
  LinearSoftmax head;  // W3, b3
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  std::size_t best_epoch = 0;
};

// Mean cross entropy of Softmax(W3 e_v + b3) over the given nodes.
double nc_loss(const LinearSoftmax& head, const EmbeddingTable& table, const std::vector<NodeId>& nodes,
               const std::vector<std::size_t>& labels);
// Same loss; gradient written into `grad` (resized and zeroed first).
double nc_gradient(const LinearSoftmax& head, const EmbeddingTable& table, const std::vector<NodeId>& nodes,
                   const std::vector<std::size_t>& labels, LinearSoftmax& grad);

// Zero-initialised head, mini-batch SGD, early stopping on a validation slice
// of the training nodes. Returns the best-validation head.
NcTraining train_nc_head(const EmbeddingTable& table, const NodeClassificationData& data,
                         const NcTrainOptions& options);

std::vector<std::size_t> predict_classes(const LinearSoftmax& head, const EmbeddingTable& table,
                                         const std::vector<NodeId>& nodes);

F1Scores eval_node_classification(const LinearSoftmax& head, const EmbeddingTable& table,
                                  const NodeClassificationData& data);

// ---- zero-shot pseudo pairs ----

struct ZeroShotOptions {
  std::size_t n = 50;
  std::uint64_t seed = 1;
  double temperature = 1.0;
  std::size_t max_attempts = 0;  // 0 = 20 * n
};

// Fills "[MASK] <relation> [MASK]" left then right over all node names,
// sampling each fill in proportion to exp(log-score / temperature). Keeps
// distinct pairs of distinct existing nodes.
std::vector<NodePair> zero_shot_pairs(const Hin& hin, const ScorerBackend& backend, const Tokens& relation,
                                      const ZeroShotOptions& options);

// ---- hypothesis study ----

struct HypothesisOptions {
  std::size_t paths = 1000;
  std::uint64_t seed = 1;
};

struct HypothesisReport {
  std::vector<PathInstance> paths;  // 2-hop, head != tail
  std::vector<double> plm;           // score of the verbalised path
  std::vector<double> name;          // 1 / (1 + |e_h - e_t|)
  std::vector<double> connectivity;  // 1 if head and tail are adjacent
  double spearman_name = 0.0;
  double spearman_connectivity = 0.0;
};

// "h r1 m . It r2 t"
Tokens verbalize_two_hop(const Hin& hin, const PathInstance& path);
double name_similarity(std::span<const double> head, std::span<const double> tail);

HypothesisReport hypothesis_study(const Hin& hin, const ScorerBackend& backend, const HypothesisOptions& options);
std::string hypothesis_to_json(const Hin& hin, const HypothesisReport& report);

// ---- reports ----

struct EvalReport {
  std::string task;
  std::map<std::string, double> metrics;
  std::string config_json = "{}";
  std::vector<std::string> metapaths;
};

std::string eval_report_to_json(const EvalReport& report);

}  // namespace metafill
