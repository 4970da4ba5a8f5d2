#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metafill/hin.hpp"
#include "metafill/lm_backend.hpp"
#include "metafill/random.hpp"
#include "metafill/type_classifier.hpp"

namespace metafill {

// A sampled path: names[0] -etypes[0]-> names[1] ... -etypes[l-1]-> names[l].
// Endpoints always come from the graph; interior names are LM fills.
struct TypedPath {
  std::vector<Tokens> names;
  std::vector<EdgeTypeId> edge_types;
  std::vector<TypeId> types;
  // Graph node a name resolved to; nullopt for classifier-typed names.
  std::vector<std::optional<NodeIndex>> provenance;
  double log_score = 0.0;

  std::size_t hops() const { return edge_types.size(); }
  bool well_formed() const {
    return !edge_types.empty() && names.size() == edge_types.size() + 1 &&
           types.size() == names.size() && provenance.size() == names.size() &&
           provenance.front().has_value() && provenance.back().has_value();
  }
  friend bool operator==(const TypedPath&, const TypedPath&) = default;
};

enum class SubsetPolicy { kLpTrainingEdges, kNcLabelSimilar, kAll };

std::string to_string(SubsetPolicy policy);
SubsetPolicy parse_subset_policy(const std::string& text);

struct SamplerConfig {
  int min_hops = 1;
  int max_hops = 4;
  std::size_t repeats = 10;  // per (pair, hop length)
  std::size_t pairs = 50;    // node pairs drawn per run
  double temperature = 1.0;  // edge-type proposal and fill sampling
  std::size_t top_k = 10;    // fills kept before sampling a node name
  SubsetPolicy policy = SubsetPolicy::kAll;
  std::size_t retries = 3;   // per (pair, hop length) on a dead end
  bool graph_type_override = true;
  FillScoring fill_scoring = FillScoring::kLeftContext;
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  void validate() const;
};

// Data the subset policies draw from.
struct PairSource {
  std::vector<std::pair<NodeIndex, NodeIndex>> positive_edges;  // lp-training-edges
  std::vector<std::vector<double>> label_vectors;               // nc-label-similar (per node; empty = unlabeled)
};

std::pair<NodeIndex, NodeIndex> sample_pair(const Hin& hin, const SamplerConfig& config,
                                            const PairSource& source, Rng& rng);

// Partner weights of the nc-label-similar policy for a chosen first node:
// cosine similarity of multi-hot label vectors (0 for unlabeled nodes and
// for the node itself).
std::vector<double> label_partner_weights(const PairSource& source, NodeIndex first);

// Infills one l-hop path between head and tail. Throws SamplingDeadEnd when
// no schema-valid edge type exists at some step.
TypedPath sample_path(const Hin& hin, const ScorerBackend& backend, const ClassifierParams* classifier,
                      NodeIndex head, NodeIndex tail, int hops, const SamplerConfig& config, Rng& rng);

struct SamplingStats {
  std::size_t attempts = 0;    // (pair, hop, repeat) slots
  std::size_t dead_ends = 0;   // individual dead-end throws, including retried ones
  std::size_t skipped = 0;     // slots that exhausted their retry budget
  std::size_t sampled = 0;
  // Fraction of individual sample_path calls that hit a dead end.
  double dead_end_rate() const {
    const auto tries = sampled + dead_ends;
    return tries ? static_cast<double>(dead_ends) / static_cast<double>(tries) : 0.0;
  }
};

struct SamplingRun {
  std::vector<TypedPath> paths;
  SamplingStats stats;
};

// Draws config.pairs pairs; for every pair iterates the hop range,
// config.repeats times each. Pair p uses the seed derive_seed(seed, p), so
// results do not depend on the worker count.
SamplingRun sample_paths(const Hin& hin, const ScorerBackend& backend,
                         const ClassifierParams* classifier, const SamplerConfig& config,
                         const PairSource& source);

// JSON-lines: one TypedPath per line.
std::string typed_path_to_json(const Hin& hin, const TypedPath& path);
TypedPath typed_path_from_json(const Hin& hin, const std::string& line);
void write_paths(const Hin& hin, const std::vector<TypedPath>& paths, std::ostream& out);
std::vector<TypedPath> read_paths(const Hin& hin, std::istream& in);
void write_paths_file(const Hin& hin, const std::vector<TypedPath>& paths, const std::filesystem::path& file);
std::vector<TypedPath> read_paths_file(const Hin& hin, const std::filesystem::path& file);

}  // namespace metafill
