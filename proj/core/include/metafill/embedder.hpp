#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "metafill/hin.hpp"
#include "metafill/induction.hpp"
#include "metafill/skipgram.hpp"

namespace metafill {

// The metapath pattern repeated until it spans `transitions` edges:
// a1 r1 a2 ... rl a(l+1) r1 a2 r2 ...
MetaPath cycled_metapath(const MetaPath& metapath, std::size_t transitions);

struct WalkOptions {
  std::size_t walk_length = 1;  // transitions per walk
  std::size_t walks_per_node = 10;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

struct MetapathWalk {
  PathInstance path;
  std::size_t metapath = 0;  // index into the ranked entries
};

// Walks for every on-schema entry and every node of its first type, in
// (entry, node index, repeat) order. Each (entry, node) draws from its own
// derived seed, so the output does not depend on the worker count.
std::vector<MetapathWalk> metapath_walks(const Hin& hin, const RankedMetaPaths& metapaths,
                                         const WalkOptions& options);

struct EmbeddingMeta {
  std::size_t walks_per_node = 0;
  std::size_t walk_length = 0;
  std::size_t window = 0;
  std::size_t negatives = 0;
  double lr = 0.0;
  std::size_t epochs = 0;
  std::uint64_t seed = 0;
  std::size_t walks = 0;
  std::vector<NodeId> unvisited;  // rows that kept their initial values
  std::vector<double> epoch_loss;
};

// One row per graph node, in node-index order.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<NodeId> ids, EmbeddingMatrix vectors, EmbeddingMeta meta = {});

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return vectors_.dim(); }
  const std::vector<NodeId>& ids() const { return ids_; }
  const EmbeddingMatrix& matrix() const { return vectors_; }
  EmbeddingMatrix& matrix() { return vectors_; }
  const EmbeddingMeta& meta() const { return meta_; }
  EmbeddingMeta& meta() { return meta_; }

  std::optional<std::size_t> row_of(NodeId id) const;
  // Throws DataError for an unknown id.
  std::span<const double> vector(NodeId id) const;

  friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
    return a.ids_ == b.ids_ && a.vectors_ == b.vectors_;
  }

 private:
  std::vector<NodeId> ids_;
  EmbeddingMatrix vectors_;
  EmbeddingMeta meta_;
  std::unordered_map<NodeId, std::size_t> index_;
};

// Skip-gram over walk node sequences; vocabulary = graph nodes.
EmbeddingTable train_embeddings(const Hin& hin, const std::vector<MetapathWalk>& walks,
                                const SkipGramOptions& options, const WalkOptions& walk_options);

struct EmbedOptions {
  WalkOptions walks;
  SkipGramOptions skipgram;
};

EmbeddingTable embed_hin(const Hin& hin, const RankedMetaPaths& metapaths, const EmbedOptions& options);

// Untrained table with the skip-gram initialisation.
EmbeddingTable random_embeddings(const Hin& hin, std::size_t dim, std::uint64_t seed);

// Text: "node_id<TAB>v1 v2 ..." per row (shortest round-trip decimal), plus a
// JSON sidecar `<file>.json` with the training metadata.
void write_embeddings_text(const EmbeddingTable& table, const std::filesystem::path& file);
EmbeddingTable read_embeddings_text(const std::filesystem::path& file);
std::string embedding_meta_to_json(const EmbeddingMeta& meta, std::size_t dim);

// Binary little-endian: magic, u64 n, u64 dim, n x i64 ids, n*dim x f64.
void write_embeddings_binary(const EmbeddingTable& table, const std::filesystem::path& file);
EmbeddingTable read_embeddings_binary(const std::filesystem::path& file);

// Picks the reader from the extension: ".bin" is binary, anything else text.
EmbeddingTable read_embeddings(const std::filesystem::path& file);

}  // namespace metafill
