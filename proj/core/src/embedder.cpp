#include "metafill/embedder.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "metafill/binary_io.hpp"
#include "metafill/errors.hpp"
#include "metafill/random.hpp"

namespace metafill {

using nlohmann::json;

MetaPath cycled_metapath(const MetaPath& metapath, std::size_t transitions) {
  if (!metapath.well_formed()) throw UsageError("cannot cycle a malformed meta-path");
  const auto l = metapath.hops();
  MetaPath out;
  out.node_types.push_back(metapath.node_types.front());
  for (std::size_t i = 0; i < transitions; ++i) {
    out.edge_types.push_back(metapath.edge_types[i % l]);
    out.node_types.push_back(metapath.node_types[i % l + 1]);
  }
  return out;
}

namespace {

PathInstance walk_once(const Hin& hin, const MetaPath& mp, NodeIndex start, std::size_t length, Rng& rng,
                       std::vector<NodeIndex>& scratch) {
  PathInstance walk;
  walk.nodes.push_back(start);
  const auto l = mp.hops();
  NodeIndex cur = start;
  for (std::size_t i = 0; i < length; ++i) {
    const auto r = mp.edge_types[i % l];
    const auto a = mp.node_types[i % l + 1];
    scratch.clear();
    for (const auto& nb : hin.out_neighbors(cur))
      if (nb.edge_type == r && hin.node(nb.node).type == a) scratch.push_back(nb.node);
    if (scratch.empty()) break;
    cur = scratch[uniform_index(rng, scratch.size())];
    walk.edges.push_back(r);
    walk.nodes.push_back(cur);
  }
  return walk;
}

template <class F>
void parallel_for(std::size_t n, std::size_t workers, F&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) body(i);
    });
}

}  // namespace

std::vector<MetapathWalk> metapath_walks(const Hin& hin, const RankedMetaPaths& metapaths,
                                         const WalkOptions& options) {
  if (options.walk_length < 1) throw UsageError("walk length must be >= 1");
  struct Job {
    std::size_t metapath;
    NodeIndex start;
  };
  std::vector<Job> jobs;
  bool any = false;
  for (std::size_t m = 0; m < metapaths.entries.size(); ++m) {
    const auto& entry = metapaths.entries[m];
    if (entry.off_schema || !entry.metapath.well_formed() || !entry.metapath.on_schema(hin.schema())) continue;
    any = true;
    for (NodeIndex v = 0; v < hin.num_nodes(); ++v)
      if (hin.node(v).type == entry.metapath.node_types.front()) jobs.push_back({m, v});
  }
  if (!any) throw DataError("no on-schema meta-path to guide walks");

  const auto per = options.walks_per_node;
  std::vector<MetapathWalk> out(jobs.size() * per);
  parallel_for(jobs.size(), options.workers, [&](std::size_t j) {
    const auto& job = jobs[j];
    Rng rng(derive_seed(derive_seed(options.seed, job.metapath), job.start));
    std::vector<NodeIndex> scratch;
    const auto& mp = metapaths.entries[job.metapath].metapath;
    for (std::size_t k = 0; k < per; ++k)
      out[j * per + k] = {walk_once(hin, mp, job.start, options.walk_length, rng, scratch), job.metapath};
  });
  return out;
}

EmbeddingTable::EmbeddingTable(std::vector<NodeId> ids, EmbeddingMatrix vectors, EmbeddingMeta meta)
    : ids_(std::move(ids)), vectors_(std::move(vectors)), meta_(std::move(meta)) {
  if (ids_.size() != vectors_.rows()) throw DataError("embedding table: id count does not match rows");
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (!index_.emplace(ids_[i], i).second)
      throw DataError("embedding table: duplicate node id " + std::to_string(ids_[i]));
}

std::optional<std::size_t> EmbeddingTable::row_of(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const double> EmbeddingTable::vector(NodeId id) const {
  auto r = row_of(id);
  if (!r) throw DataError("node " + std::to_string(id) + " has no embedding");
  return vectors_.row(*r);
}

namespace {

std::vector<NodeId> node_ids(const Hin& hin) {
  std::vector<NodeId> ids;
  ids.reserve(hin.num_nodes());
  for (const auto& n : hin.nodes()) ids.push_back(n.id);
  return ids;
}

}  // namespace

EmbeddingTable train_embeddings(const Hin& hin, const std::vector<MetapathWalk>& walks,
                                const SkipGramOptions& options, const WalkOptions& walk_options) {
  if (options.dim < 1) throw UsageError("embedding dimension must be >= 1");
  if (walks.empty()) throw DataError("no walks to train on");
  std::vector<std::vector<std::size_t>> sequences;
  sequences.reserve(walks.size());
  for (const auto& w : walks) sequences.emplace_back(w.path.nodes.begin(), w.path.nodes.end());
  auto result = train_sgns(sequences, hin.num_nodes(), options);

  EmbeddingMeta meta;
  meta.walks_per_node = walk_options.walks_per_node;
  meta.walk_length = walk_options.walk_length;
  meta.window = options.window;
  meta.negatives = options.negatives;
  meta.lr = options.lr;
  meta.epochs = options.epochs;
  meta.seed = options.seed;
  meta.walks = walks.size();
  meta.epoch_loss = result.epoch_loss;
  for (NodeIndex v = 0; v < hin.num_nodes(); ++v)
    if (!result.visited[v]) meta.unvisited.push_back(hin.node(v).id);
  return EmbeddingTable(node_ids(hin), std::move(result.vectors), std::move(meta));
}

EmbeddingTable embed_hin(const Hin& hin, const RankedMetaPaths& metapaths, const EmbedOptions& options) {
  auto walks = metapath_walks(hin, metapaths, options.walks);
  return train_embeddings(hin, walks, options.skipgram, options.walks);
}

EmbeddingTable random_embeddings(const Hin& hin, std::size_t dim, std::uint64_t seed) {
  if (dim < 1) throw UsageError("embedding dimension must be >= 1");
  EmbeddingMeta meta;
  meta.seed = seed;
  return EmbeddingTable(node_ids(hin), init_embeddings(hin.num_nodes(), dim, seed), std::move(meta));
}

std::string embedding_meta_to_json(const EmbeddingMeta& meta, std::size_t dim) {
  json doc = {{"dim", dim},
              {"walks_per_node", meta.walks_per_node},
              {"walk_length", meta.walk_length},
              {"window", meta.window},
              {"negatives", meta.negatives},
              {"lr", meta.lr},
              {"epochs", meta.epochs},
              {"seed", meta.seed},
              {"walks", meta.walks},
              {"unvisited", meta.unvisited},
              {"epoch_loss", meta.epoch_loss}};
  return doc.dump(2);
}

void write_embeddings_text(const EmbeddingTable& table, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  char buf[64];
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.ids()[i] << '\t';
    auto row = table.matrix().row(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ' ';
      auto res = std::to_chars(buf, buf + sizeof buf, row[k]);
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  std::ofstream side(file.string() + ".json", std::ios::binary);
  if (!side) throw DataError("cannot write " + file.string() + ".json");
  side << embedding_meta_to_json(table.meta(), table.dim()) << '\n';
}

EmbeddingTable read_embeddings_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open embeddings file " + file.string());
  std::vector<NodeId> ids;
  std::vector<double> data;
  std::size_t dim = 0;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = file.string() + ":" + std::to_string(lineno);
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(where + ": expected node_id<TAB>vector");
    NodeId id = 0;
    auto [p, ec] = std::from_chars(line.data(), line.data() + tab, id);
    if (ec != std::errc{} || p != line.data() + tab) throw DataError(where + ": bad node id");
    std::size_t count = 0;
    const char* s = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    while (s < end) {
      while (s < end && *s == ' ') ++s;
      if (s == end) break;
      double v = 0;
      auto r = std::from_chars(s, end, v);
      if (r.ec != std::errc{} || !std::isfinite(v)) throw DataError(where + ": bad vector entry");
      data.push_back(v);
      ++count;
      s = r.ptr;
    }
    if (ids.empty()) dim = count;
    if (count == 0 || count != dim) throw DataError(where + ": inconsistent vector length");
    ids.push_back(id);
  }
  if (ids.empty()) throw DataError("embeddings file " + file.string() + " is empty");
  EmbeddingMatrix m(ids.size(), dim);
  m.data() = std::move(data);
  return EmbeddingTable(std::move(ids), std::move(m));
}

namespace {
constexpr const char* kEmbeddingMagic = "MFTEMB01";
}

void write_embeddings_binary(const EmbeddingTable& table, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  binary::write_magic(out, kEmbeddingMagic);
  binary::write_u64(out, table.size());
  binary::write_u64(out, table.dim());
  for (auto id : table.ids()) binary::write_i64(out, id);
  for (double v : table.matrix().data()) binary::write_f64(out, v);
}

EmbeddingTable read_embeddings_binary(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open embeddings file " + file.string());
  binary::expect_magic(in, kEmbeddingMagic, file.string());
  const auto n = binary::read_u64(in);
  const auto dim = binary::read_u64(in);
  if (n == 0 || dim == 0 || n > (1ULL << 32) || dim > (1ULL << 20))
    throw DataError(file.string() + ": implausible embedding shape");
  std::vector<NodeId> ids(n);
  for (auto& id : ids) id = binary::read_i64(in);
  EmbeddingMatrix m(n, dim);
  for (auto& v : m.data()) v = binary::read_f64(in);
  return EmbeddingTable(std::move(ids), std::move(m));
}

EmbeddingTable read_embeddings(const std::filesystem::path& file) {
  if (!std::filesystem::exists(file)) throw DataError("embeddings file not found: " + file.string());
  return file.extension() == ".bin" ? read_embeddings_binary(file) : read_embeddings_text(file);
}

}  // namespace metafill
