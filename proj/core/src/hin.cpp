#include "metafill/hin.hpp"

#include <algorithm>
#include <tuple>
#include <fstream>
#include <istream>
#include <sstream>

#include "metafill/errors.hpp"

namespace metafill {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

bool skip_line(const std::string& line) {
  auto first = line.find_first_not_of(" \t");
  return first == std::string::npos || line[first] == '#';
}

NodeId parse_id(const std::string& field, std::string_view what, std::size_t line) {
  try {
    std::size_t used = 0;
    long long value = std::stoll(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return static_cast<NodeId>(value);
  } catch (const std::exception&) {
    throw DataError(std::string(what) + " line " + std::to_string(line) +
                    ": malformed id '" + field + "'");
  }
}

std::string where(std::size_t line) {
  return line ? " (line " + std::to_string(line) + ")" : std::string{};
}

template <typename Pred>
std::vector<EdgeTypeId> collect(const std::set<SchemaTriple>& triples, Pred pred) {
  std::set<EdgeTypeId> out;
  for (const auto& t : triples)
    if (pred(t)) out.insert(t.edge);
  return {out.begin(), out.end()};
}

}  // namespace

std::vector<EdgeTypeId> Schema::edges_from(TypeId src) const {
  return collect(triples_, [&](const SchemaTriple& t) { return t.src == src; });
}

std::vector<EdgeTypeId> Schema::edges_into(TypeId dst) const {
  return collect(triples_, [&](const SchemaTriple& t) { return t.dst == dst; });
}

std::vector<EdgeTypeId> Schema::edges_between(TypeId src, TypeId dst) const {
  return collect(triples_,
                 [&](const SchemaTriple& t) { return t.src == src && t.dst == dst; });
}

bool MetaPath::on_schema(const Schema& schema) const {
  if (!well_formed()) return false;
  for (std::size_t i = 0; i < edge_types.size(); ++i)
    if (!schema.contains(node_types[i], edge_types[i], node_types[i + 1])) return false;
  return true;
}

std::optional<NodeIndex> Hin::index_of(NodeId id) const {
  auto it = id_index_.find(id);
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex Hin::require_index(NodeId id) const {
  auto idx = index_of(id);
  if (!idx) throw DataError("unknown node id " + std::to_string(id));
  return *idx;
}

std::optional<TypeId> Hin::find_type(std::string_view name) const {
  auto key = join(tokenize(name));
  for (std::size_t t = 0; t < type_names_.size(); ++t)
    if (join(type_names_[t]) == key) return static_cast<TypeId>(t);
  return std::nullopt;
}

std::optional<EdgeTypeId> Hin::find_edge_type(std::string_view name) const {
  auto key = join(tokenize(name));
  for (std::size_t r = 0; r < edge_type_names_.size(); ++r)
    if (join(edge_type_names_[r]) == key) return static_cast<EdgeTypeId>(r);
  return std::nullopt;
}

bool Hin::has_edge(NodeIndex src, NodeIndex dst) const {
  const auto& out = out_.at(src);
  return std::any_of(out.begin(), out.end(), [&](const Neighbor& n) { return n.node == dst; });
}

bool Hin::has_edge(NodeIndex src, EdgeTypeId type, NodeIndex dst) const {
  const auto& out = out_.at(src);
  return std::any_of(out.begin(), out.end(), [&](const Neighbor& n) {
    return n.node == dst && n.edge_type == type;
  });
}

const std::vector<NodeIndex>& Hin::nodes_named(const Tokens& name) const {
  static const std::vector<NodeIndex> kNone;
  auto it = name_index_.find(join(name));
  return it == name_index_.end() ? kNone : it->second;
}

Hin Hin::without_edges(const std::vector<Edge>& removed) const {
  std::set<std::tuple<NodeIndex, NodeIndex, EdgeTypeId>> drop;
  for (const auto& e : removed) drop.emplace(e.src, e.dst, e.type);
  Hin copy = *this;
  copy.edges_.clear();
  copy.warnings_.clear();
  for (const auto& e : edges_)
    if (!drop.contains({e.src, e.dst, e.type})) copy.edges_.push_back(e);
  copy.finalize();
  return copy;
}

void Hin::finalize() {
  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  for (const auto& e : edges_) {
    out_[e.src].push_back({e.type, e.dst});
    in_[e.dst].push_back({e.type, e.src});
  }
  id_index_.clear();
  name_index_.clear();
  distinct_names_.clear();
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    id_index_.emplace(nodes_[i].id, i);
    auto [it, inserted] = name_index_.try_emplace(join(nodes_[i].name));
    if (inserted) distinct_names_.push_back(nodes_[i].name);
    it->second.push_back(i);
  }
  schema_ = derive_schema(*this);
}

TypeId HinBuilder::intern_type(std::string_view type_name) {
  auto tokens = tokenize(type_name);
  if (tokens.empty()) throw DataError("empty node type name" + where(current_line));
  auto key = join(tokens);
  auto [it, inserted] =
      type_ids_.try_emplace(key, static_cast<TypeId>(hin_.type_names_.size()));
  if (inserted) hin_.type_names_.push_back(std::move(tokens));
  return it->second;
}

EdgeTypeId HinBuilder::intern_edge_type(std::string_view edge_type_name) {
  auto tokens = tokenize(edge_type_name);
  if (tokens.empty()) throw DataError("empty edge type name" + where(current_line));
  auto key = join(tokens);
  auto [it, inserted] =
      edge_type_ids_.try_emplace(key, static_cast<EdgeTypeId>(hin_.edge_type_names_.size()));
  if (inserted) hin_.edge_type_names_.push_back(std::move(tokens));
  return it->second;
}

HinBuilder& HinBuilder::add_node(NodeId id, std::string_view name, std::string_view type_name) {
  auto tokens = tokenize(name);
  if (tokens.empty())
    throw DataError("empty name for node " + std::to_string(id) + where(current_line));
  if (hin_.id_index_.contains(id))
    throw DataError("duplicate node id " + std::to_string(id) + where(current_line));
  Node node;
  node.id = id;
  node.name = std::move(tokens);
  node.raw_name = std::string(name);
  node.type = intern_type(type_name);
  hin_.id_index_.emplace(id, hin_.nodes_.size());
  hin_.nodes_.push_back(std::move(node));
  return *this;
}

HinBuilder& HinBuilder::add_edge(NodeId src, NodeId dst, std::string_view edge_type_name) {
  auto type = intern_edge_type(edge_type_name);
  pending_.push_back({src, dst, type, current_line});
  return *this;
}

Hin HinBuilder::build() {
  std::set<std::tuple<NodeIndex, NodeIndex, EdgeTypeId>> seen;
  for (const auto& p : pending_) {
    auto s = hin_.index_of(p.src);
    auto d = hin_.index_of(p.dst);
    if (!s || !d) {
      throw DataError("edge references unknown node " + std::to_string(s ? p.dst : p.src) +
                      where(p.line));
    }
    if (!seen.emplace(*s, *d, p.type).second) {
      hin_.warnings_.push_back("duplicate edge " + std::to_string(p.src) + " -> " +
                               std::to_string(p.dst) + " (" +
                               join(hin_.edge_type_names_[p.type]) + ") dropped" +
                               where(p.line));
      continue;
    }
    hin_.edges_.push_back({*s, *d, p.type});
  }
  pending_.clear();
  hin_.finalize();
  return std::move(hin_);
}

Hin load_hin(std::istream& nodes_source, std::istream& edges_source) {
  HinBuilder builder;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(nodes_source, line)) {
    ++lineno;
    line = strip_cr(std::move(line));
    if (skip_line(line)) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3)
      throw DataError("nodes line " + std::to_string(lineno) + ": expected 3 tab-separated fields");
    builder.current_line = lineno;
    try {
      builder.add_node(parse_id(fields[0], "nodes", lineno), fields[1], fields[2]);
    } catch (const DataError& e) {
      throw DataError(std::string("nodes: ") + e.what());
    }
  }
  lineno = 0;
  while (std::getline(edges_source, line)) {
    ++lineno;
    line = strip_cr(std::move(line));
    if (skip_line(line)) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3)
      throw DataError("edges line " + std::to_string(lineno) + ": expected 3 tab-separated fields");
    builder.current_line = lineno;
    try {
      builder.add_edge(parse_id(fields[0], "edges", lineno), parse_id(fields[1], "edges", lineno),
                       fields[2]);
    } catch (const DataError& e) {
      throw DataError(std::string("edges: ") + e.what());
    }
  }
  try {
    return builder.build();
  } catch (const DataError& e) {
    throw DataError(std::string("edges: ") + e.what());
  }
}

Hin load_hin_files(const std::filesystem::path& nodes_file,
                   const std::filesystem::path& edges_file) {
  std::ifstream nodes(nodes_file);
  if (!nodes) throw DataError("cannot open nodes file " + nodes_file.string());
  std::ifstream edges(edges_file);
  if (!edges) throw DataError("cannot open edges file " + edges_file.string());
  return load_hin(nodes, edges);
}

Schema derive_schema(const Hin& hin) {
  std::set<SchemaTriple> triples;
  for (const auto& e : hin.edges())
    triples.insert({hin.node(e.src).type, e.type, hin.node(e.dst).type});
  return Schema(std::move(triples));
}

bool path_matches(const Hin& hin, const PathInstance& path, const MetaPath& metapath) {
  if (path.nodes.size() != metapath.node_types.size() ||
      path.edges.size() != metapath.edge_types.size())
    return false;
  for (std::size_t i = 0; i < path.nodes.size(); ++i)
    if (hin.node(path.nodes[i]).type != metapath.node_types[i]) return false;
  for (std::size_t i = 0; i < path.edges.size(); ++i)
    if (path.edges[i] != metapath.edge_types[i]) return false;
  return true;
}

std::string describe(const Hin& hin, const MetaPath& metapath) {
  std::ostringstream out;
  for (std::size_t i = 0; i < metapath.node_types.size(); ++i) {
    if (i) out << " -[" << join(hin.edge_type_name(metapath.edge_types[i - 1])) << "]-> ";
    out << join(hin.type_name(metapath.node_types[i]));
  }
  return out.str();
}

}  // namespace metafill
