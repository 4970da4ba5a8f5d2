#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "metafill/tokens.hpp"

namespace metafill {

using NodeId = std::int64_t;      // id as written in the nodes file
using NodeIndex = std::size_t;    // dense position inside a Hin
using TypeId = std::uint32_t;     // dense node-type id
using EdgeTypeId = std::uint32_t; // dense edge-type id

struct Node {
  NodeId id = 0;
  Tokens name;
  std::string raw_name;
  TypeId type = 0;
};

struct Edge {
  NodeIndex src = 0;
  NodeIndex dst = 0;
  EdgeTypeId type = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  EdgeTypeId edge_type = 0;
  NodeIndex node = 0;
};

struct SchemaTriple {
  TypeId src = 0;
  EdgeTypeId edge = 0;
  TypeId dst = 0;

  friend auto operator<=>(const SchemaTriple&, const SchemaTriple&) = default;
};

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::set<SchemaTriple> triples) : triples_(std::move(triples)) {}

  const std::set<SchemaTriple>& triples() const { return triples_; }
  bool empty() const { return triples_.empty(); }
  std::size_t size() const { return triples_.size(); }
  bool contains(TypeId src, EdgeTypeId edge, TypeId dst) const {
    return triples_.contains(SchemaTriple{src, edge, dst});
  }

  // Sorted, de-duplicated edge types.
  std::vector<EdgeTypeId> edges_from(TypeId src) const;
  std::vector<EdgeTypeId> edges_into(TypeId dst) const;
  std::vector<EdgeTypeId> edges_between(TypeId src, TypeId dst) const;

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  std::set<SchemaTriple> triples_;
};

// a_1 -r_1-> a_2 ... -r_l-> a_{l+1}. Validity against a schema is a query,
// not a constructor constraint: classifier-typed paths may leave the schema.
struct MetaPath {
  std::vector<TypeId> node_types;
  std::vector<EdgeTypeId> edge_types;

  std::size_t hops() const { return edge_types.size(); }
  bool well_formed() const {
    return !edge_types.empty() && node_types.size() == edge_types.size() + 1;
  }
  bool on_schema(const Schema& schema) const;

  friend auto operator<=>(const MetaPath&, const MetaPath&) = default;
};

// A concrete walk through the graph: nodes.size() == edges.size() + 1.
struct PathInstance {
  std::vector<NodeIndex> nodes;
  std::vector<EdgeTypeId> edges;
};

class Hin {
 public:
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_node_types() const { return type_names_.size(); }
  std::size_t num_edge_types() const { return edge_type_names_.size(); }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Node& node(NodeIndex i) const { return nodes_.at(i); }

  std::optional<NodeIndex> index_of(NodeId id) const;
  NodeIndex require_index(NodeId id) const;

  const Tokens& type_name(TypeId t) const { return type_names_.at(t); }
  const Tokens& edge_type_name(EdgeTypeId r) const { return edge_type_names_.at(r); }
  const std::vector<Tokens>& type_names() const { return type_names_; }
  const std::vector<Tokens>& edge_type_names() const { return edge_type_names_; }
  std::optional<TypeId> find_type(std::string_view name) const;
  std::optional<EdgeTypeId> find_edge_type(std::string_view name) const;

  const std::vector<Neighbor>& out_neighbors(NodeIndex i) const { return out_.at(i); }
  const std::vector<Neighbor>& in_neighbors(NodeIndex i) const { return in_.at(i); }
  bool has_edge(NodeIndex src, NodeIndex dst) const;
  bool has_edge(NodeIndex src, EdgeTypeId type, NodeIndex dst) const;

  // All nodes carrying exactly this (normalized) name, ascending index.
  const std::vector<NodeIndex>& nodes_named(const Tokens& name) const;
  // Distinct node names in first-appearance order.
  const std::vector<Tokens>& distinct_names() const { return distinct_names_; }

  const Schema& schema() const { return schema_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // A copy of this graph without the listed edges (same node set, same type ids).
  Hin without_edges(const std::vector<Edge>& removed) const;

 private:
  friend class HinBuilder;
  void finalize();

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<Tokens> type_names_;
  std::vector<Tokens> edge_type_names_;
  std::vector<std::vector<Neighbor>> out_;
  std::vector<std::vector<Neighbor>> in_;
  std::unordered_map<NodeId, NodeIndex> id_index_;
  std::unordered_map<std::string, std::vector<NodeIndex>> name_index_;
  std::vector<Tokens> distinct_names_;
  Schema schema_;
  std::vector<std::string> warnings_;
};

class HinBuilder {
 public:
  HinBuilder& add_node(NodeId id, std::string_view name, std::string_view type_name);
  HinBuilder& add_edge(NodeId src, NodeId dst, std::string_view edge_type_name);
  // Pre-registers an edge type so it gets an id even without edges.
  EdgeTypeId intern_edge_type(std::string_view edge_type_name);
  TypeId intern_type(std::string_view type_name);
  Hin build();

 private:
  struct PendingEdge {
    NodeId src;
    NodeId dst;
    EdgeTypeId type;
    std::size_t line;
  };
  Hin hin_;
  std::vector<PendingEdge> pending_;
  std::unordered_map<std::string, TypeId> type_ids_;
  std::unordered_map<std::string, EdgeTypeId> edge_type_ids_;

 public:
  // Line number attached to subsequent errors (0 = none).
  std::size_t current_line = 0;
};

// Parses the tab-separated nodes and edges streams. Throws DataError naming
// the offending line.
Hin load_hin(std::istream& nodes_source, std::istream& edges_source);
Hin load_hin_files(const std::filesystem::path& nodes_file,
                   const std::filesystem::path& edges_file);

Schema derive_schema(const Hin& hin);

bool path_matches(const Hin& hin, const PathInstance& path, const MetaPath& metapath);

std::string describe(const Hin& hin, const MetaPath& metapath);

}  // namespace metafill
