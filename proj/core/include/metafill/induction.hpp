#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "metafill/hin.hpp"
#include "metafill/path_sampler.hpp"

namespace metafill {

struct RankedMetaPath {
  MetaPath metapath;
  std::size_t count = 0;
  bool off_schema = false;
  std::vector<TypedPath> examples;  // at most 3, in input order
};

// Meta-paths by descending frequency; ties by (node types, edge types)
// lexicographically. At most q entries.
struct RankedMetaPaths {
  std::size_t q = 0;
  std::size_t total_paths = 0;  // input size, counted before truncation
  std::vector<RankedMetaPath> entries;
};

inline constexpr std::size_t kMaxExamples = 3;

MetaPath path_to_metapath(const TypedPath& path);

// Groups by meta-path value, counts, ranks and truncates to q. Entries that
// leave `schema` are kept and flagged off_schema; without a schema nothing is flagged.
RankedMetaPaths induce(const std::vector<TypedPath>& paths, std::size_t q, const Schema& schema);
RankedMetaPaths induce(const std::vector<TypedPath>& paths, std::size_t q);

// {"q": q, "metapaths": [{"node_types": [...], "edge_types": [...], "count": n,
//  "off_schema": b, "examples": [...]}]}
std::string metapaths_to_json(const Hin& hin, const RankedMetaPaths& ranked);
RankedMetaPaths metapaths_from_json(const Hin& hin, const std::string& text);
void write_metapaths_file(const Hin& hin, const RankedMetaPaths& ranked, const std::filesystem::path& file);
RankedMetaPaths read_metapaths_file(const Hin& hin, const std::filesystem::path& file);

}  // namespace metafill
