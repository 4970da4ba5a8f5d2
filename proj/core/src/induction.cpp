#include "metafill/induction.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "metafill/errors.hpp"

namespace metafill {

using nlohmann::json;

MetaPath path_to_metapath(const TypedPath& path) {
  if (path.types.size() != path.edge_types.size() + 1)
    throw DataError("typed path has inconsistent lengths");
  return MetaPath{path.types, path.edge_types};
}

namespace {

RankedMetaPaths rank(const std::vector<TypedPath>& paths, std::size_t q, const Schema* schema) {
  if (q < 1) throw UsageError("q must be >= 1");
  std::map<MetaPath, RankedMetaPath> groups;
  for (const auto& p : paths) {
    auto mp = path_to_metapath(p);
    auto [it, inserted] = groups.try_emplace(mp);
    auto& entry = it->second;
    if (inserted) entry.metapath = std::move(mp);
    ++entry.count;
    if (entry.examples.size() < kMaxExamples) entry.examples.push_back(p);
  }
  RankedMetaPaths out;
  out.q = q;
  out.total_paths = paths.size();
  out.entries.reserve(groups.size());
  // std::map iterates in lexicographic order, so a stable sort on count keeps
  // the required tie-break.
  for (auto& [mp, entry] : groups) out.entries.push_back(std::move(entry));
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const RankedMetaPath& a, const RankedMetaPath& b) { return a.count > b.count; });
  if (out.entries.size() > q) out.entries.resize(q);
  if (schema)
    for (auto& e : out.entries) e.off_schema = !e.metapath.on_schema(*schema);
  return out;
}

}  // namespace

RankedMetaPaths induce(const std::vector<TypedPath>& paths, std::size_t q, const Schema& schema) {
  return rank(paths, q, &schema);
}

RankedMetaPaths induce(const std::vector<TypedPath>& paths, std::size_t q) {
  return rank(paths, q, nullptr);
}

std::string metapaths_to_json(const Hin& hin, const RankedMetaPaths& ranked) {
  json arr = json::array();
  for (const auto& e : ranked.entries) {
    json node_types = json::array();
    for (auto a : e.metapath.node_types) node_types.push_back(join(hin.type_name(a)));
    json edge_types = json::array();
    for (auto r : e.metapath.edge_types) edge_types.push_back(join(hin.edge_type_name(r)));
    json examples = json::array();
    for (const auto& p : e.examples) examples.push_back(json::parse(typed_path_to_json(hin, p)));
    arr.push_back({{"node_types", node_types},
                   {"edge_types", edge_types},
                   {"count", e.count},
                   {"off_schema", e.off_schema},
                   {"examples", examples}});
  }
  json doc = {{"q", ranked.q}, {"total_paths", ranked.total_paths}, {"metapaths", arr}};
  return doc.dump(2);
}

RankedMetaPaths metapaths_from_json(const Hin& hin, const std::string& text) {
  try {
    auto doc = json::parse(text);
    RankedMetaPaths out;
    out.q = doc.at("q").get<std::size_t>();
    out.total_paths = doc.value("total_paths", std::size_t{0});
    for (const auto& m : doc.at("metapaths")) {
      RankedMetaPath e;
      for (const auto& a : m.at("node_types")) {
        auto t = hin.find_type(a.get<std::string>());
        if (!t) throw DataError("metapaths file: unknown node type '" + a.get<std::string>() + "'");
        e.metapath.node_types.push_back(*t);
      }
      for (const auto& r : m.at("edge_types")) {
        auto t = hin.find_edge_type(r.get<std::string>());
        if (!t) throw DataError("metapaths file: unknown edge type '" + r.get<std::string>() + "'");
        e.metapath.edge_types.push_back(*t);
      }
      if (!e.metapath.well_formed()) throw DataError("metapaths file: malformed meta-path");
      e.count = m.at("count").get<std::size_t>();
      e.off_schema = m.at("off_schema").get<bool>();
      for (const auto& ex : m.at("examples")) e.examples.push_back(typed_path_from_json(hin, ex.dump()));
      out.entries.push_back(std::move(e));
    }
    return out;
  } catch (const json::exception& e) {
    throw DataError(std::string("metapaths file: ") + e.what());
  }
}

void write_metapaths_file(const Hin& hin, const RankedMetaPaths& ranked, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  out << metapaths_to_json(hin, ranked) << '\n';
}

RankedMetaPaths read_metapaths_file(const Hin& hin, const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open metapaths file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return metapaths_from_json(hin, buf.str());
}

}  // namespace metafill
