#include <doctest.h>

#include <numeric>

#include "metafill/errors.hpp"
#include "metafill/induction.hpp"
#include "metafill/random.hpp"
#include "path_oracle.hpp"
#include "test_support.hpp"

using namespace metafill;

namespace {

TypedPath typed(std::vector<TypeId> types, std::vector<EdgeTypeId> edges, const std::string& tag = "x") {
  TypedPath p;
  p.types = std::move(types);
  p.edge_types = std::move(edges);
  for (std::size_t i = 0; i < p.types.size(); ++i) {
    p.names.push_back({tag + std::to_string(i)});
    p.provenance.emplace_back(i);
  }
  return p;
}

}  // namespace

TEST_CASE("counts, ranking and examples") {
  std::vector<TypedPath> paths{typed({0, 1}, {0}, "a"), typed({1, 0}, {1}), typed({0, 1}, {0}, "b"),
                               typed({0, 1}, {0}, "c"), typed({0, 1}, {0}, "d"), typed({1, 0}, {1})};
  const auto r = induce(paths, 5);
  CHECK(r.total_paths == 6);
  REQUIRE(r.entries.size() == 2);
  CHECK(r.entries[0].count == 4);
  CHECK(r.entries[0].metapath == MetaPath{{0, 1}, {0}});
  REQUIRE(r.entries[0].examples.size() == kMaxExamples);
  CHECK(r.entries[0].examples[0].names[0] == Tokens{"a0"});
  CHECK(r.entries[0].examples[2].names[0] == Tokens{"c0"});
  CHECK(r.entries[1].count == 2);
  CHECK(path_to_metapath(paths[1]) == MetaPath{{1, 0}, {1}});
  CHECK_THROWS_AS(induce(paths, 0), UsageError);
  CHECK(induce({}, 3).entries.empty());
}

TEST_CASE("ties break lexicographically and q truncates") {
  std::vector<TypedPath> paths{typed({2, 0}, {0}), typed({0, 2}, {1}), typed({0, 2}, {0}), typed({1, 1}, {0})};
  const auto r = induce(paths, 3);
  REQUIRE(r.entries.size() == 3);
  CHECK(r.entries[0].metapath == MetaPath{{0, 2}, {0}});
  CHECK(r.entries[1].metapath == MetaPath{{0, 2}, {1}});
  CHECK(r.entries[2].metapath == MetaPath{{1, 1}, {0}});
  CHECK(r.total_paths == 4);
}

TEST_CASE("ranking is invariant to input order and counts add up") {
  const Hin g = testing::random_typed_graph(4, 15, 30, 3, 2);
  auto paths = testing::enumerate_paths(g, 3);
  const auto base = induce(paths, 1000);
  CHECK(std::accumulate(base.entries.begin(), base.entries.end(), std::size_t{0},
                        [](std::size_t s, const RankedMetaPath& e) { return s + e.count; }) == paths.size());
  Rng rng(2);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(paths.begin(), paths.end(), rng);
    const auto again = induce(paths, 1000);
    REQUIRE(again.entries.size() == base.entries.size());
    for (std::size_t k = 0; k < base.entries.size(); ++k) {
      CHECK(again.entries[k].metapath == base.entries[k].metapath);
      CHECK(again.entries[k].count == base.entries[k].count);
    }
  }
}

TEST_CASE("exhaustive enumeration agrees with the frequency table oracle") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Hin g = testing::random_typed_graph(seed, 15, 25, 3, 3);
    const auto paths = testing::enumerate_paths(g, 3);
    for (std::size_t q : {1u, 3u, 8u}) CHECK(testing::matches_oracle(induce(paths, q), testing::oracle_top_q(paths, q)));
    // Every enumerated path is a graph path, so nothing is off-schema.
    for (const auto& e : induce(paths, 50, g.schema()).entries) CHECK_FALSE(e.off_schema);
  }
}

TEST_CASE("off-schema meta-paths are flagged only against a schema") {
  const Hin g = testing::make_hin("1\ta\tx\n2\tb\ty\n", "1\t2\tr\n");
  std::vector<TypedPath> paths{typed({0, 1}, {0}), typed({1, 0}, {0}), typed({1, 0}, {0})};
  const auto r = induce(paths, 5, g.schema());
  REQUIRE(r.entries.size() == 2);
  CHECK(r.entries[0].off_schema);
  CHECK_FALSE(r.entries[1].off_schema);
  for (const auto& e : induce(paths, 5).entries) CHECK_FALSE(e.off_schema);
}

TEST_CASE("json output is stable across a round trip") {
  const Hin g = testing::random_typed_graph(9, 12, 20, 2, 2);
  const auto r = induce(testing::enumerate_paths(g, 2), 4, g.schema());
  const auto text = metapaths_to_json(g, r);
  CHECK(text.find("\"off_schema\"") != std::string::npos);
  const auto back = metapaths_from_json(g, text);
  CHECK(metapaths_to_json(g, back) == text);
  CHECK(back.q == 4);
  CHECK(back.total_paths == r.total_paths);

  const auto file = testing::fresh_dir("induction") / "m.json";
  write_metapaths_file(g, r, file);
  CHECK(metapaths_to_json(g, read_metapaths_file(g, file)) == text);
  CHECK_THROWS_AS(metapaths_from_json(g, R"({"q":1,"total_paths":1,"metapaths":[{"node_types":["nope"],"edge_types":[],"count":1,"off_schema":false,"examples":[]}]})"),
                  DataError);
}
