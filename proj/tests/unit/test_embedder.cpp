#include <doctest.h>

#include <fstream>

#include "metafill/embedder.hpp"
#include "metafill/errors.hpp"
#include "test_support.hpp"

using namespace metafill;

namespace {

// a_i -r-> b_i -s-> a_{i+1}, plus an isolated c.
const Hin& cycle_graph() {
  static const Hin g = [] {
    HinBuilder b;
    for (int i = 0; i < 4; ++i) {
      b.add_node(i, "a" + std::to_string(i), "A");
      b.add_node(10 + i, "b" + std::to_string(i), "B");
    }
    b.add_node(99, "c", "C");
    for (int i = 0; i < 4; ++i) {
      b.add_edge(i, 10 + i, "r");
      b.add_edge(10 + i, (i + 1) % 4, "s");
    }
    return b.build();
  }();
  return g;
}

RankedMetaPaths single(const MetaPath& mp, bool off = false) {
  RankedMetaPaths r;
  r.q = 1;
  r.total_paths = 1;
  r.entries.push_back({mp, 1, off, {}});
  return r;
}

MetaPath abA() {
  const Hin& g = cycle_graph();
  return {{*g.find_type("A"), *g.find_type("B"), *g.find_type("A")},
          {*g.find_edge_type("r"), *g.find_edge_type("s")}};
}

}  // namespace

TEST_CASE("cycled meta-path repeats the pattern") {
  const auto c = cycled_metapath(abA(), 5);
  CHECK(c.edge_types.size() == 5);
  CHECK(c.node_types.size() == 6);
  const auto a = abA().node_types[0], b = abA().node_types[1];
  CHECK(c.node_types == std::vector<TypeId>{a, b, a, b, a, b});
}

TEST_CASE("walks alternate types on the bipartite cycle") {
  const Hin& g = cycle_graph();
  WalkOptions o;
  o.walk_length = 4;
  o.walks_per_node = 3;
  const auto walks = metapath_walks(g, single(abA()), o);
  CHECK(walks.size() == 4 * 3);
  const auto pattern = cycled_metapath(abA(), 4);
  for (const auto& w : walks) {
    REQUIRE(w.path.nodes.size() == 5);
    CHECK(path_matches(g, w.path, pattern));
    for (std::size_t k = 0; k < w.path.edges.size(); ++k)
      CHECK(g.has_edge(w.path.nodes[k], w.path.edges[k], w.path.nodes[k + 1]));
  }
}

TEST_CASE("walk length one gives single transitions") {
  WalkOptions o;
  const auto walks = metapath_walks(cycle_graph(), single(abA()), o);
  CHECK(walks.size() == 4 * o.walks_per_node);
  for (const auto& w : walks) CHECK(w.path.edges.size() == 1);
}

TEST_CASE("dead ends truncate walks") {
  const Hin g = testing::make_hin("1\ta\tA\n2\tb\tB\n", "1\t2\tr\n");
  RankedMetaPaths r = single(MetaPath{{0, 1}, {0}});
  WalkOptions o;
  o.walk_length = 3;
  for (const auto& w : metapath_walks(g, r, o)) CHECK(w.path.nodes.size() == 2);
}

TEST_CASE("off-schema and malformed entries are skipped") {
  const Hin& g = cycle_graph();
  auto r = single(abA(), true);
  CHECK_THROWS_AS(metapath_walks(g, r, {}), DataError);
  // On the schema by flag, but not by the graph's triples.
  auto fake = single(MetaPath{{abA().node_types[0], abA().node_types[0]}, {abA().edge_types[0]}});
  CHECK_THROWS_AS(metapath_walks(g, fake, {}), DataError);
  r.entries.push_back({abA(), 1, false, {}});
  const auto walks = metapath_walks(g, r, {});
  CHECK_FALSE(walks.empty());
  for (const auto& w : walks) CHECK(w.metapath == 1);
  WalkOptions zero;
  zero.walk_length = 0;
  CHECK_THROWS_AS(metapath_walks(g, single(abA()), zero), UsageError);
}

TEST_CASE("walks do not depend on the worker count") {
  WalkOptions o;
  o.walk_length = 6;
  const auto one = metapath_walks(cycle_graph(), single(abA()), o);
  o.workers = 3;
  const auto three = metapath_walks(cycle_graph(), single(abA()), o);
  REQUIRE(one.size() == three.size());
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(one[i].path.nodes == three[i].path.nodes);
}

TEST_CASE("embedding training flags unvisited nodes and persists") {
  const Hin& g = cycle_graph();
  EmbedOptions o;
  o.walks.walk_length = 4;
  o.skipgram.dim = 5;
  o.skipgram.lr = 0.025;
  o.skipgram.epochs = 2;
  const auto table = embed_hin(g, single(abA()), o);
  CHECK(table.size() == g.num_nodes());
  CHECK(table.dim() == 5);
  CHECK(table.meta().unvisited == std::vector<NodeId>{99});
  CHECK(table.meta().walks == 4 * o.walks.walks_per_node);
  CHECK(table.vector(13).size() == 5);
  CHECK_THROWS_AS(table.vector(12345), DataError);
  CHECK(embed_hin(g, single(abA()), o) == table);

  const auto dir = testing::fresh_dir("embedder");
  write_embeddings_text(table, dir / "e.tsv");
  CHECK(read_embeddings(dir / "e.tsv") == table);
  CHECK(std::filesystem::exists(dir / "e.tsv.json"));
  write_embeddings_binary(table, dir / "e.bin");
  CHECK(read_embeddings(dir / "e.bin") == table);
  CHECK_THROWS_AS(read_embeddings(dir / "missing.tsv"), DataError);
  std::ofstream(dir / "bad.bin") << "nonsense";
  CHECK_THROWS_AS(read_embeddings(dir / "bad.bin"), DataError);

  SkipGramOptions bad = o.skipgram;
  bad.dim = 0;
  CHECK_THROWS_AS(train_embeddings(g, metapath_walks(g, single(abA()), o.walks), bad, o.walks), UsageError);
  CHECK_THROWS_AS(train_embeddings(g, {}, o.skipgram, o.walks), DataError);
}

TEST_CASE("random embeddings are seeded") {
  const auto a = random_embeddings(cycle_graph(), 4, 1);
  CHECK(a.size() == cycle_graph().num_nodes());
  CHECK(a == random_embeddings(cycle_graph(), 4, 1));
  CHECK_FALSE(a == random_embeddings(cycle_graph(), 4, 2));
  CHECK_THROWS_AS(EmbeddingTable({1, 1}, EmbeddingMatrix(2, 3)), DataError);
}
