#include <doctest.h>

#include <map>
#include <sstream>

#include "metafill/builtin_lm.hpp"
#include "metafill/errors.hpp"
#include "metafill/path_sampler.hpp"
#include "metafill/random.hpp"
#include "metafill/type_classifier.hpp"
#include "test_support.hpp"

using namespace metafill;

namespace {

// Two node types and two edge types with every (type, edge, type) triple
// present, so no sampling step can dead-end.
const Hin& complete_graph() {
  static const Hin g = testing::make_hin(
      "1\taspirin\tdrug\n2\tibuprofen\tdrug\n3\tstatin\tdrug\n"
      "4\tfever\tdisease\n5\tpain\tdisease\n6\tgout\tdisease\n",
      "1\t4\ttreats\n2\t5\ttreats\n1\t2\ttreats\n4\t5\ttreats\n5\t3\ttreats\n"
      "3\t6\tlinked to\n6\t4\tlinked to\n2\t3\tlinked to\n6\t1\tlinked to\n4\t6\tlinked to\n");
  return g;
}

const BuiltinLm& lm() {
  static const BuiltinLm m = [] {
    BuiltinLmOptions o;
    o.order = 3;
    o.dim = 6;
    o.epochs = 10;
    return BuiltinLm::train(complete_graph(), o);
  }();
  return m;
}

ClassifierParams random_classifier(std::uint64_t seed) {
  Rng rng(seed);
  ClassifierParams p(complete_graph().num_node_types(), lm().embedding_dim(), 1.0);
  p.node_head.weight = testing::random_vector(rng, p.node_head.weight.size());
  p.node_head.bias = testing::random_vector(rng, p.node_head.bias.size());
  return p;
}

std::size_t argmax_of(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

TEST_CASE("one hop paths use a schema-valid edge without filling") {
  const Hin& g = complete_graph();
  SamplerConfig c;
  Rng rng(1);
  for (const auto& e : g.edges()) {
    const auto p = sample_path(g, lm(), nullptr, e.src, e.dst, 1, c, rng);
    CHECK(p.hops() == 1);
    CHECK(p.well_formed());
    CHECK(g.schema().contains(p.types[0], p.edge_types[0], p.types[1]));
    CHECK(p.log_score == 0.0);
  }
  const Hin single = testing::make_hin("1\ta\tx\n2\tb\ty\n3\tc\tx\n", "1\t2\tonly\n");
  const auto p = sample_path(single, lm(), nullptr, 0, 1, 1, c, rng);
  CHECK(single.edge_type_name(p.edge_types[0]) == Tokens{"only"});
  CHECK_THROWS_AS(sample_path(single, lm(), nullptr, 0, 2, 1, c, rng), SamplingDeadEnd);
}

TEST_CASE("greedy two hop path matches the brute-force oracle") {
  const Hin& g = complete_graph();
  const auto classifier = random_classifier(4);
  SamplerConfig c;
  c.temperature = 1e-12;
  c.top_k = 3;
  c.graph_type_override = false;
  Rng rng(2);
  for (const auto& e : g.edges()) {
    const Node& h = g.node(e.src);
    const Node& t = g.node(e.dst);
    const auto p = sample_path(g, lm(), &classifier, e.src, e.dst, 2, c, rng);

    // First edge: argmax of score(head + r) over edge types leaving head's type.
    const auto first_ids = g.schema().edges_from(h.type);
    std::vector<double> s;
    for (auto r : first_ids) s.push_back(lm().score(concat(h.name, g.edge_type_name(r))));
    const auto first = first_ids[argmax_of(s)];
    CHECK(p.edge_types[0] == first);

    // Interior: argmax of score(head r name), lexicographic on ties.
    std::vector<Fill> brute;
    for (const auto& name : g.distinct_names())
      brute.push_back({name, lm().score(concat(concat(h.name, g.edge_type_name(first)), name))});
    rank_fills(brute, 1);
    CHECK(p.names[1] == brute[0].tokens);
    CHECK(p.log_score == doctest::Approx(brute[0].log_score).epsilon(1e-12));

    const auto f = classifier_features(lm(), brute[0].tokens, h.name, g.edge_type_name(first));
    const auto probs = classify(classifier, f.node, f.context);
    CHECK(p.types[1] == argmax_of(probs));
    CHECK_FALSE(p.provenance[1].has_value());
    CHECK(p.names[2] == t.name);
  }
}

TEST_CASE("graph names take their graph type when the override is on") {
  const Hin& g = complete_graph();
  SamplerConfig c;
  c.max_hops = 3;
  Rng rng(5);
  for (int i = 0; i < 30; ++i) {
    const auto p = sample_path(g, lm(), nullptr, 0, 3, 3, c, rng);
    for (std::size_t k = 1; k + 1 < p.names.size(); ++k) {
      REQUIRE(p.provenance[k].has_value());
      CHECK(g.node(*p.provenance[k]).name == p.names[k]);
      CHECK(p.types[k] == g.node(*p.provenance[k]).type);
    }
  }
}

TEST_CASE("sampled paths are structurally valid and schema-consistent") {
  const Hin& g = complete_graph();
  SamplerConfig c;
  c.pairs = 12;
  c.repeats = 3;
  c.max_hops = 4;
  const auto classifier = random_classifier(9);
  const auto run = sample_paths(g, lm(), &classifier, c, {});
  CHECK(run.paths.size() == 12 * 4 * 3);
  CHECK(run.stats.dead_end_rate() == 0.0);
  CHECK(run.stats.skipped == 0);
  for (const auto& p : run.paths) {
    CHECK(p.well_formed());
    CHECK(p.hops() >= 1);
    CHECK(p.hops() <= 4);
    for (std::size_t k = 0; k < p.hops(); ++k)
      CHECK(g.schema().contains(p.types[k], p.edge_types[k], p.types[k + 1]));
  }
}

TEST_CASE("sampling runs are reproducible and independent of workers") {
  const Hin& g = complete_graph();
  SamplerConfig c;
  c.pairs = 8;
  c.repeats = 2;
  c.max_hops = 3;
  const auto a = sample_paths(g, lm(), nullptr, c, {});
  c.workers = 4;
  const auto b = sample_paths(g, lm(), nullptr, c, {});
  CHECK(a.paths == b.paths);
  c.seed = 2;
  CHECK_FALSE(sample_paths(g, lm(), nullptr, c, {}).paths == a.paths);
}

TEST_CASE("a missing classifier is a usage error for out-of-graph names") {
  const Hin& g = complete_graph();
  SamplerConfig c;
  c.graph_type_override = false;
  Rng rng(1);
  CHECK_THROWS_AS(sample_path(g, lm(), nullptr, 0, 3, 2, c, rng), UsageError);
}

TEST_CASE("dead ends are counted and skipped") {
  // Type z only receives edges, so any interior node typed z dead-ends.
  const Hin g = testing::make_hin("1\ta\tx\n2\tb\tz\n3\tc\tx\n", "1\t2\tr\n1\t3\tr\n");
  BuiltinLmOptions o;
  o.dim = 4;
  const auto m = BuiltinLm::train(g, o);
  SamplerConfig c;
  c.pairs = 10;
  c.repeats = 5;
  c.min_hops = 2;
  c.max_hops = 2;
  c.temperature = 5.0;
  const auto run = sample_paths(g, m, nullptr, c, {});
  CHECK(run.stats.dead_ends > 0);
  CHECK(run.stats.sampled == run.paths.size());
  CHECK(run.stats.dead_end_rate() > 0.0);
}

TEST_CASE("lp policy draws training edges uniformly") {
  PairSource src;
  src.positive_edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  SamplerConfig c;
  c.policy = SubsetPolicy::kLpTrainingEdges;
  Rng rng(12);
  std::map<std::pair<NodeIndex, NodeIndex>, int> freq;
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++freq[sample_pair(complete_graph(), c, src, rng)];
  REQUIRE(freq.size() == 4);
  double chi2 = 0.0;
  const double expected = n / 4.0, sigma = std::sqrt(n * 0.25 * 0.75);
  for (const auto& [pair, count] : freq) {
    CHECK(std::abs(count - expected) < 3 * sigma);
    chi2 += (count - expected) * (count - expected) / expected;
  }
  CHECK(chi2 < 11.34);  // 99th percentile, 3 degrees of freedom

  PairSource one;
  one.positive_edges = {{2, 5}};
  for (int i = 0; i < 10; ++i) CHECK(sample_pair(complete_graph(), c, one, rng) == std::pair<NodeIndex, NodeIndex>{2, 5});
  CHECK_THROWS_AS(sample_pair(complete_graph(), c, PairSource{}, rng), DataError);
}

TEST_CASE("nc policy weights partners by label cosine") {
  PairSource src;
  src.label_vectors = {{1, 0, 1}, {1, 0, 1}, {0, 1, 0}, {}};
  const auto w = label_partner_weights(src, 0);
  CHECK(w[0] == 0.0);
  CHECK(w[1] == doctest::Approx(1.0));
  CHECK(w[2] == 0.0);
  CHECK(w[3] == 0.0);

  SamplerConfig c;
  c.policy = SubsetPolicy::kNcLabelSimilar;
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto [a, b] = sample_pair(complete_graph(), c, src, rng);
    CHECK(((a == 0 && b == 1) || (a == 1 && b == 0)));
  }
  CHECK(parse_subset_policy(to_string(SubsetPolicy::kNcLabelSimilar)) == SubsetPolicy::kNcLabelSimilar);
  CHECK_THROWS_AS(parse_subset_policy("some"), UsageError);
}

TEST_CASE("config validation") {
  SamplerConfig c;
  c.max_hops = 9;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c.max_hops = 2;
  c.min_hops = 3;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c.min_hops = 1;
  c.repeats = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("json lines round trip") {
  const Hin& g = complete_graph();
  SamplerConfig c;
  c.pairs = 4;
  c.repeats = 1;
  c.max_hops = 3;
  const auto classifier = random_classifier(1);
  c.graph_type_override = false;
  const auto run = sample_paths(g, lm(), &classifier, c, {});
  std::stringstream buf;
  write_paths(g, run.paths, buf);
  const auto back = read_paths(g, buf);
  REQUIRE(back.size() == run.paths.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].names == run.paths[i].names);
    CHECK(back[i].edge_types == run.paths[i].edge_types);
    CHECK(back[i].types == run.paths[i].types);
    CHECK(back[i].provenance == run.paths[i].provenance);
  }
  CHECK(typed_path_to_json(g, run.paths[0]).find('\n') == std::string::npos);
  CHECK_THROWS_AS(typed_path_from_json(g, "{\"names\": 1}"), DataError);
}
