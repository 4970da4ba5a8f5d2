#include <doctest.h>

#include <cmath>
#include <numeric>

#include "metafill/builtin_lm.hpp"
#include "metafill/errors.hpp"
#include "metafill/random.hpp"
#include "metafill/verbalizer.hpp"
#include "test_support.hpp"

using namespace metafill;

namespace {

BuiltinLm bigram(const std::vector<Tokens>& corpus, double k = 1.0) {
  BuiltinLmOptions o;
  o.order = 2;
  o.smoothing = k;
  o.dim = 4;
  o.epochs = 1;
  return BuiltinLm::train_on_corpus(corpus, {}, o);
}

const Hin& small_graph() {
  static const Hin g = testing::make_hin(
      "1\taspirin\tdrug\n2\tfever\tdisease\n3\tibuprofen\tdrug\n4\tpain\tdisease\n5\tbrca1\tgene\n",
      "1\t2\ttreats\n3\t4\ttreats\n3\t2\ttreats\n5\t4\tassociated with\n");
  return g;
}

const BuiltinLm& small_lm() {
  static const BuiltinLm lm = [] {
    BuiltinLmOptions o;
    o.order = 3;
    o.dim = 8;
    o.epochs = 30;
    o.seed = 3;
    return BuiltinLm::train(small_graph(), o);
  }();
  return lm;
}

}  // namespace

TEST_CASE("one edge yields four corpus sentences") {
  const Hin g = testing::make_hin("1\ta\tx\n2\tb\ty\n", "1\t2\tr\n");
  const auto lm = BuiltinLm::train(g, {});
  CHECK(lm.corpus().size() == 4);
  CHECK(lm.name_index().size() == 2);
}

TEST_CASE("hand counted bigram") {
  const auto lm = bigram({{"a", "b", "a", "b"}});
  CHECK(lm.vocabulary().size() == 2);
  CHECK(lm.probability({"a"}, "b") == doctest::Approx(0.75).epsilon(1e-12));
  // P(a | BOS) = (1 + 1) / (1 + 2)
  CHECK(lm.probability({}, "a") == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(lm.score({"a", "b"}) == doctest::Approx(std::log(2.0 / 3.0) + std::log(0.75)).epsilon(1e-12));
}

TEST_CASE("uniform model over eight tokens") {
  std::vector<Tokens> corpus;
  for (char c = 'a'; c < 'i'; ++c) corpus.push_back({std::string(1, c)});
  const auto lm = bigram(corpus, 0.5);
  for (const auto& t : lm.vocabulary()) CHECK(lm.score({t}) == doctest::Approx(std::log(1.0 / 8)).epsilon(1e-12));
}

TEST_CASE("conditionals sum to one on observed and unobserved contexts") {
  const auto& lm = small_lm();
  const auto contexts = lm.observed_contexts();
  REQUIRE(contexts.size() > 5);
  std::size_t checked = 0;
  for (const auto& c : contexts) {
    const auto p = lm.distribution_for_ids(c);
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-9);
    ++checked;
  }
  Rng rng(1);
  const auto& vocab = lm.vocabulary();
  for (; checked < 100; ++checked) {
    Tokens ctx{vocab[uniform_index(rng, vocab.size())], vocab[uniform_index(rng, vocab.size())]};
    const auto p = lm.distribution(ctx);
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-9);
  }
}

TEST_CASE("scores are non-positive and shrink with length") {
  const auto& lm = small_lm();
  const Tokens s{"aspirin", "treats", "fever", "unseen"};
  double prev = 0.0;
  for (std::size_t n = 1; n <= s.size(); ++n) {
    const double v = lm.score(Tokens(s.begin(), s.begin() + static_cast<long>(n)));
    CHECK(std::isfinite(v));
    CHECK(v <= prev);
    prev = v;
  }
  CHECK_THROWS_AS(lm.score({}), UsageError);
}

TEST_CASE("template literals are transparent") {
  const auto& lm = small_lm();
  CHECK(lm.score({"aspirin", ".", "It", "treats"}) == lm.score({"aspirin", "treats"}));
}

TEST_CASE("fill score equals the score of left context plus candidate") {
  const auto& lm = small_lm();
  const auto t = build_infill_template({"aspirin"}, {"pain"}, 2);
  const auto pos = t.position_of(MaskKind::kNode, 1);
  const auto filled = t.filled(t.position_of(MaskKind::kEdge, 1), {"treats"});
  for (const auto& f : lm.fill(filled, pos, nullptr, 100))
    CHECK(f.log_score == lm.score(filled.left_context_with(pos, f.tokens)));
}

TEST_CASE("fill_candidates matches brute-force substitution") {
  const auto& lm = small_lm();
  const auto t = verbalize_edge(small_graph(), small_graph().edges()[1], 3);
  const auto pos = t.masks().front().position;
  const std::vector<Tokens> cands{{"fever"}, {"pain"}, {"brca1"}, {"aspirin"}, {"treats"}};
  for (auto scoring : {FillScoring::kLeftContext, FillScoring::kFullSequence}) {
    const auto fills = fill_candidates(lm, t, pos, cands, 3, scoring);
    std::vector<Fill> brute;
    for (const auto& c : cands) {
      const auto seq = scoring == FillScoring::kLeftContext ? t.left_context_with(pos, c)
                                                            : t.filled(pos, c).literal_tokens();
      brute.push_back({c, lm.score(seq)});
    }
    rank_fills(brute, 3);
    REQUIRE(fills.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(fills[i].tokens == brute[i].tokens);
      CHECK(fills[i].log_score == doctest::Approx(brute[i].log_score).epsilon(1e-12));
    }
  }
  CHECK(fill_candidates(lm, t, pos, cands, 50).size() == cands.size());
}

TEST_CASE("rank_fills breaks ties lexicographically") {
  std::vector<Fill> f{{{"b"}, -1.0}, {{"a"}, -1.0}, {{"c"}, -0.5}};
  rank_fills(f, 2);
  REQUIRE(f.size() == 2);
  CHECK(f[0].tokens == Tokens{"c"});
  CHECK(f[1].tokens == Tokens{"a"});
}

TEST_CASE("score_batch equals per-sequence scores") {
  const auto& lm = small_lm();
  const std::vector<Tokens> seqs{{"aspirin"}, {"fever", "treats"}, {"pain", "relates", "to", "brca1"}};
  const auto batch = lm.score_batch(seqs);
  REQUIRE(batch.size() == seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) CHECK(batch[i] == lm.score(seqs[i]));
}

TEST_CASE("embeddings are means of token rows") {
  const auto& lm = small_lm();
  CHECK(lm.embed({"aspirin", "aspirin"}) == lm.embed({"aspirin"}));
  CHECK(lm.embed({"aspirin"}).size() == lm.info().embedding_dim);
  CHECK(lm.embed({"aspirin"}) != lm.embed({"fever"}));
  CHECK(lm.embed({"never", "seen"}) == lm.embed({"unknown"}));
  for (double x : lm.embeddings().data()) CHECK(std::isfinite(x));
  CHECK_THROWS_AS(lm.embed({}), UsageError);
}

TEST_CASE("training is deterministic and persists") {
  BuiltinLmOptions o;
  o.order = 3;
  o.dim = 8;
  o.epochs = 30;
  o.seed = 3;
  CHECK(BuiltinLm::train(small_graph(), o) == small_lm());
  o.seed = 4;
  CHECK_FALSE(BuiltinLm::train(small_graph(), o) == small_lm());

  const auto file = testing::fresh_dir("lm") / "lm.json";
  small_lm().save(file);
  const auto back = BuiltinLm::load(file);
  CHECK(back == small_lm());
  CHECK(back.score({"aspirin", "treats", "fever"}) == small_lm().score({"aspirin", "treats", "fever"}));
  CHECK_THROWS_AS(BuiltinLm::load(file.parent_path() / "missing.json"), DataError);
  CHECK_THROWS_AS(BuiltinLm::from_json("{\"format\":\"other\"}"), DataError);
}

TEST_CASE("invalid options") {
  BuiltinLmOptions o;
  o.order = 1;
  CHECK_THROWS_AS(BuiltinLm::train(small_graph(), o), UsageError);
  o.order = 2;
  o.smoothing = 0;
  CHECK_THROWS_AS(BuiltinLm::train(small_graph(), o), UsageError);
  CHECK_THROWS_AS(BuiltinLm::train(testing::make_hin("1\ta\tt\n", ""), {}), DataError);
}
