#include <doctest.h>

#include <cmath>
#include <numeric>

#include "metafill/builtin_lm.hpp"
#include "metafill/errors.hpp"
#include "metafill/linear_softmax.hpp"
#include "metafill/random.hpp"
#include "metafill/type_classifier.hpp"
#include "test_support.hpp"

using namespace metafill;

namespace {

std::vector<std::vector<double>*> blocks(ClassifierParams& p) {
  return {&p.node_head.weight, &p.node_head.bias, &p.neighbor_head.weight, &p.neighbor_head.bias};
}

ClassifierParams random_params(Rng& rng, std::size_t k, std::size_t d, double lambda) {
  ClassifierParams p(k, d, lambda);
  for (auto* b : blocks(p)) *b = testing::random_vector(rng, b->size(), 0.5);
  return p;
}

std::vector<ClassifierExample> random_batch(Rng& rng, std::size_t n, std::size_t k, std::size_t d) {
  std::vector<ClassifierExample> batch(n);
  for (auto& ex : batch) {
    ex.node = testing::random_vector(rng, d);
    ex.context = testing::random_vector(rng, d);
    ex.neighbor = testing::random_vector(rng, d);
    ex.node_type = static_cast<TypeId>(uniform_index(rng, k));
    ex.neighbor_type = static_cast<TypeId>(uniform_index(rng, k));
  }
  return batch;
}

// Class c lives on coordinate c of the node feature; contexts are noise.
std::vector<ClassifierExample> separable(std::size_t per_class, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ClassifierExample> out;
  for (std::size_t i = 0; i < per_class * 2; ++i) {
    ClassifierExample ex;
    const TypeId c = static_cast<TypeId>(i % 2);
    ex.node = {c == 0 ? 1.0 : 0.0, c == 1 ? 1.0 : 0.0, 0.0};
    ex.neighbor = {c == 1 ? 1.0 : 0.0, c == 0 ? 1.0 : 0.0, 0.0};
    ex.context = testing::random_vector(rng, 3, 0.01);
    ex.node_type = c;
    ex.neighbor_type = 1 - c;
    out.push_back(ex);
  }
  return out;
}

}  // namespace

TEST_CASE("softmax basics") {
  const std::vector<double> l{1.0, 0.0};
  const auto p = softmax(l);
  CHECK(p[0] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(p[1] == doctest::Approx(0.2689).epsilon(1e-4));

  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    auto logits = testing::random_vector(rng, 6, 10.0);
    const auto q = softmax(logits);
    CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (auto& x : logits) x += 123.0;
    const auto shifted = softmax(logits);
    for (std::size_t j = 0; j < q.size(); ++j) CHECK(shifted[j] == doctest::Approx(q[j]).epsilon(1e-12));
  }
  CHECK(softmax(std::vector<double>{1000.0, 0.0})[0] == 1.0);
}

TEST_CASE("two-class head with hand-set weights") {
  ClassifierParams p(2, 1, 1.0);
  p.node_head.bias = {1.0, 0.0};
  const std::vector<double> h{1.0}, e{1.0};
  const auto probs = classify(p, h, e);
  CHECK(probs[0] == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1)).epsilon(1e-12));
  CHECK(predict_type(p, h, e) == 0);
  CHECK(argmax(std::vector<double>{2.0, 2.0, 1.0}) == 0);
}

TEST_CASE("gradient of the joint objective matches central differences") {
  Rng rng(21);
  for (int instance = 0; instance < 20; ++instance) {
    const std::size_t k = 2 + uniform_index(rng, 3), d = 1 + uniform_index(rng, 3);
    auto params = random_params(rng, k, d, 0.3 + uniform01(rng));
    const auto batch = random_batch(rng, 5, k, d);
    ClassifierParams grad;
    classifier_gradient(params, batch, grad);
    auto gblocks = blocks(grad);
    auto pblocks = blocks(params);
    for (std::size_t b = 0; b < pblocks.size(); ++b) {
      for (std::size_t i = 0; i < pblocks[b]->size(); ++i) {
        const double numeric = testing::central_difference(
            *pblocks[b], i, [&] { return classifier_loss(params, batch).total; });
        CHECK(testing::relative_error((*gblocks[b])[i], numeric) < 1e-4);
      }
    }
  }
}

TEST_CASE("total loss is linear in lambda") {
  Rng rng(4);
  auto p = random_params(rng, 3, 2, 0.0);
  const auto batch = random_batch(rng, 8, 3, 2);
  const auto at0 = classifier_loss(p, batch);
  CHECK(at0.total == at0.node);
  p.lambda = 2.5;
  const auto at = classifier_loss(p, batch);
  CHECK(at.total == doctest::Approx(at0.node + 2.5 * at0.neighbor).epsilon(1e-12));
}

TEST_CASE("separable toy trains to perfect accuracy") {
  const auto data = separable(20, 3);
  ClassifierTrainOptions o;
  o.lr = 0.5;
  o.epochs = 60;
  o.batch_size = 64;
  o.patience = 60;
  const auto t = train_classifier(data, 2, o);
  CHECK(classifier_accuracy(t.params, data) == 1.0);
  REQUIRE(t.history.train_total.size() >= 10);
  for (std::size_t e = 1; e < 10; ++e) CHECK(t.history.train_total[e] < t.history.train_total[e - 1]);
  CHECK(t.history.train_examples + t.history.validation_examples == data.size());
}

TEST_CASE("early stopping keeps the best validation epoch") {
  const auto data = separable(10, 8);
  ClassifierTrainOptions o;
  o.lr = 0.3;
  o.epochs = 40;
  o.patience = 3;
  const auto t = train_classifier(data, 2, o);
  const auto& v = t.history.validation_total;
  REQUIRE(!v.empty());
  const auto best = static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
  CHECK(t.history.best_epoch == best);
  CHECK(v.size() <= t.history.best_epoch + 1 + o.patience);
}

TEST_CASE("lambda zero makes the total equal the node loss") {
  ClassifierTrainOptions o;
  o.lambda = 0.0;
  o.epochs = 5;
  const auto t = train_classifier(separable(10, 2), 2, o);
  CHECK(t.history.train_total == t.history.train_node);
}

TEST_CASE("classifier file round trip and errors") {
  Rng rng(6);
  const auto p = random_params(rng, 3, 4, 0.7);
  const auto file = testing::fresh_dir("classifier") / "c.bin";
  save_classifier(p, file);
  CHECK(load_classifier(file) == p);
  CHECK_THROWS_AS(load_classifier(file.parent_path() / "none.bin"), DataError);

  CHECK_THROWS_AS(train_classifier(separable(3, 1), 1, {}), DataError);
  const Hin one_type = testing::make_hin("1\ta\tt\n2\tb\tt\n", "1\t2\tr\n");
  const auto lm = BuiltinLm::train(one_type, {});
  CHECK_THROWS_AS(train_classifier(one_type, lm, {}), DataError);
}

TEST_CASE("examples cover each incidence in both directions") {
  const Hin g = testing::make_hin("1\taspirin\tdrug\n2\tfever\tdisease\n3\tpain\tdisease\n",
                                  "1\t2\ttreats\n1\t3\ttreats\n");
  BuiltinLmOptions lo;
  lo.dim = 4;
  const auto lm = BuiltinLm::train(g, lo);
  const auto ex = build_classifier_examples(g, lm);
  CHECK(ex.size() == 2 * g.num_edges());
  for (const auto& e : ex) {
    CHECK(e.node.size() == 4);
    CHECK(e.context_tokens.size() == e.node_tokens.size() + e.neighbor_tokens.size() + 1 + 2);
  }
}
