#include <doctest.h>

#include <cmath>

#include "metafill/builtin_lm.hpp"
#include "metafill/errors.hpp"
#include "metafill/remote_backend.hpp"
#include "metafill/verbalizer.hpp"
#include "reference_server.hpp"
#include "test_support.hpp"

using namespace metafill;

namespace {

const BuiltinLm& lm() {
  static const BuiltinLm m = [] {
    BuiltinLmOptions o;
    o.order = 3;
    o.dim = 6;
    o.epochs = 5;
    return BuiltinLm::train(testing::make_hin("1\taspirin\tdrug\n2\tfever\tdisease\n3\tpain\tdisease\n",
                                              "1\t2\ttreats\n1\t3\ttreats\n"),
                            o);
  }();
  return m;
}

}  // namespace

TEST_CASE("golden request bodies") {
  CHECK(wire::score_request({"a", "b"}) == R"({"tokens":["a","b"]})");
  CHECK(wire::embed_request({"x"}) == R"({"tokens":["x"]})");
  CHECK(wire::score_response(-1.5) == R"({"log_prob":-1.5})");
  CHECK(wire::info_response({3, {"score", "fill"}}) == R"({"capabilities":["score","fill"],"embedding_dim":3})");
  const auto t = build_infill_template({"h"}, {"t"}, 2);
  const std::vector<Tokens> c{{"x"}};
  const auto body = wire::fill_request(t, 1, &c, 5);
  CHECK(body.find(R"("candidates":[["x"]])") != std::string::npos);
  CHECK(body.find(R"("k":5)") != std::string::npos);
  CHECK(body.find(R"("mask_position":1)") != std::string::npos);
  CHECK(wire::fill_request(t, 1, nullptr, 5).find(R"("candidates":null)") != std::string::npos);
}

TEST_CASE("remote client reproduces the served backend") {
  testing::ReferenceServer server(lm());
  RemoteBackend remote(server.url() + "/");
  CHECK(remote.base_url() == server.url());
  CHECK(remote.info().embedding_dim == lm().info().embedding_dim);

  const Tokens s{"aspirin", "treats", "fever"};
  CHECK(remote.score(s) == doctest::Approx(lm().score(s)).epsilon(1e-12));
  CHECK(remote.embed(s) == lm().embed(s));

  // Chain rule across two calls.
  const Tokens longer{"aspirin", "treats", "fever", "pain"};
  CHECK(remote.score(longer) ==
        doctest::Approx(remote.score(s) + std::log(lm().probability(s, "pain"))).epsilon(1e-4));

  const auto t = build_infill_template({"aspirin"}, {"pain"}, 2);
  const auto pos = t.position_of(MaskKind::kEdge, 1);
  const std::vector<Tokens> cands{{"treats"}, {"fever"}, {"pain"}};
  const auto remote_fills = remote.fill(t, pos, &cands, 3);
  const auto local_fills = lm().fill(t, pos, &cands, 3);
  REQUIRE(remote_fills.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(remote_fills[i].tokens == local_fills[i].tokens);
    // Ranked by the same numbers /v1/score reports for the substitutions.
    CHECK(remote_fills[i].log_score ==
          doctest::Approx(remote.score(t.left_context_with(pos, remote_fills[i].tokens))).epsilon(1e-9));
  }
  CHECK(remote.fill(t, pos, nullptr, 2).size() == 2);
  CHECK(server.requests().front().rfind("/v1/info", 0) == 0);
}

TEST_CASE("server-side errors and closed ports are transport errors") {
  testing::ReferenceServer server(lm());
  RemoteBackend remote(server.url());
  // Position 0 holds a literal, which the served backend rejects.
  const auto t = build_infill_template({"aspirin"}, {"pain"}, 2);
  const std::vector<Tokens> cands{{"fever"}};
  try {
    remote.fill(t, 0, &cands, 1);
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(std::string(e.what()).find("HTTP 400") != std::string::npos);
  }

  RemoteBackend dead("http://127.0.0.1:" + std::to_string(testing::closed_port()),
                     std::chrono::milliseconds(500));
  CHECK_THROWS_AS(dead.score({"a"}), TransportError);
  CHECK_THROWS_AS(dead.info(), TransportError);
  CHECK_THROWS_AS(RemoteBackend(""), UsageError);
}
