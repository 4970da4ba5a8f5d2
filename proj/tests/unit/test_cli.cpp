#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "metafill/builtin_lm.hpp"
#include "metafill/errors.hpp"
#include "metafill/remote_backend.hpp"
#include "metafill_cli/config.hpp"
#include "metafill_cli/dispatch.hpp"
#include "reference_server.hpp"
#include "test_support.hpp"

using namespace metafill;
using namespace metafill::cli;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = dispatch(args, out, err);
  return {status, out.str(), err.str()};
}

std::string fixture_config() { return (testing::data_dir() / "fixture" / "pipeline.toml").string(); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parsing") {
  Config c;
  CHECK(c.get_int("induce.q") == 8);
  c.merge_text("run.deterministic = false\n# comment\n[sampler]\nmax_hops = 3 # trailing\ntemperature = 0.5\n[lp]\ntarget = \"a \\\"b\\\"\"\n",
               "inline");
  CHECK(c.get_int("sampler.max_hops") == 3);
  CHECK(c.get_real("sampler.temperature") == 0.5);
  CHECK(c.get_string("lp.target") == "a \"b\"");
  CHECK_FALSE(c.get_bool("run.deterministic"));
  c.set("embed.dim=7");
  CHECK(c.get_size("embed.dim") == 7);
  c.set("lp.target=");
  CHECK(c.get_string("lp.target").empty());
  CHECK_THROWS_AS(c.set("embed.dim="), UsageError);
  c.set("zero_shot.relation=treated by");
  CHECK(c.get_string("zero_shot.relation") == "treated by");
}

TEST_CASE("config errors") {
  Config c;
  CHECK_THROWS_AS(c.set("nope.key=1"), UsageError);
  CHECK_THROWS_AS(c.set("embed.dim=abc"), UsageError);
  CHECK_THROWS_AS(c.set("run.deterministic=maybe"), UsageError);
  CHECK_THROWS_AS(c.set("missing_equals"), UsageError);
  CHECK_THROWS_AS(c.merge_text("[sampler\n", "x"), UsageError);
  CHECK_THROWS_AS(c.merge_text("lp.target = \"open\n", "x"), UsageError);
  c.set("embed.dim=-1");
  CHECK_THROWS_AS(c.get_size("embed.dim"), UsageError);
  CHECK_THROWS_AS(Config::load("/nonexistent/config.toml"), DataError);
}

TEST_CASE("config hash tracks every field") {
  const Config base;
  CHECK(base.hash().size() == 64);
  CHECK(Config().hash() == base.hash());
  for (const auto& spec : config_schema()) {
    Config changed;
    std::string value = spec.kind == ValueKind::kBool ? (spec.default_value == "true" ? "false" : "true")
                        : spec.kind == ValueKind::kString ? spec.default_value + "x"
                                                          : "12345";
    changed.set_value(spec.key, value);
    CHECK_MESSAGE(changed.hash() != base.hash(), spec.key);
    changed.set_value(spec.key, spec.default_value);
    CHECK(changed.hash() == base.hash());
  }
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("relative data paths resolve against the config file") {
  const auto c = Config::load(fixture_config());
  CHECK(std::filesystem::path(c.get_string("data.nodes")).is_absolute());
  CHECK(std::filesystem::exists(c.get_string("data.nodes")));
}

TEST_CASE("unknown subcommand is a usage error") {
  const auto r = run({"frobnicate"});
  CHECK(r.status == kExitUsage);
  CHECK(r.err.find("ERROR 1:") != std::string::npos);
  CHECK((r.out + r.err).find("Usage") != std::string::npos);
  CHECK(run({}).status == kExitUsage);
  CHECK(run({"--help"}).status == kExitOk);
}

TEST_CASE("missing embeddings name the path") {
  const auto dir = testing::fresh_dir("cli_missing");
  const auto r = run({"eval-lp", "--config", fixture_config(), "-o", dir.string()});
  CHECK(r.status == kExitData);
  CHECK(r.err.rfind("ERROR 2:", 0) == 0);
  CHECK(r.err.find("embeddings.tsv") != std::string::npos);
}

TEST_CASE("unreachable scorer is a transport error") {
  ::unsetenv(kScorerUrlEnv);
  const auto dir = testing::fresh_dir("cli_remote");
  const std::string url = "http://127.0.0.1:" + std::to_string(testing::closed_port());
  const auto r = run({"train-classifier", "--config", fixture_config(), "-o", dir.string(), "--set",
                      "backend.kind=remote", "--set", "backend.url=" + url, "--set", "backend.timeout=1"});
  CHECK(r.status == kExitTransport);
  CHECK(r.err.rfind("ERROR 3:", 0) == 0);
}

TEST_CASE("pipeline smoke run and manifests") {
  const auto dir = testing::fresh_dir("cli_pipeline");
  const auto r = run({"pipeline", "--config", fixture_config(), "-o", dir.string()});
  REQUIRE_MESSAGE(r.status == kExitOk, r.err);
  for (const char* f : {"lm.json", "classifier.bin", "paths.jsonl", "metapaths.json", "embeddings.tsv",
                        "lp_report.json", "nc_report.json", "embed.manifest.json"})
    CHECK_MESSAGE(std::filesystem::exists(dir / f), f);
  const auto manifest = slurp(dir / "embed.manifest.json");
  CHECK(manifest.find("\"config_hash\"") != std::string::npos);
  CHECK(manifest.find(sha256_file(dir / "embeddings.tsv")) != std::string::npos);
}

TEST_CASE("repeated runs are byte-identical") {
  const auto a = testing::fresh_dir("cli_det_a"), b = testing::fresh_dir("cli_det_b");
  for (const auto& dir : {a, b}) {
    const auto r = run({"pipeline", "--config", fixture_config(), "-o", dir.string(), "--workers", "3"});
    REQUIRE_MESSAGE(r.status == kExitOk, r.err);
  }
  for (const char* f : {"lm.json", "classifier.bin", "paths.jsonl", "metapaths.json", "embeddings.tsv"})
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
}

TEST_CASE("pipeline through a remote scorer") {
  const auto dir = testing::fresh_dir("cli_served");
  REQUIRE(run({"train-lm", "--config", fixture_config(), "-o", dir.string()}).status == kExitOk);
  const auto lm = BuiltinLm::load(dir / "lm.json");
  testing::ReferenceServer server(lm);
  ::setenv(kScorerUrlEnv, server.url().c_str(), 1);
  const auto r = run({"train-classifier", "--config", fixture_config(), "-o", dir.string(), "--set",
                      "backend.kind=remote", "--set", "backend.url=http://unused.invalid"});
  ::unsetenv(kScorerUrlEnv);
  CHECK_MESSAGE(r.status == kExitOk, r.err);
  CHECK(std::filesystem::exists(dir / "classifier.bin"));
  CHECK_FALSE(server.requests().empty());
}
