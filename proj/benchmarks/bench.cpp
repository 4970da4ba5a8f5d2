#include <benchmark/benchmark.h>

#include "metafill/builtin_lm.hpp"
#include "metafill/embedder.hpp"
#include "metafill/errors.hpp"
#include "metafill/induction.hpp"
#include "metafill/path_sampler.hpp"
#include "metafill/random.hpp"
#include "metafill/skipgram.hpp"
#include "metafill/verbalizer.hpp"

using namespace metafill;

namespace {

const Hin& graph() {
  static const Hin g = load_hin_files(std::filesystem::path(METAFILL_DATA_DIR) / "lp_fixture/nodes.tsv",
                                      std::filesystem::path(METAFILL_DATA_DIR) / "lp_fixture/edges.tsv");
  return g;
}

const BuiltinLm& lm() {
  static const BuiltinLm m = [] {
    BuiltinLmOptions o;
    o.dim = 16;
    o.epochs = 1;
    return BuiltinLm::train(graph(), o);
  }();
  return m;
}

RankedMetaPaths author_topic() {
  const Hin& g = graph();
  RankedMetaPaths r;
  r.q = 1;
  r.entries.push_back({MetaPath{{*g.find_type("author"), *g.find_type("topic")}, {*g.find_edge_type("studies")}},
                       1, false, {}});
  return r;
}

void BM_LmScore(benchmark::State& state) {
  const auto sentences = edge_sentences(graph(), graph().edges()[0]);
  lm();  // train outside the timed loop
  for (auto _ : state)
    for (const auto& s : sentences) benchmark::DoNotOptimize(lm().score(s));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sentences.size()));
}
BENCHMARK(BM_LmScore);

void BM_LmFillAllNames(benchmark::State& state) {
  const auto t = build_infill_template(graph().node(0).name, graph().node(1).name, 2);
  const auto pos = t.position_of(MaskKind::kNode, 1);
  for (auto _ : state) benchmark::DoNotOptimize(lm().fill(t, pos, nullptr, 10));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(graph().distinct_names().size()));
}
BENCHMARK(BM_LmFillAllNames);

void BM_SamplePath(benchmark::State& state) {
  SamplerConfig c;
  Rng rng(1);
  const auto& e = graph().edges()[0];
  const int hops = static_cast<int>(state.range(0));
  for (auto _ : state) {
    try {
      benchmark::DoNotOptimize(sample_path(graph(), lm(), nullptr, e.src, e.dst, hops, c, rng));
    } catch (const SamplingDeadEnd&) {
    }
  }
}
BENCHMARK(BM_SamplePath)->Arg(2)->Arg(3)->Arg(4);

void BM_MetapathWalks(benchmark::State& state) {
  const auto mps = author_topic();
  WalkOptions o;
  o.walk_length = 8;
  o.walks_per_node = 10;
  o.workers = static_cast<std::size_t>(state.range(0));
  std::size_t walks = 0;
  for (auto _ : state) {
    auto w = metapath_walks(graph(), mps, o);
    walks += w.size();
    benchmark::DoNotOptimize(w);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(walks));
}
BENCHMARK(BM_MetapathWalks)->Arg(1)->Arg(4)->UseRealTime();

void BM_SkipGramEpoch(benchmark::State& state) {
  std::vector<std::vector<std::size_t>> seqs;
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::size_t> s;
    for (int k = 0; k < 9; ++k) s.push_back(uniform_index(rng, 500));
    seqs.push_back(s);
  }
  SkipGramOptions o;
  o.dim = 64;
  o.epochs = 1;
  o.workers = static_cast<std::size_t>(state.range(0));
  o.deterministic = state.range(0) == 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_sgns(seqs, 500, o));
}
BENCHMARK(BM_SkipGramEpoch)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
