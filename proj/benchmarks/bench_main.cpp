#include <benchmark/benchmark.h>
#include <nlohmann/json.hpp>

#include "clickpath/apm.hpp"
#include "clickpath/dataset.hpp"
#include "clickpath/patterns.hpp"
#include "clickpath/random.hpp"
#include "clickpath/stats.hpp"
#include "clickpath/synthgen.hpp"
#include "clickpath/url2vec.hpp"

using namespace clickpath;

namespace {

const Dataset& dataset() {
    static const Dataset d = [] {
        auto ds = synth::gen_dataset({132, 38, 19}, synth::GenParams::defaults(), 7);
        return assemble_dataset(ingest_events_string(ds.to_jsonl()).sessions, ds.manifest());
    }();
    return d;
}

void BM_Ingest(benchmark::State& state) {
    auto log = synth::gen_dataset({132, 38, 19}, synth::GenParams::defaults(), 7).to_jsonl();
    for (auto _ : state) benchmark::DoNotOptimize(ingest_events_string(log));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * log.size()));
}
BENCHMARK(BM_Ingest)->Unit(benchmark::kMillisecond);

void BM_CellStep(benchmark::State& state) {
    const auto h = static_cast<std::size_t>(state.range(0));
    auto p = apm::ApmParams::random(50, 16, h, 1);
    std::vector<double> u(16, 0.1), prev(h, 0.2);
    for (auto _ : state) benchmark::DoNotOptimize(apm::cell_step(p.encoder, p.mode, u, prev, 3.0));
}
BENCHMARK(BM_CellStep)->Arg(10)->Arg(64);

void BM_LossAndGradientBatch(benchmark::State& state) {
    const auto& d = dataset();
    auto p = apm::ApmParams::random(d.vocab.size(), 16, 10, 1);
    apm::TrainConfig cfg;
    auto ex = apm::make_examples(d.train, cfg);
    ex.resize(32);
    for (auto _ : state) benchmark::DoNotOptimize(apm::loss_and_gradient(p, ex, cfg.l2_lambda));
}
BENCHMARK(BM_LossAndGradientBatch)->Unit(benchmark::kMillisecond);

void BM_Url2VecEpoch(benchmark::State& state) {
    const auto& d = dataset();
    url2vec::Config c;
    c.epochs = 1;
    auto pairs = url2vec::build_pairs(d.train, c.window);
    for (auto _ : state) benchmark::DoNotOptimize(url2vec::train_embeddings(pairs, d.vocab.size(), c));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * pairs.size()));
}
BENCHMARK(BM_Url2VecEpoch)->Unit(benchmark::kMillisecond);

void BM_AnalyzePatterns(benchmark::State& state) {
    const auto& d = dataset();
    std::vector<patterns::ClickGraph> graphs;
    for (const auto& p : d.train) graphs.push_back(patterns::build_graph(p));
    for (auto _ : state)
        for (const auto& g : graphs) benchmark::DoNotOptimize(patterns::analyze(g));
}
BENCHMARK(BM_AnalyzePatterns)->Unit(benchmark::kMillisecond);

void BM_MannWhitneyExact(benchmark::State& state) {
    Rng rng(3);
    std::vector<double> x(6), y(6);
    for (double& v : x) v = rng.uniform();
    for (double& v : y) v = rng.uniform();
    for (auto _ : state)
        benchmark::DoNotOptimize(stats::mann_whitney_exact_p(x, y, stats::Alternative::kGreater));
}
BENCHMARK(BM_MannWhitneyExact);

}  // namespace

BENCHMARK_MAIN();
