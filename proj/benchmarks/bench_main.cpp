#include <benchmark/benchmark.h>

#include "aufuse/counts.hpp"
#include "aufuse/inference.hpp"
#include "aufuse/params.hpp"
#include "aufuse/rng.hpp"
#include "aufuse/simulate.hpp"
#include "aufuse/structure.hpp"

using namespace aufuse;

namespace {

std::vector<EvidenceFrame> demo_evidence(const NetworkSpec& spec, int frames) {
    Rng rng(13);
    std::vector<EvidenceFrame> evidence(static_cast<std::size_t>(frames));
    for (auto& frame : evidence) {
        for (const auto& v : spec.variables) {
            if (is_measurement(v.role)) {
                frame.observations.emplace_back(v.name, rng.uniform_int(v.cardinality));
            }
        }
    }
    return evidence;
}

void BM_FilterDemoSmall(benchmark::State& state) {
    const NetworkSpec spec = builtin_generator("demo-small");  // 96 hidden states
    const DbnEngine engine(spec);
    const auto evidence = demo_evidence(spec, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto beliefs = engine.filter(evidence);
        benchmark::DoNotOptimize(beliefs);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FilterDemoSmall)->Arg(100)->Arg(400);

void BM_FilterSpeechFull(benchmark::State& state) {
    // 3712 hidden states; the dense operator stays under the default cache cap.
    const NetworkSpec spec = builtin_generator("speech-full");
    const DbnEngine engine(spec);
    const auto evidence = demo_evidence(spec, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto beliefs = engine.filter(evidence);
        benchmark::DoNotOptimize(beliefs);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FilterSpeechFull)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_TransitionCacheBuild(benchmark::State& state) {
    const NetworkSpec spec = builtin_generator("demo-small");
    for (auto _ : state) {
        DbnEngine engine(spec);
        benchmark::DoNotOptimize(engine);
    }
}
BENCHMARK(BM_TransitionCacheBuild);

void BM_K2FamilyScore(benchmark::State& state) {
    Rng rng(7);
    DataTable data;
    data.columns = {"C", "P0", "P1"};
    data.cardinalities = {2, 29, 2};
    std::vector<int> row(3);
    for (int r = 0; r < 20000; ++r) {
        for (int c = 0; c < 3; ++c) row[static_cast<std::size_t>(c)] = rng.uniform_int(data.cardinalities[static_cast<std::size_t>(c)]);
        data.append_row(row);
    }
    const std::vector<ParentRef> parents{{"P0", 0}, {"P1", 0}};
    for (auto _ : state) {
        const auto stats = count_stats(data, "C", parents);
        benchmark::DoNotOptimize(k2_family_log_score(stats));
    }
    state.SetItemsProcessed(state.iterations() * 20000);
}
BENCHMARK(BM_K2FamilyScore);

void BM_SampleCorpus(benchmark::State& state) {
    SimConfig config;
    config.generator = builtin_generator("demo-small");
    config.alphabet = builtin_alphabet("demo-small");
    config.subjects = 4;
    config.sequences_per_subject = 25;
    config.frames_min = config.frames_max = 100;
    config.seed = 99;
    config.noise = NoiseModel::preset("clean-like", 4);
    for (auto _ : state) {
        auto corpus = sample_corpus(config);
        benchmark::DoNotOptimize(corpus);
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_SampleCorpus);

} // namespace

BENCHMARK_MAIN();
