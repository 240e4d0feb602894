#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "elig/decider.hpp"
#include "elig/evaluation.hpp"
#include "elig/evidence.hpp"
#include "elig/sequence_decoder.hpp"
#include "elig/serialization.hpp"

using namespace elig;

namespace {

const std::vector<Document>& corpus() {
    static const auto docs = read_corpus_file(std::string(ELIG_TEST_DATA_DIR) + "/fixtures.jsonl");
    return docs;
}

LabelGrid random_grid(std::size_t m) {
    std::mt19937_64 gen(m);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    LabelGrid g;
    g.scores.resize(m);
    for (auto& row : g.scores) {
        double z = 0.0;
        for (auto& x : row) z += std::exp(x = u(gen));
        for (auto& x : row) x -= std::log(z);
    }
    return g;
}

void BM_Viterbi(benchmark::State& state) {
    const auto g = random_grid(static_cast<std::size_t>(state.range(0)));
    const auto trans = default_bio_transitions();
    for (auto _ : state) benchmark::DoNotOptimize(constrained_viterbi(g, trans));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Viterbi)->Arg(64)->Arg(512)->Arg(4096);

void BM_Tokenize(benchmark::State& state) {
    std::size_t bytes = 0;
    for (auto _ : state)
        for (const auto& d : corpus()) {
            benchmark::DoNotOptimize(baseline_tokenize(d.text));
            bytes += d.text.size();
        }
    state.SetBytesProcessed(static_cast<int64_t>(bytes));
}
BENCHMARK(BM_Tokenize);

void BM_Iou(benchmark::State& state) {
    std::vector<Interval> a, b;
    for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(0)); ++i) {
        a.push_back({10 * i, 10 * i + 6});
        b.push_back({10 * i + 3, 10 * i + 9});
    }
    for (auto _ : state) benchmark::DoNotOptimize(iou(a, b));
}
BENCHMARK(BM_Iou)->Arg(1)->Arg(16)->Arg(256);

void BM_BaselineDetect(benchmark::State& state) {
    const BaselineBackend backend;
    for (auto _ : state)
        for (const auto& d : corpus()) benchmark::DoNotOptimize(backend.detect(d));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(corpus().size()));
}
BENCHMARK(BM_BaselineDetect);

void BM_Decide(benchmark::State& state) {
    const auto cfg = default_decider_config();
    for (auto _ : state)
        for (const auto& d : corpus()) benchmark::DoNotOptimize(decide_document(d, cfg));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(corpus().size()));
}
BENCHMARK(BM_Decide);

}  // namespace
BENCHMARK_MAIN();
