#include <benchmark/benchmark.h>

#include <vector>

#include "rmprod/bounds.hpp"
#include "rmprod/montecarlo.hpp"
#include "rmprod/spectra.hpp"

using namespace rmprod;

namespace {

std::vector<SquareMatrix> gaussian_factors(int k, int n, std::uint64_t stream) {
    const auto m = MatrixMeasure::iid(EntryMeasure::gaussian(), k);
    CounterStream rng(1, stream);
    std::vector<SquareMatrix> out;
    for (int i = 0; i < n; ++i) out.push_back(sample_matrix(m, rng));
    return out;
}

void BM_ProductRescaled(benchmark::State& state) {
    const auto factors = gaussian_factors(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 0);
    for (auto _ : state) benchmark::DoNotOptimize(product_rescaled(factors));
    state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_ProductRescaled)->Args({2, 64})->Args({3, 64})->Args({8, 64});

void BM_ClassifyFloat(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    std::vector<ScaledMatrix> mats;
    for (std::uint64_t t = 0; t < 256; ++t) mats.push_back(product_rescaled(gaussian_factors(k, 4, t)));
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(classify_spectrum_float(mats[i++ % mats.size()]));
}
BENCHMARK(BM_ClassifyFloat)->DenseRange(2, 8, 3);

void BM_ClassifyExact(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    std::vector<ExactMatrix> mats;
    for (std::uint64_t t = 0; t < 64; ++t) {
        const auto f = gaussian_factors(k, 1, t);
        mats.push_back(to_exact_dyadic(f[0]));
    }
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(classify_spectrum_exact(mats[i++ % mats.size()]));
}
BENCHMARK(BM_ClassifyExact)->DenseRange(2, 8, 3);

void BM_RunTrials(benchmark::State& state) {
    TrialConfig cfg;
    cfg.k = static_cast<int>(state.range(0));
    cfg.n = static_cast<int>(state.range(1));
    cfg.measure = MatrixMeasure::iid(EntryMeasure::gaussian(), cfg.k);
    cfg.trials = 2000;
    cfg.seed = 3;
    cfg.workers = 1;
    for (auto _ : state) benchmark::DoNotOptimize(run_trials(cfg));
    state.SetItemsProcessed(state.iterations() * cfg.trials);
}
BENCHMARK(BM_RunTrials)->Args({2, 16})->Args({3, 64})->Unit(benchmark::kMillisecond);

void BM_ExactOracleAggregated(benchmark::State& state) {
    const auto m = MatrixMeasure::iid(EntryMeasure::rademacher(), 2);
    for (auto _ : state) benchmark::DoNotOptimize(exact_real_probability_aggregated(m, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ExactOracleAggregated)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
