// Parallel vs serial Monte Carlo kernels.

#include "psym/simulate.hpp"
#include "psym/symbol.hpp"

#include <benchmark/benchmark.h>

namespace {

const psym::ProcessSpec& jump_diffusion() {
    static const psym::ProcessSpec spec{
        psym::LevyTriplet{0.5, 1.0, {{1.0, psym::JumpSize::uniform(-1.0, 2.0)}}}};
    return spec;
}

const psym::ProcessSpec& cantor_clock() {
    static const psym::ProcessSpec spec{psym::ClockedProcess{
        psym::LevyTriplet{0.0, 1.0, {}}, psym::ClockSpec::deterministic(psym::StaircaseFunction::cantor())}};
    return spec;
}

void BM_quotient_parallel(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(psym::mc_quotient(jump_diffusion(), 0.0, 1.0, 10.0, 0.05, n, 1));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

void BM_quotient_serial(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(psym::mc_quotient_serial(jump_diffusion(), 0.0, 1.0, 10.0, 0.05, n, 1));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

void BM_cantor_clock_parallel(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(psym::mc_quotient(cantor_clock(), 0.0, 1.0, 10.0, 1.0 / 81, n, 1));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

void BM_cantor_clock_serial(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(psym::mc_quotient_serial(cantor_clock(), 0.0, 1.0, 10.0, 1.0 / 81, n, 1));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

void BM_ensemble_parallel(benchmark::State& state) {
    const auto grid = psym::uniform_grid(1.0, 1e-3);
    for (auto _ : state)
        benchmark::DoNotOptimize(psym::simulate_ensemble(jump_diffusion(), 0.0, grid, state.range(0), 2));
}

void BM_ensemble_serial(benchmark::State& state) {
    const auto grid = psym::uniform_grid(1.0, 1e-3);
    for (auto _ : state)
        benchmark::DoNotOptimize(psym::simulate_ensemble_serial(jump_diffusion(), 0.0, grid, state.range(0), 2));
}

}  // namespace

BENCHMARK(BM_quotient_parallel)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_quotient_serial)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_cantor_clock_parallel)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_cantor_clock_serial)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ensemble_parallel)->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ensemble_serial)->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
