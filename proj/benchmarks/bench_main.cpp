#include <benchmark/benchmark.h>

#include <vector>

#include "mfgabs/mfg.hpp"
#include "mfgabs/particle.hpp"
#include "mfgabs/pde.hpp"
#include "mfgabs/reference_models.hpp"
#include "mfgabs/rng.hpp"

using namespace mfgabs;

static void BM_PhiloxNormal(benchmark::State& state)
{
    const StreamRng rng(1);
    std::uint64_t step = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(rng.normal(7, step++, StreamTag::increment));
}
BENCHMARK(BM_PhiloxNormal);

static void BM_EulerStep(benchmark::State& state)
{
    const ModelSpec model(weakly_coupled_benchmark());
    const FeedbackPolicy policy = FeedbackPolicy::constant(default_grid(model, 100, 100), model.actions(), 0.2);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    ParticleEnsemble e = ParticleEnsemble::start(std::vector<double>(n, 1.5));
    const std::vector<double> noise(n, 0.0);
    for (auto _ : state) {
        euler_step(e, model, PolicyProfile(policy), 0.0, 0.0, 0.0, 1e-4, noise);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_EulerStep)->Arg(1000)->Arg(100000);

static void BM_SolveHjb(benchmark::State& state)
{
    const ModelSpec model(weakly_coupled_benchmark());
    const Grid grid = default_grid(model, static_cast<std::size_t>(state.range(0)), 200);
    const SubProbFlow flow = uncontrolled_flow(model, grid);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_hjb(model, flow, grid));
}
BENCHMARK(BM_SolveHjb)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_SolveKilledFp(benchmark::State& state)
{
    const ModelSpec model(weakly_coupled_benchmark());
    const Grid grid = default_grid(model, static_cast<std::size_t>(state.range(0)), 200);
    const FeedbackPolicy policy = FeedbackPolicy::constant(grid, model.actions(), 0.2);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_killed_fp(model, policy, grid));
}
BENCHMARK(BM_SolveKilledFp)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
