#include <benchmark/benchmark.h>

#include "polyproc/action.hpp"
#include "polyproc/sim_harness.hpp"
#include "polyproc/spectral.hpp"

using namespace polyproc;

namespace {

GeneratorMatrix diffusion(unsigned degree) {
    return polynomial_diffusion_generator(monomial_basis(degree), {0.1, -0.7, 0.5, 0.2, 0.04});
}

void BM_ScalingSquaring(benchmark::State& state) {
    const auto g = diffusion(static_cast<unsigned>(state.range(0)));
    const auto p = PolyVec::unit(g.basis(), g.size() - 1);
    for (auto _ : state) benchmark::DoNotOptimize(act_scaling_squaring(g, p, 1.0));
}
BENCHMARK(BM_ScalingSquaring)->Arg(4)->Arg(16)->Arg(48);

void BM_KrylovSeries(benchmark::State& state) {
    const auto g = diffusion(static_cast<unsigned>(state.range(0)));
    const auto p = PolyVec::unit(g.basis(), g.size() - 1);
    for (auto _ : state) benchmark::DoNotOptimize(act_series(g, p, 0.5));
}
BENCHMARK(BM_KrylovSeries)->Arg(4)->Arg(16)->Arg(48);

void BM_SimulateOU(benchmark::State& state) {
    const auto model = std::make_shared<const ProcessModel>(
        make_polynomial_diffusion("ou", {0.0, -1.0, 1.0, 0.0, 0.0}, 2.0, {-1e9, 1e9}));
    const auto paths = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        const auto ens = simulate(model, 1.0, 1e-3, paths, 1);
        const auto xt = ens.map_paths<double>([](std::size_t, std::span<const double> xs) { return xs.back(); });
        benchmark::DoNotOptimize(xt.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(paths) * 1000);
}
BENCHMARK(BM_SimulateOU)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_DriftIntegral(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(drift_integral(0.5, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_DriftIntegral)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
