#include <benchmark/benchmark.h>

#include "../tests/fixtures.hpp"
#include "ramsey/market.hpp"
#include "ramsey/mc.hpp"
#include "ramsey/mixture.hpp"
#include "ramsey/yield_curve.hpp"

using namespace ramsey;
using namespace ramsey::testing;

namespace {

void bm_riccati_solve(benchmark::State& state) {
    const AffineModelSpec spec = cir_spec();
    const double step = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) {
        auto sol = bond_riccati(spec, 10.0, step);
        benchmark::DoNotOptimize(sol.B.front());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 10);
}
BENCHMARK(bm_riccati_solve)->Arg(100)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void bm_riccati_two_factor(benchmark::State& state) {
    const AffineModelSpec spec = two_factor_spec();
    for (auto _ : state) {
        auto sol = bond_riccati(spec, 10.0, 1e-3);
        benchmark::DoNotOptimize(sol.B.front());
    }
}
BENCHMARK(bm_riccati_two_factor)->Unit(benchmark::kMillisecond);

void bm_state_price_paths(benchmark::State& state) {
    const AffineModelSpec spec = vasicek_market_spec();
    const SimConfig sim{state.range(0), 0.01, 1.0, 7};
    for (auto _ : state) {
        auto est = mc_bond_price(spec, sim, 1.0);
        benchmark::DoNotOptimize(est.mean);
    }
    state.SetItemsProcessed(state.iterations() * sim.n_paths * sim.n_steps());
}
BENCHMARK(bm_state_price_paths)
    ->Arg(1 << 12)
    ->Arg(1 << 15)
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime(); // the kernel is internally threaded

void bm_normal_draws(benchmark::State& state) {
    const CounterRng rng(5);
    std::int64_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rng.normal(i, i + 1, 0));
        ++i;
    }
}
BENCHMARK(bm_normal_draws);

void bm_mixture_curve(benchmark::State& state) {
    MixtureSpec mix = make_mixture_spec(mixture_base_spec(), 16);
    const std::vector<double> tenors{1.0, 5.0, 10.0, 30.0};
    for (auto _ : state) {
        auto curve = mixture_yield_curve(mix, 1.0, tenors, 1e-2);
        benchmark::DoNotOptimize(curve.bond_prices.back());
    }
}
BENCHMARK(bm_mixture_curve)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
