#include <benchmark/benchmark.h>

#include <array>
#include <cmath>

#include "wickshe/basis.hpp"
#include "wickshe/chaos.hpp"
#include "wickshe/feynman_kac.hpp"
#include "wickshe/propagator.hpp"
#include "wickshe/rng.hpp"

using namespace wickshe;

static void BM_HermiteFunctions(benchmark::State& state) {
    std::vector<double> out(static_cast<std::size_t>(state.range(0)));
    double x = -3.0;
    for (auto _ : state) {
        hermite_functions(x, out);
        benchmark::DoNotOptimize(out.data());
        x = x > 3.0 ? -3.0 : x + 1e-3;
    }
}
BENCHMARK(BM_HermiteFunctions)->Arg(6)->Arg(32);

static void BM_Enumerate(benchmark::State& state) {
    const TruncationSpec spec{static_cast<int>(state.range(0)), 6};
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_multiindices(spec));
}
BENCHMARK(BM_Enumerate)->Arg(4)->Arg(8);

static void BM_Philox(benchmark::State& state) {
    PhiloxEngine engine(stream_key(1, "bench"), 0);
    for (auto _ : state) benchmark::DoNotOptimize(engine());
}
BENCHMARK(BM_Philox);

static void BM_CsCoefficients(benchmark::State& state) {
    const TruncationSpec spec{static_cast<int>(state.range(0)), 6};
    const auto u0 = InitialCondition::sine();
    for (auto _ : state) benchmark::DoNotOptimize(cs_coefficients(spec, 1.0, 0.3, u0));
}
BENCHMARK(BM_CsCoefficients)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_Propagator(benchmark::State& state) {
    const TruncationSpec spec{static_cast<int>(state.range(0)), 6};
    const auto u0 = InitialCondition::constant();
    const PropagatorGrid grid{0.01, 0.1, 10.0, false};
    const std::array<double, 1> times{1.0};
    for (auto _ : state) benchmark::DoNotOptimize(propagator_oracle(spec, u0, grid, times));
}
BENCHMARK(BM_Propagator)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_PathAndLocalTime(benchmark::State& state) {
    PhiloxEngine engine(stream_key(3, "paths"), 0);
    const double dt = 1e-3;
    const auto grid = LevelGrid::centered(0.0, 8.0, 2.0 * std::sqrt(dt));
    for (auto _ : state) {
        const auto path = simulate_path(1.0, dt, 0.0, engine);
        benchmark::DoNotOptimize(local_time(path, grid));
    }
}
BENCHMARK(BM_PathAndLocalTime)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
