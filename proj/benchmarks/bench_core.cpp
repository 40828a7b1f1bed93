#include "locfield/dynamics.hpp"
#include "locfield/medium.hpp"
#include "locfield/verify.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

using namespace locfield;
using namespace locfield::dynamics;

namespace {

const medium::HostSpecies reference_host{10.0, 10.0, 4.0};

EmitterParams driven() {
    EmitterParams e;
    e.detuning = 0.3;
    e.ndd_strength = 0.8;
    e.drive = {DriveKind::pulse, {2.0, 0.0}, 0.5, 3.0};
    return e;
}

SystemState ground() { return SystemState{}; }

} // namespace

static void BM_LocalFieldFactor(benchmark::State& state) {
    medium::HostSpecies h = reference_host;
    for (auto _ : state) {
        h.detuning += 1e-9;
        benchmark::DoNotOptimize(medium::local_field_factor(h));
    }
}
BENCHMARK(BM_LocalFieldFactor);

static void BM_EffectiveRhs(benchmark::State& state) {
    const auto p = EffectiveParams::from(driven(), reference_host);
    SystemState st;
    st.s = {0.1, 0.2};
    st.w = 0.3;
    for (auto _ : state) benchmark::DoNotOptimize(effective_rhs(st, p, 1.0));
}
BENCHMARK(BM_EffectiveRhs);

static void BM_MicroscopicRhs(benchmark::State& state) {
    const auto p = MicroscopicParams::from(driven(), reference_host);
    SystemState st;
    st.s = {0.1, 0.2};
    st.w = 0.3;
    st.beta = complex{0.01, -0.02};
    for (auto _ : state) benchmark::DoNotOptimize(microscopic_rhs(st, p, 1.0));
}
BENCHMARK(BM_MicroscopicRhs);

static void BM_SlowEigenvalue(benchmark::State& state) {
    const auto p = MicroscopicParams::from(driven(), reference_host);
    for (auto _ : state) benchmark::DoNotOptimize(verify::slow_eigenvalue(p));
}
BENCHMARK(BM_SlowEigenvalue);

// range(0): -log10(tol)
static void BM_IntegrateEffective(benchmark::State& state) {
    const auto p = EffectiveParams::from(driven(), reference_host);
    const auto grid = uniform_grid(0.0, 20.0, 401);
    const double tol = std::pow(10.0, -static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(integrate(p, ground(), grid, {.tol = tol}));
}
BENCHMARK(BM_IntegrateEffective)->Arg(8)->Arg(10)->Arg(12);

// range(0): κ, the host pole scale; cost grows with the host stiffness
static void BM_IntegrateMicroscopic(benchmark::State& state) {
    const auto base = MicroscopicParams::from(driven(), reference_host);
    const auto p = verify::scale_host(base, static_cast<double>(state.range(0)));
    const auto grid = uniform_grid(0.0, 20.0, 401);
    for (auto _ : state) benchmark::DoNotOptimize(integrate(p, ground(), grid, {.tol = 1e-10}));
}
BENCHMARK(BM_IntegrateMicroscopic)->Arg(1)->Arg(4)->Arg(16);

static void BM_Dopri5VsDop853(benchmark::State& state) {
    const auto p = MicroscopicParams::from(driven(), reference_host);
    const auto grid = uniform_grid(0.0, 20.0, 401);
    const auto method = state.range(0) == 0 ? ode::Method::dopri5 : ode::Method::dop853;
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrate(p, ground(), grid, {.tol = 1e-10, .method = method}));
    }
    state.SetLabel(state.range(0) == 0 ? "dopri5" : "dop853");
}
BENCHMARK(BM_Dopri5VsDop853)->Arg(0)->Arg(1);

static void BM_ConvergenceStudy(benchmark::State& state) {
    const auto base = MicroscopicParams::from(EmitterParams{}, reference_host);
    const std::vector<double> kappas{1.0, 2.0, 4.0, 8.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(verify::convergence_study(base, kappas, {.parallel = state.range(0) != 0}));
    }
}
BENCHMARK(BM_ConvergenceStudy)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
