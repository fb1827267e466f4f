#include <benchmark/benchmark.h>

#include <cmath>

#include "contactline/blowup_fit.hpp"
#include "contactline/diagnostics.hpp"
#include "contactline/pde_stepper.hpp"
#include "contactline/selfsimilar.hpp"

namespace cl = contactline;

static void BM_ImexStep(benchmark::State& state) {
    const cl::Grid grid(40.0, static_cast<std::size_t>(state.range(0)));
    const cl::ImexAffineStepper stepper(grid, 1e-4, cl::ThirdBoundaryCondition{});
    const cl::Field h = cl::initial_profile(-1.0, 0.5, grid);
    for (auto _ : state) benchmark::DoNotOptimize(stepper.step(h));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ImexStep)->RangeMultiplier(2)->Range(1001, 8001)->Complexity(benchmark::oN);

static void BM_SecantStep(benchmark::State& state) {
    const cl::Grid grid(40.0, 4001);
    const cl::ImplicitSecantStepper stepper(grid, 1e-4, cl::ThirdBoundaryCondition{});
    const cl::Field h = cl::initial_profile(-1.0, 0.5, grid);
    for (auto _ : state) benchmark::DoNotOptimize(stepper.step(h, 20.0));
}
BENCHMARK(BM_SecantStep);

static void BM_Measure(benchmark::State& state) {
    const cl::Grid grid(40.0, 4001);
    const cl::Field h = cl::initial_profile(-1.0, 0.5, grid);
    for (auto _ : state) benchmark::DoNotOptimize(cl::measure(h, -8.0));
}
BENCHMARK(BM_Measure);

static void BM_IntegrateOde(benchmark::State& state) {
    const auto method = state.range(0) == 0 ? cl::OdeMethod::heun : cl::OdeMethod::rk4;
    for (auto _ : state) benchmark::DoNotOptimize(cl::integrate_ode(20.0, -15.0, 1e-3, method));
}
BENCHMARK(BM_IntegrateOde)->Arg(0)->Arg(1);

static void BM_FitLog(benchmark::State& state) {
    cl::Trace trace;
    for (int i = 0; i < 500; ++i) {
        cl::TraceRecord r;
        r.t = 0.5 + 0.49 * i / 499.0;
        r.V = 2.0 * std::log(1.0 - r.t) + 1.0;
        r.beta = 1.0 / r.V;
        trace.records.push_back(r);
    }
    for (auto _ : state) benchmark::DoNotOptimize(cl::fit_log(trace, cl::Window{0, trace.size()}));
}
BENCHMARK(BM_FitLog);

BENCHMARK_MAIN();
