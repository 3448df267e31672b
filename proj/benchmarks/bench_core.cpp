#include <benchmark/benchmark.h>

#include "gelfand/bihari.hpp"
#include "gelfand/galerkin.hpp"
#include "gelfand/zoo.hpp"

namespace {

using namespace gelfand;

void BM_NseEval(benchmark::State& state) {
    const auto op = nse_3d(1.0, static_cast<int>(state.range(0)), Taming{1.0});
    const auto u = initial_condition(*op, {{"profile", "random"}, {"amplitude", 1.0}}, 3);
    std::vector<double> out(op->space().size());
    for (auto _ : state) {
        op->eval(0.0, u.coeffs, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetLabel(std::to_string(op->space().size()) + " coefficients");
}
BENCHMARK(BM_NseEval)->Arg(8)->Arg(12)->Unit(benchmark::kMicrosecond);

void BM_SurfaceGrowthEval(benchmark::State& state) {
    const auto op = surface_growth_1d(static_cast<int>(state.range(0)));
    const auto u = initial_condition(*op, {{"profile", "random"}, {"amplitude", 1.0}}, 3);
    std::vector<double> out(op->space().size());
    for (auto _ : state) {
        op->eval(0.0, u.coeffs, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_SurfaceGrowthEval)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_BihariBoundPower(benchmark::State& state) {
    const auto g = GrowthFunction::power(2.0, 3.0);
    double t = 0.01;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bihari_bound(0.5, 0.3 * t, g));
        t = t < 0.05 ? t + 1e-4 : 0.01;
    }
}
BENCHMARK(BM_BihariBoundPower);

void BM_BihariBoundTable(benchmark::State& state) {
    const auto g = GrowthFunction::tabulate([](double x) { return x + x * x * x; }, 1e-8, 1e8, 161);
    BihariOptions opt;
    opt.mode = static_cast<Evaluation>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(bihari_bound(0.5, 0.015, g, opt));
}
BENCHMARK(BM_BihariBoundTable)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_Horizon(benchmark::State& state) {
    const auto g = GrowthFunction::power(1.0, 2.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(horizon(0.7, [](double t) { return 0.5 * t; }, g, 10.0));
}
BENCHMARK(BM_Horizon)->Unit(benchmark::kMicrosecond);

void BM_HeatSolve(benchmark::State& state) {
    const auto op = heat_plaplace(2.0, 1.0, 32);
    const auto u = initial_condition(*op, {{"profile", "random"}, {"amplitude", 1.0}}, 3);
    SolveConfig cfg;
    cfg.integrator = static_cast<Integrator>(state.range(0));
    cfg.record_every = 1000;
    for (auto _ : state) benchmark::DoNotOptimize(solve(*op, u, cfg).accepted_steps);
}
BENCHMARK(BM_HeatSolve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
