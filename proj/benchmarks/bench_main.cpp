#include <benchmark/benchmark.h>

#include "frac/stability.hpp"

namespace {

using namespace frac;

expr::Expr tx(const char* s) { return expr::parse(s, expr::kTimeVars); }

void BM_BuildPlan(benchmark::State& state) {
    const GridPtr g = PsiGrid::from_expr(tx("t + 0.5*t^2"), 1.0, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(QuadraturePlan::build(0.5, g));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildPlan)->RangeMultiplier(2)->Range(256, 4096)->Complexity(benchmark::oNSquared);

void BM_FracIntegral(benchmark::State& state) {
    const GridPtr g = PsiGrid::from_expr(tx("t"), 1.0, static_cast<std::size_t>(state.range(0)));
    const QuadraturePlan plan = QuadraturePlan::build(0.5, g);
    const GridFunction f = GridFunction::sample(g, tx("exp(t)*sin(3*t)"));
    for (auto _ : state) benchmark::DoNotOptimize(frac_integral(plan, f));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FracIntegral)->RangeMultiplier(2)->Range(256, 4096)->Complexity(benchmark::oNSquared);

void BM_PicardStepWithKernel(benchmark::State& state) {
    ProblemSpec spec;
    spec.order = FractionalOrder(0.6, 0.5);
    spec.n = static_cast<std::size_t>(state.range(0));
    spec.f = expr::parse("-0.2*u + sin(t)", expr::kSourceVars);
    spec.k = expr::parse("0.1*exp(-s)*sin(u)", expr::kKernelVars);
    spec.sigma = 0.5;
    const QuadraturePlan plan = QuadraturePlan::build(0.6, spec.make_grid());
    const GridFunction v = GridFunction::sample(plan.grid(), tx("cos(t)"));
    for (auto _ : state) benchmark::DoNotOptimize(picard_step(spec, plan, v));
}
BENCHMARK(BM_PicardStepWithKernel)->Arg(257)->Arg(1025);

void BM_SolveMittagLeffler(benchmark::State& state) {
    ProblemSpec spec;
    spec.n = static_cast<std::size_t>(state.range(0));
    spec.f = expr::parse("-u", expr::kSourceVars);
    spec.sigma = 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(solve(spec));
}
BENCHMARK(BM_SolveMittagLeffler)->Arg(513)->Arg(2049)->Unit(benchmark::kMillisecond);

void BM_EvaluateCompiled(benchmark::State& state) {
    const expr::CompiledExpr k(expr::parse("0.05*cos(t - s)*u + sqrt(1 + t*s)", expr::kKernelVars));
    double t = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(k(t, 0.5, 1.25));
        t += 1e-6;
    }
}
BENCHMARK(BM_EvaluateCompiled);

}  // namespace

BENCHMARK_MAIN();
