#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include "frac/solver.hpp"
#include "oracles.hpp"

using namespace frac;

namespace {

expr::Expr src(std::string_view s) { return expr::parse(s, expr::kSourceVars); }
expr::Expr ker(std::string_view s) { return expr::parse(s, expr::kKernelVars); }
expr::Expr tx(std::string_view s) { return expr::parse(s, expr::kTimeVars); }

ProblemSpec mittag_leffler(double lambda, std::size_t n) {
    ProblemSpec spec;
    spec.order = FractionalOrder(0.5, 1.0);
    spec.n = n;
    spec.f = expr::Expr::binary(expr::BinaryOp::mul, expr::Expr::number(lambda), expr::Expr::variable(expr::Var::u));
    spec.sigma = 1.0;
    spec.L_f = std::fabs(lambda);
    return spec;
}

ProblemSpec hu_linear() {
    ProblemSpec spec;
    spec.order = FractionalOrder(0.5, 1.0);
    spec.n = 257;
    spec.f = src("-u/2");
    spec.sigma = 1.0;
    spec.L_f = 0.5;
    spec.epsilon = 0.01;
    return spec;
}

ProblemSpec with_memory() {
    ProblemSpec spec;
    spec.order = FractionalOrder(0.6, 0.5);
    spec.n = 257;
    spec.psi = tx("t + 0.5*t^2");
    spec.f = src("-0.2*u + sin(t)");
    spec.k = ker("0.1*exp(-s)*sin(u)");
    spec.sigma = 0.5;
    spec.L_f = 0.2;
    spec.L_k = 0.1;
    return spec;
}

std::uint64_t bits(double x) { return std::bit_cast<std::uint64_t>(x); }

}  // namespace

TEST(PicardStep, CollapsesToTheConstantTerm) {
    ProblemSpec spec;
    spec.f = src("0");
    spec.k = ker("0");
    spec.sigma = 2.5;
    spec.n = 65;
    const GridPtr g = spec.make_grid();
    const QuadraturePlan plan = QuadraturePlan::build(0.5, g);
    for (const char* v : {"0", "sin(40*t)", "1e6*t"}) {
        const GridFunction out = picard_step(spec, plan, GridFunction::sample(g, tx(v)));
        for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], 2.5);
    }
}

TEST(PicardStep, IteratesAreMittagLefflerPartialSums) {
    // f = u, sigma = 1: Omega^m applied to 0 is sum_{j<m} t^{j alpha}/Gamma(j alpha + 1).
    const ProblemSpec spec = mittag_leffler(1.0, 1025);
    const GridPtr g = spec.make_grid();
    const QuadraturePlan plan = QuadraturePlan::build(0.5, g);
    GridFunction v = GridFunction::constant(g, 0.0);
    for (std::size_t m = 1; m <= 8; ++m) {
        v = picard_step(spec, plan, v);
        double err = 0.0;
        for (std::size_t i = 0; i < g->size(); ++i) {
            const long double z = std::sqrt(static_cast<long double>(g->node(i)));
            err = std::max(err, std::fabs(v[i] - static_cast<double>(oracle::mittag_leffler(0.5L, z, m))));
        }
        EXPECT_LT(err, 2e-4) << "m=" << m;
    }
    // The limit agrees with the 200-term series E_{1/2}(1) = e erfc(-1).
    const SolveReport rep = solve(spec, plan, {});
    EXPECT_TRUE(rep.converged);
    EXPECT_NEAR(rep.solution[1024], static_cast<double>(oracle::mittag_leffler(0.5L, 1.0L)), 1e-3);
}

TEST(PicardStep, ZeroKernelEqualsNoKernelBitwise) {
    ProblemSpec a = with_memory();
    a.k.reset();
    ProblemSpec b = a;
    b.k = ker("0");
    const GridPtr g = a.make_grid();
    const QuadraturePlan plan = QuadraturePlan::build(a.order.alpha(), g);
    const GridFunction v = GridFunction::sample(g, tx("cos(3*t)"));
    const GridFunction ra = picard_step(a, plan, v);
    const GridFunction rb = picard_step(b, plan, v);
    for (std::size_t i = 0; i < g->size(); ++i) EXPECT_EQ(bits(ra[i]), bits(rb[i]));
}

TEST(PicardStep, PrefactorSingularity) {
    const ProblemSpec spec = with_memory();  // gamma = 0.8
    const GridPtr g = spec.make_grid();
    EXPECT_THROW(prefactor_at(spec.order, spec.sigma, *g, 0), SingularPrefactor);
    const double p1 = prefactor_at(spec.order, spec.sigma, *g, 1);
    EXPECT_NEAR(p1, std::pow(g->psi()[1] - g->psi()[0], -0.2) * 0.5 / std::tgamma(0.8), 1e-12);
    EXPECT_EQ(prefactor_at(FractionalOrder(0.5, 1.0), 3.0, *g, 0), 3.0);
}

TEST(Solve, ZeroProblem) {
    ProblemSpec spec;
    spec.f = src("0");
    spec.k = ker("0");
    spec.n = 65;
    const SolveReport rep = solve(spec);
    EXPECT_TRUE(rep.converged);
    EXPECT_EQ(rep.iterations, 1u);
    EXPECT_EQ(rep.solution.sup_norm(), 0.0);
}

TEST(Solve, MittagLefflerDecay) {
    const SolveReport rep = solve(mittag_leffler(-1.0, 2049));
    EXPECT_TRUE(rep.converged);
    const double oracle = static_cast<double>(oracle::mittag_leffler(0.5L, -1.0L));
    EXPECT_NEAR(oracle, 0.42758357615580700441, 1e-15);
    EXPECT_NEAR(rep.solution[2048], oracle, 1e-3);
}

// psi(t) = 2t against the textbook classical rule: I^{alpha; 2t} = 2^alpha I^alpha,
// and with u-independent data one Picard step is the whole solution.
TEST(Solve, ClassicalReductionWithScaledPsi) {
    ProblemSpec spec;
    spec.order = FractionalOrder(0.4, 1.0);
    spec.n = 257;
    spec.psi = tx("2*t");
    spec.f = src("0.7");
    spec.k = ker("-0.3");
    spec.sigma = 1.5;
    const SolveReport rep = solve(spec);
    ASSERT_TRUE(rep.converged);

    std::vector<long double> g(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) g[i] = 0.7L - 0.3L * (static_cast<long double>(i) / 256.0L);
    const auto ref = oracle::textbook_rl(0.4L, 1.0L / 256.0L, g);
    for (std::size_t i = 0; i < spec.n; ++i)
        EXPECT_NEAR(rep.solution[i], static_cast<double>(1.5L + std::pow(2.0L, 0.4L) * ref[i]), 1e-12);
}

TEST(Solve, GeometricDecayOnContractiveProblems) {
    for (const ProblemSpec& spec : {hu_linear(), with_memory()}) {
        const ContractionReport cr = contraction_check(spec);
        ASSERT_TRUE(cr.satisfied);
        const SolveReport rep = solve(spec);
        ASSERT_TRUE(rep.converged);
        for (std::size_t m = 1; m + 1 < rep.residual_trace.size(); ++m)
            EXPECT_LE(rep.residual_trace[m + 1], (cr.q + 0.05) * rep.residual_trace[m]) << "m=" << m;
        EXPECT_LE(rep.contraction_estimate, cr.q + 0.05);
    }
}

TEST(Solve, FixedPointResidual) {
    for (const ProblemSpec& spec : {hu_linear(), with_memory()}) {
        const QuadraturePlan plan = QuadraturePlan::build(spec.order.alpha(), spec.make_grid());
        const SolveOptions opts{1e-10, 200, false};
        const SolveReport rep = solve(spec, plan, opts);
        const GridFunction moved = picard_step(spec, plan, rep.solution) - rep.solution;
        EXPECT_LE(moved.sup_norm(rep.first_checked_node), 2.0 * opts.tol);
    }
}

TEST(Solve, APosterioriBound) {
    for (const ProblemSpec& spec : {hu_linear(), with_memory()}) {
        const double q = contraction_check(spec).q;
        SolveOptions opts;
        opts.keep_iterates = true;
        const SolveReport rep = solve(spec, opts);
        ASSERT_EQ(rep.iterates.size(), rep.residual_trace.size() + 1);
        for (std::size_t m = 0; m < rep.residual_trace.size(); ++m) {
            const double dist = (rep.iterates[m] - rep.solution).sup_norm(rep.first_checked_node);
            EXPECT_LE(dist, rep.residual_trace[m] / (1.0 - q) + 2.0 * opts.tol) << "m=" << m;
        }
    }
}

TEST(Solve, Deterministic) {
    const SolveReport a = solve(with_memory());
    const SolveReport b = solve(with_memory());
    ASSERT_EQ(a.iterations, b.iterations);
    for (std::size_t i = 0; i < a.solution.size(); ++i) EXPECT_EQ(bits(a.solution[i]), bits(b.solution[i]));
    for (std::size_t m = 0; m < a.residual_trace.size(); ++m)
        EXPECT_EQ(bits(a.residual_trace[m]), bits(b.residual_trace[m]));
}

TEST(Solve, PlaceholderNodeWhenGammaBelowOne) {
    const SolveReport rep = solve(with_memory());
    EXPECT_EQ(rep.first_checked_node, 1u);
    const GridPtr g = rep.solution.grid();
    const double half = 0.5 * (g->psi()[1] - g->psi()[0]);
    EXPECT_NEAR(rep.solution[0], std::pow(half, -0.2) * 0.5 / std::tgamma(0.8), 1e-12);
}

TEST(Solve, DivergenceIsReportedWithTrace) {
    ProblemSpec spec = mittag_leffler(10.0, 129);
    try {
        solve(spec);
        FAIL() << "expected NonContractive";
    } catch (const NonContractive& e) {
        const auto& tr = e.residual_trace();
        ASSERT_GE(tr.size(), 6u);
        for (std::size_t m = tr.size() - 5; m < tr.size(); ++m) EXPECT_GT(tr[m], tr[m - 1]);
    }
}

TEST(Solve, IterationCapReportsNonConvergence) {
    const SolveReport rep = solve(mittag_leffler(-1.0, 129), {1e-14, 3, false});
    EXPECT_FALSE(rep.converged);
    EXPECT_EQ(rep.iterations, 3u);
    EXPECT_EQ(rep.residual_trace.size(), 3u);
}

TEST(Solve, EvaluationErrorsPropagate) {
    ProblemSpec spec = mittag_leffler(1.0, 33);
    spec.f = src("log(u - 1)");
    EXPECT_THROW(solve(spec), EvalError);
}

TEST(Solve, Preconditions) {
    ProblemSpec spec = hu_linear();
    EXPECT_THROW(solve(spec, {0.0, 10, false}), PreconditionError);
    EXPECT_THROW(solve(spec, {1e-10, 0, false}), PreconditionError);
    spec.phi = tx("1");
    EXPECT_THROW(spec.mode(), PreconditionError);
    spec.epsilon.reset();
    EXPECT_EQ(spec.mode(), StabilityMode::hur);
}

TEST(ContractionCheck, Examples) {
    ProblemSpec spec;
    spec.L_f = 0.1;
    spec.L_k = 0.05;
    const ContractionReport hur = contraction_check(spec, 0.8427);
    EXPECT_NEAR(hur.q, 0.8427 * 0.1 + 0.8427 * 0.8427 * 0.05, 1e-15);
    EXPECT_NEAR(hur.q, 0.1197771645, 1e-10);
    EXPECT_TRUE(hur.satisfied);

    spec.L_f = 0.2;
    spec.L_k = 0.1;
    const ContractionReport hu = contraction_check(spec);
    EXPECT_NEAR(hu.q, 0.28209479177387814347, 1e-14);
    EXPECT_TRUE(hu.satisfied);
    EXPECT_NEAR(hu_coefficient(spec), 1.12837916709551257390, 1e-14);

    spec.L_f = spec.L_k = 0.0;
    EXPECT_EQ(contraction_check(spec).q, 0.0);
    EXPECT_TRUE(contraction_check(spec).satisfied);
    EXPECT_TRUE(contraction_check(spec, 5.0).satisfied);

    spec.L_f = 1.0;
    EXPECT_FALSE(contraction_check(spec).satisfied);
}

TEST(LipschitzSpotCheck, Examples) {
    ProblemSpec spec;
    spec.f = src("0.5*u");
    spec.L_f = 0.5;
    const SpotCheckReport exact = lipschitz_spot_check(spec, 2000, 1);
    EXPECT_FALSE(exact.violated());
    EXPECT_NEAR(exact.max_ratio_f, 0.5, 1e-12);

    spec.f = src("u^2");
    spec.L_f = 1.0;
    const SpotCheckReport sq = lipschitz_spot_check(spec, 2000, 1);
    EXPECT_TRUE(sq.violation_f);
    EXPECT_GT(sq.max_ratio_f, 15.0);
    EXPECT_LE(sq.max_ratio_f, 20.0);

    spec.f = src("sin(t)*u");
    spec.L_f = 1.0;
    spec.k = ker("0.3*cos(t - s)*u");
    spec.L_k = 0.1;
    const SpotCheckReport k = lipschitz_spot_check(spec, 2000, 3);
    EXPECT_FALSE(k.violation_f);
    EXPECT_TRUE(k.violation_k);

    EXPECT_THROW(lipschitz_spot_check(spec, 0, 1), PreconditionError);
    spec.f = src("log(u)");
    EXPECT_THROW(lipschitz_spot_check(spec, 10, 1), EvalError);
}
