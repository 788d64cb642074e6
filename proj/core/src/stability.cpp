#include "frac/stability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "frac/parallel.hpp"

namespace frac {

namespace {

constexpr std::uint64_t kLipschitzSeed = 0x9e3779b97f4a7c15ULL;
constexpr std::size_t kPieces = 16;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

const expr::Expr& require_phi(const ProblemSpec& spec) {
    if (!spec.phi) throw PreconditionError("phi is required (Hyers-Ulam-Rassias mode)");
    return *spec.phi;
}

GridFunction sample_phi(const ProblemSpec& spec, const GridPtr& grid) {
    GridFunction phi = GridFunction::sample(grid, require_phi(spec));
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (!(phi[i] > 0.0))
            throw NonpositivePhi("phi(t) must be positive; phi(" + fmt(grid->node(i)) + ") = " + fmt(phi[i]));
    return phi;
}

}  // namespace

double estimate_M(const ProblemSpec& spec, const QuadraturePlan& plan_alpha) {
    const GridFunction phi = sample_phi(spec, plan_alpha.grid());
    const std::vector<double> integral = plan_alpha.apply(phi.values());
    double M = 0.0;
    for (std::size_t i = 1; i < integral.size(); ++i) M = std::max(M, integral[i] / phi[i]);
    return M;
}

StabilityConstants stability_constants(const ProblemSpec& spec, const QuadraturePlan& plan_alpha) {
    StabilityConstants sc;
    switch (spec.mode()) {
        case StabilityMode::hur:
            sc.M_estimated = sc.M = estimate_M(spec, plan_alpha);
            if (spec.M_override) {
                if (*spec.M_override >= sc.M_estimated)
                    sc.M = *spec.M_override;
                else
                    sc.override_ignored = true;
            }
            sc.q = contraction_check(spec, sc.M).q;
            return sc;
        case StabilityMode::hu:
            sc.M_estimated = sc.M = hu_coefficient(spec);
            sc.q = contraction_check(spec).q;
            return sc;
        case StabilityMode::none: break;
    }
    throw PreconditionError("stability constants need phi (HUR) or epsilon (HU)");
}

GridFunction hur_bound(const ProblemSpec& spec, const GridPtr& grid, double M, double q) {
    if (!(q < 1.0)) throw ContractionViolated("q = " + fmt(q) + " >= 1: no stability bound");
    if (!(q >= 0.0)) throw PreconditionError("q must be nonnegative");
    const GridFunction phi = sample_phi(spec, grid);
    return (M / (1.0 - q)) * phi;
}

double hu_bound(const ProblemSpec& spec) {
    if (!spec.epsilon) throw PreconditionError("epsilon is required (Hyers-Ulam mode)");
    const double a = spec.order.alpha();
    const double span_pow = std::pow(spec.psi_span(), a);
    const double denom = std::tgamma(a + 1.0) - span_pow * (spec.L_f + 0.5 * spec.T * spec.L_k);
    if (!(denom > 0.0)) throw DegenerateDenominator("bound denominator " + fmt(denom) + " is not positive");
    return span_pow * *spec.epsilon / denom;
}

GridFunction envelope(const ProblemSpec& spec, const GridPtr& grid) {
    switch (spec.mode()) {
        case StabilityMode::hur: return sample_phi(spec, grid);
        case StabilityMode::hu: return GridFunction::constant(grid, *spec.epsilon);
        case StabilityMode::none: break;
    }
    throw PreconditionError("perturbations need phi or epsilon");
}

GridFunction make_perturbed(const ProblemSpec& spec, const GridFunction& delta, const QuadraturePlan& plan_alpha,
                            double tol, std::size_t max_iter) {
    const GridPtr& grid = plan_alpha.grid();
    if (!grid->same_as(*delta.grid())) throw GridMismatch();
    const GridFunction env = envelope(spec, grid);
    for (std::size_t i = 0; i < delta.size(); ++i)
        if (std::abs(delta[i]) > env[i])
            throw InadmissiblePerturbation("|delta(" + fmt(grid->node(i)) + ")| = " + fmt(std::abs(delta[i])) +
                                           " exceeds envelope " + fmt(env[i]));

    PicardOperator op(spec, plan_alpha, plan_alpha.apply(delta.values()));
    SolveReport rep = solve(op, SolveOptions{tol, max_iter, false});
    if (!rep.converged)
        throw NonContractive("perturbed problem did not converge in " + std::to_string(max_iter) + " iterations",
                             rep.residual_trace);
    return rep.solution;
}

GridFunction make_perturbed(const ProblemSpec& spec, const expr::Expr& delta, const QuadraturePlan& plan_alpha,
                            double tol, std::size_t max_iter) {
    return make_perturbed(spec, GridFunction::sample(plan_alpha.grid(), delta), plan_alpha, tol, max_iter);
}

GridFunction random_piecewise_perturbation(const GridFunction& env, std::mt19937_64& rng) {
    std::array<double, kPieces> levels{};
    for (double& v : levels) v = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
    const PsiGrid& grid = *env.grid();
    std::vector<double> d(env.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double x = grid.node(i) / grid.horizon();
        const auto piece = std::min(kPieces - 1, static_cast<std::size_t>(x * kPieces));
        d[i] = levels[piece] * env[i];
    }
    return GridFunction(env.grid(), std::move(d));
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

namespace {

struct NamedDelta {
    std::string name;
    GridFunction delta;
};

std::vector<NamedDelta> perturbation_family(const GridFunction& env, std::size_t count, std::uint64_t seed) {
    const PsiGrid& grid = *env.grid();
    std::vector<NamedDelta> out;
    auto shaped = [&](auto&& shape) {
        std::vector<double> d(env.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = shape(grid.node(i)) * env[i];
        return GridFunction(env.grid(), std::move(d));
    };
    std::vector<NamedDelta> catalog;
    catalog.push_back({"constant", env});
    catalog.push_back({"constant_negative", -1.0 * env});
    catalog.push_back({"scaled_half", 0.5 * env});
    catalog.push_back({"sign_alternating", shaped([](double t) { return std::sin(10.0 * t); })});

    std::mt19937_64 rng(seed);
    for (std::size_t p = 0; p < count; ++p) {
        if (p < catalog.size()) {
            out.push_back(std::move(catalog[p]));
        } else {
            out.push_back({"random_piecewise_" + std::to_string(p - catalog.size() + 1),
                           random_piecewise_perturbation(env, rng)});
        }
    }
    return out;
}

}  // namespace

StabilityCertificate verify(const ProblemSpec& spec, std::size_t num_perturbations, std::uint64_t seed,
                            const VerifyOptions& opts) {
    spec.validate();
    const StabilityMode mode = spec.mode();
    if (mode == StabilityMode::none) throw PreconditionError("verify needs phi (HUR) or epsilon (HU)");

    StabilityCertificate cert;
    cert.mode = mode;
    cert.seed = seed;
    cert.n = spec.n;
    cert.tol = opts.solve.tol;
    cert.M_override = spec.M_override;

    const GridPtr grid = spec.make_grid();
    const QuadraturePlan plan = QuadraturePlan::build(spec.order.alpha(), grid);

    const StabilityConstants sc = stability_constants(spec, plan);
    cert.M = sc.M;
    cert.M_estimated = sc.M_estimated;
    cert.contraction_q = sc.q;
    if (sc.override_ignored)
        cert.warnings.push_back("M override " + fmt(*spec.M_override) + " is below the grid estimate " +
                                fmt(sc.M_estimated) + "; using the estimate");
    if (!(sc.q < 1.0))
        throw ContractionViolated("contraction constant q = " + fmt(sc.q) + " >= 1: no certificate possible");

    if (mode == StabilityMode::hur) {
        cert.bound = hur_bound(spec, grid, sc.M, sc.q);
    } else {
        cert.bound = GridFunction::constant(grid, hu_bound(spec));
        const double literal = spec.T * spec.L_f + 0.5 * spec.T * spec.T * spec.L_k;
        if (!(literal > 0.0 && literal < 1.0))
            cert.warnings.push_back("hypothesis 0 < T L_f + T^2/2 L_k < 1 does not hold (value " + fmt(literal) +
                                    "); the bound is certified under its own denominator condition q = " +
                                    fmt(sc.q) + " < 1");
    }
    if (cert.contraction_q == 0.0)
        cert.warnings.push_back("q = 0 (zero Lipschitz constants) accepted as contractive");

    const SpotCheckReport spot = lipschitz_spot_check(spec, opts.lipschitz_samples, kLipschitzSeed);
    if (spot.violated())
        throw HypothesisFailure("asserted Lipschitz constants are falsified by sampling: max |df/du| ratio " +
                                fmt(spot.max_ratio_f) + " vs L_f = " + fmt(spec.L_f) + ", max |dk/du| ratio " +
                                fmt(spot.max_ratio_k) + " vs L_k = " + fmt(spec.L_k));

    const SolveReport base = solve(spec, plan, opts.solve);
    if (!base.converged)
        throw NonContractive("unperturbed problem did not converge", base.residual_trace);
    cert.u0 = base.solution;
    cert.first_checked_node = base.first_checked_node;
    const std::size_t first = base.first_checked_node;

    // Discretization error of u0: compare against the refined grid n -> 2n-1.
    {
        ProblemSpec fine = spec;
        fine.n = 2 * spec.n - 1;
        const SolveReport refined = solve(fine, opts.solve);
        double err = 0.0;
        for (std::size_t i = first; i < spec.n; ++i)
            err = std::max(err, std::abs(refined.solution[2 * i] - base.solution[i]));
        cert.quadrature_error = err;
    }
    cert.slack = 10.0 * opts.solve.tol + cert.quadrature_error;

    const GridFunction env = envelope(spec, grid);
    std::vector<NamedDelta> family = perturbation_family(env, num_perturbations, seed);
    std::vector<std::vector<double>> deviations(family.size());
    parallel_for(
        0, family.size(),
        [&](std::size_t p) {
            const GridFunction u = make_perturbed(spec, family[p].delta, plan, opts.solve.tol, opts.solve.max_iter);
            std::vector<double> dev(grid->size(), 0.0);
            for (std::size_t i = first; i < dev.size(); ++i) dev[i] = std::abs(u[i] - base.solution[i]);
            deviations[p] = std::move(dev);
        },
        1);

    cert.worst_deviation.assign(grid->size(), 0.0);
    bool all_within = true;
    for (std::size_t p = 0; p < family.size(); ++p) {
        PerturbationResult res{family[p].name, 0.0, -std::numeric_limits<double>::infinity()};
        for (std::size_t i = first; i < grid->size(); ++i) {
            const double d = deviations[p][i];
            res.max_deviation = std::max(res.max_deviation, d);
            res.margin = std::max(res.margin, d - (*cert.bound)[i]);
            cert.worst_deviation[i] = std::max(cert.worst_deviation[i], d);
        }
        cert.empirical_max_deviation = std::max(cert.empirical_max_deviation, res.max_deviation);
        all_within = all_within && res.margin <= cert.slack;
        cert.perturbations.push_back(std::move(res));
    }
    cert.perturbations_tested = family.size();
    cert.certified = cert.perturbations_tested > 0 && all_within;
    if (cert.perturbations_tested == 0) cert.warnings.push_back("no perturbations tested: vacuous run, not certified");
    return cert;
}

}  // namespace frac
