#include "frac/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "frac/parallel.hpp"

namespace frac {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
}

void require_vars(const expr::Expr& e, expr::VarSet allowed, const char* what) {
    if (!e.free_variables().subset_of(allowed))
        throw PreconditionError(std::string(what) + " may only use variables " + allowed.to_string() + ", uses " +
                                e.free_variables().to_string());
}

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

// ---------------------------------------------------------------------------
// ProblemSpec
// ---------------------------------------------------------------------------

StabilityMode ProblemSpec::mode() const {
    if (phi && epsilon) throw PreconditionError("phi and epsilon are mutually exclusive");
    if (phi) return StabilityMode::hur;
    if (epsilon) return StabilityMode::hu;
    return StabilityMode::none;
}

void ProblemSpec::validate() const {
    (void)mode();
    if (!(T > 0.0) || !std::isfinite(T)) throw PreconditionError("T must be positive and finite");
    if (n < 2) throw PreconditionError("n must be at least 2");
    if (!std::isfinite(sigma)) throw PreconditionError("sigma must be finite");
    if (!(L_f >= 0.0) || !std::isfinite(L_f)) throw PreconditionError("L_f must be a finite nonnegative number");
    if (!(L_k >= 0.0) || !std::isfinite(L_k)) throw PreconditionError("L_k must be a finite nonnegative number");
    if (epsilon && (!(*epsilon >= 0.0) || !std::isfinite(*epsilon)))
        throw PreconditionError("epsilon must be a finite nonnegative number");
    if (M_override && (!(*M_override > 0.0) || !std::isfinite(*M_override)))
        throw PreconditionError("M override must be positive and finite");
    require_vars(psi, expr::kTimeVars, "psi");
    require_vars(f, expr::kSourceVars, "f");
    if (k) require_vars(*k, expr::kKernelVars, "k");
    if (phi) require_vars(*phi, expr::kTimeVars, "phi");
}

double ProblemSpec::psi_span() const {
    return psi.evaluate({T, 0.0, 0.0}) - psi.evaluate({0.0, 0.0, 0.0});
}

// ---------------------------------------------------------------------------
// Operator
// ---------------------------------------------------------------------------

double prefactor_at(const FractionalOrder& order, double sigma, const PsiGrid& grid, std::size_t i) {
    const double gamma = order.gamma();
    if (gamma == 1.0) return sigma;
    if (i == 0) throw SingularPrefactor("(psi(t)-psi(0))^(gamma-1) is singular at t = 0 for gamma < 1");
    const double dpsi = grid.psi()[i] - grid.psi()[0];
    return std::pow(dpsi, gamma - 1.0) * sigma / std::tgamma(gamma);
}

namespace {

GridFunction make_prefactor(const ProblemSpec& spec, const GridPtr& grid) {
    const std::size_t n = grid->size();
    std::vector<double> v(n);
    for (std::size_t i = 1; i < n; ++i) v[i] = prefactor_at(spec.order, spec.sigma, *grid, i);
    if (spec.order.gamma() == 1.0) {
        v[0] = spec.sigma;
    } else {
        // placeholder: prefactor half a step from the origin
        const double half = 0.5 * (grid->psi()[1] - grid->psi()[0]);
        const double gamma = spec.order.gamma();
        v[0] = std::pow(half, gamma - 1.0) * spec.sigma / std::tgamma(gamma);
    }
    return GridFunction(grid, std::move(v));
}

}  // namespace

PicardOperator::PicardOperator(const ProblemSpec& spec, const QuadraturePlan& plan_alpha,
                               std::optional<std::vector<double>> forcing)
    : plan_(plan_alpha),
      f_(spec.f),
      prefactor_(make_prefactor(spec, plan_alpha.grid())),
      forcing_(std::move(forcing)),
      first_node_(spec.order.gamma() < 1.0 ? 1 : 0) {
    if (spec.k) k_.emplace(*spec.k);
    if (forcing_ && forcing_->size() != grid()->size()) throw GridMismatch();
}

GridFunction PicardOperator::apply(const GridFunction& v) const {
    const PsiGrid& grid = *plan_.grid();
    if (!grid.same_as(*v.grid())) throw GridMismatch();
    const std::size_t n = grid.size();
    const std::span<const double> vals = v.values();

    std::vector<double> integrand(n);
    for (std::size_t j = 0; j < n; ++j) integrand[j] = f_(grid.node(j), 0.0, vals[j]);

    if (k_) {
        const double h = grid.step();
        std::vector<double> memory(n, 0.0);
        parallel_for(
            1, n,
            [&](std::size_t j) {
                const double t = grid.node(j);
                double acc = 0.5 * (*k_)(t, grid.node(0), vals[0]);
                for (std::size_t m = 1; m < j; ++m) acc += (*k_)(t, grid.node(m), vals[m]);
                acc += 0.5 * (*k_)(t, grid.node(j), vals[j]);
                memory[j] = h * acc;
            },
            16);
        for (std::size_t j = 0; j < n; ++j) integrand[j] += memory[j];
    }

    std::vector<double> out = plan_.apply(integrand);
    const std::span<const double> pre = prefactor_.values();
    for (std::size_t i = 0; i < n; ++i) out[i] += pre[i];
    if (forcing_)
        for (std::size_t i = 0; i < n; ++i) out[i] += (*forcing_)[i];
    if (!all_finite(out)) throw NonContractive("Picard iterate is not finite", {});
    return GridFunction(plan_.grid(), std::move(out));
}

GridFunction picard_step(const ProblemSpec& spec, const QuadraturePlan& plan_alpha, const GridFunction& v) {
    return PicardOperator(spec, plan_alpha).apply(v);
}

// ---------------------------------------------------------------------------
// Iteration
// ---------------------------------------------------------------------------

SolveReport solve(const PicardOperator& op, const SolveOptions& opts) {
    if (!(opts.tol > 0.0)) throw PreconditionError("tol must be positive");
    if (opts.max_iter < 1) throw PreconditionError("max_iter must be at least 1");

    const std::size_t first = op.first_checked_node();
    SolveReport report{op.prefactor(), 0, {}, 0.0, false, first, {}};
    report.first_checked_node = first;
    if (opts.keep_iterates) report.iterates.push_back(report.solution);

    constexpr int kMaxIncreases = 5;
    int increases = 0;
    for (std::size_t m = 0; m < opts.max_iter; ++m) {
        GridFunction next = [&] {
            try {
                return op.apply(report.solution);
            } catch (const NonContractive& e) {
                throw NonContractive(e.what(), report.residual_trace);
            }
        }();
        const double r = (next - report.solution).sup_norm(first);
        report.residual_trace.push_back(r);
        report.iterations = m + 1;
        report.solution = std::move(next);
        if (opts.keep_iterates) report.iterates.push_back(report.solution);
        if (r < opts.tol) {
            report.converged = true;
            break;
        }
        const auto& tr = report.residual_trace;
        increases = (tr.size() >= 2 && r > tr[tr.size() - 2]) ? increases + 1 : 0;
        if (increases >= kMaxIncreases)
            throw NonContractive("residual grew for " + std::to_string(kMaxIncreases) + " consecutive steps",
                                 report.residual_trace);
    }

    const auto& tr = report.residual_trace;
    double q = 0.0;
    if (tr.size() == 2 && tr[0] > 0.0) q = tr[1] / tr[0];
    for (std::size_t m = 2; m < tr.size(); ++m)
        if (tr[m - 1] > 0.0) q = std::max(q, tr[m] / tr[m - 1]);
    report.contraction_estimate = q;
    return report;
}

SolveReport solve(const ProblemSpec& spec, const QuadraturePlan& plan_alpha, const SolveOptions& opts) {
    return solve(PicardOperator(spec, plan_alpha), opts);
}

SolveReport solve(const ProblemSpec& spec, const SolveOptions& opts) {
    spec.validate();
    const QuadraturePlan plan = QuadraturePlan::build(spec.order.alpha(), spec.make_grid());
    return solve(spec, plan, opts);
}

// ---------------------------------------------------------------------------
// Hypothesis checks
// ---------------------------------------------------------------------------

double hu_coefficient(const ProblemSpec& spec) {
    const double a = spec.order.alpha();
    return std::pow(spec.psi_span(), a) / std::tgamma(a + 1.0);
}

ContractionReport contraction_check(const ProblemSpec& spec, std::optional<double> M) {
    ContractionReport r;
    if (M) {
        if (!(*M > 0.0)) throw PreconditionError("M must be positive");
        r.q = *M * spec.L_f + *M * *M * spec.L_k;
    } else {
        r.q = hu_coefficient(spec) * (spec.L_f + 0.5 * spec.T * spec.L_k);
    }
    r.satisfied = r.q >= 0.0 && r.q < 1.0;
    return r;
}

SpotCheckReport lipschitz_spot_check(const ProblemSpec& spec, std::size_t samples, std::uint64_t seed,
                                     double bound) {
    if (samples == 0) throw PreconditionError("spot check needs at least one sample");
    if (!(bound > 0.0)) throw PreconditionError("sampling bound must be positive");

    constexpr double kSlack = 1e-9;
    const expr::CompiledExpr f(spec.f);
    std::optional<expr::CompiledExpr> k;
    if (spec.k) k.emplace(*spec.k);

    std::mt19937_64 rng(seed);
    SpotCheckReport rep;
    rep.samples = samples;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = uniform(rng, 0.0, spec.T);
        const double s = uniform(rng, 0.0, spec.T);
        const double u1 = uniform(rng, -bound, bound);
        const double u2 = uniform(rng, -bound, bound);
        const double du = std::abs(u1 - u2);
        if (du == 0.0) continue;
        rep.max_ratio_f = std::max(rep.max_ratio_f, std::abs(f(t, 0.0, u1) - f(t, 0.0, u2)) / du);
        if (k) rep.max_ratio_k = std::max(rep.max_ratio_k, std::abs((*k)(t, s, u1) - (*k)(t, s, u2)) / du);
    }
    rep.violation_f = rep.max_ratio_f > spec.L_f + kSlack;
    rep.violation_k = rep.max_ratio_k > spec.L_k + kSlack;
    return rep;
}

}  // namespace frac
