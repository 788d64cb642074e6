#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "frac/expr.hpp"
#include "frac/psi_calculus.hpp"

namespace frac {

enum class StabilityMode { none, hur, hu };

/// Full instance of the psi-Hilfer Volterra integro-differential problem
///
///     D^{alpha,beta;psi} u(t) = f(t, u(t)) + int_0^t k(t, s, u(s)) ds,
///     I^{1-gamma;psi} u(0) = sigma,   t in [0, T].
struct ProblemSpec {
    FractionalOrder order{0.5, 1.0};
    double T = 1.0;
    std::size_t n = 513;
    expr::Expr psi = expr::Expr::variable(expr::Var::t);
    expr::Expr f;
    /// Memory kernel; absent means the Volterra term is omitted entirely.
    std::optional<expr::Expr> k;
    double sigma = 0.0;
    double L_f = 0.0;
    double L_k = 0.0;
    /// Envelope for Hyers-Ulam-Rassias checks.
    std::optional<expr::Expr> phi;
    /// Constant envelope for Hyers-Ulam checks.
    std::optional<double> epsilon;
    /// User-supplied M; used when larger than the grid estimate.
    std::optional<double> M_override;

    /// hur when phi is set, hu when epsilon is set, none otherwise.
    /// Throws PreconditionError when both are set.
    StabilityMode mode() const;

    /// Checks the invariants that do not need a grid.
    void validate() const;

    GridPtr make_grid() const { return PsiGrid::from_expr(psi, T, n); }
    /// psi(T) - psi(0), evaluated directly.
    double psi_span() const;
};

struct SolveOptions {
    double tol = 1e-10;
    std::size_t max_iter = 200;
    /// Record every iterate (seed included) in the report.
    bool keep_iterates = false;
};

struct SolveReport {
    GridFunction solution;
    std::size_t iterations = 0;
    /// sup-norm of u_{m+1} - u_m over the checked nodes, one entry per step.
    std::vector<double> residual_trace;
    /// Largest ratio of successive residuals after the first step.
    double contraction_estimate = 0.0;
    bool converged = false;
    /// Norms skip node 0 when gamma < 1 (the prefactor is singular there).
    std::size_t first_checked_node = 0;
    std::vector<GridFunction> iterates;
};

/// The fixed-point operator
///
///     (Omega v)(t) = (psi(t)-psi(0))^{gamma-1} sigma / Gamma(gamma)
///                  + I^{alpha;psi}[ f(., v(.)) ](t)
///                  + I^{alpha;psi}[ x -> int_0^x k(x, s, v(s)) ds ](t)
///                  + forcing(t)
///
/// on a fixed grid. The inner Volterra integral uses the composite trapezoid
/// rule in s. When gamma < 1 node 0 holds a display placeholder: the prefactor
/// evaluated half a step from the origin.
class PicardOperator {
public:
    PicardOperator(const ProblemSpec& spec, const QuadraturePlan& plan_alpha,
                   std::optional<std::vector<double>> forcing = std::nullopt);

    GridFunction apply(const GridFunction& v) const;

    /// Constant term of the operator; the seed of the iteration.
    const GridFunction& prefactor() const noexcept { return prefactor_; }
    std::size_t first_checked_node() const noexcept { return first_node_; }
    const GridPtr& grid() const noexcept { return plan_.grid(); }

private:
    const QuadraturePlan& plan_;
    expr::CompiledExpr f_;
    std::optional<expr::CompiledExpr> k_;
    GridFunction prefactor_;
    std::optional<std::vector<double>> forcing_;
    std::size_t first_node_;
};

/// (psi(t)-psi(0))^{gamma-1} sigma / Gamma(gamma) at grid node i. Throws
/// SingularPrefactor for node 0 when gamma < 1.
double prefactor_at(const FractionalOrder& order, double sigma, const PsiGrid& grid, std::size_t i);

/// One application of Omega.
GridFunction picard_step(const ProblemSpec& spec, const QuadraturePlan& plan_alpha, const GridFunction& v);

/// Picard iteration from the prefactor seed until the step size drops below
/// tol. Throws NonContractive after 5 consecutive residual increases.
SolveReport solve(const ProblemSpec& spec, const SolveOptions& opts = {});
SolveReport solve(const ProblemSpec& spec, const QuadraturePlan& plan_alpha, const SolveOptions& opts);
SolveReport solve(const PicardOperator& op, const SolveOptions& opts);

struct ContractionReport {
    double q = 0.0;
    bool satisfied = false;
};

/// (psi(T)-psi(0))^alpha / Gamma(alpha+1), the M used in Hyers-Ulam mode.
double hu_coefficient(const ProblemSpec& spec);

/// q = M L_f + M^2 L_k when M is given (Hyers-Ulam-Rassias form), otherwise
/// q = hu_coefficient (L_f + T/2 L_k). satisfied means 0 <= q < 1; q = 0
/// counts as contractive.
ContractionReport contraction_check(const ProblemSpec& spec, std::optional<double> M = std::nullopt);

struct SpotCheckReport {
    std::size_t samples = 0;
    double max_ratio_f = 0.0;
    double max_ratio_k = 0.0;
    bool violation_f = false;
    bool violation_k = false;

    bool violated() const noexcept { return violation_f || violation_k; }
};

/// Random falsification test of the asserted Lipschitz constants over
/// (t, s, u1, u2) in [0,T]^2 x [-bound, bound]^2. A ratio above the asserted
/// constant by more than 1e-9 is a violation.
SpotCheckReport lipschitz_spot_check(const ProblemSpec& spec, std::size_t samples, std::uint64_t seed,
                                     double bound = 10.0);

}  // namespace frac
