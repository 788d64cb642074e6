#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "frac/solver.hpp"

namespace frac {

/// Outcome of one manufactured perturbation inside verify().
struct PerturbationResult {
    std::string name;
    /// max_i |u(t_i) - u0(t_i)| over the checked nodes
    double max_deviation = 0.0;
    /// max_i (|u(t_i) - u0(t_i)| - bound(t_i)); certified needs margin <= slack
    double margin = 0.0;
};

struct StabilityCertificate {
    StabilityMode mode = StabilityMode::none;
    /// M entering the bound: max(grid estimate, override) in HUR mode,
    /// (psi(T)-psi(0))^alpha / Gamma(alpha+1) in HU mode.
    double M = 0.0;
    double M_estimated = 0.0;
    std::optional<double> M_override;
    double contraction_q = 0.0;
    std::optional<GridFunction> bound;
    std::optional<GridFunction> u0;
    /// Per node, the largest deviation over all perturbations.
    std::vector<double> worst_deviation;
    double empirical_max_deviation = 0.0;
    std::size_t perturbations_tested = 0;
    std::vector<PerturbationResult> perturbations;
    bool certified = false;
    double slack = 0.0;
    /// Estimated discretization error of u0 from a refinement n -> 2n-1.
    double quadrature_error = 0.0;
    double tol = 0.0;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::size_t first_checked_node = 0;
    std::vector<std::string> warnings;
};

/// M and contraction constant q for the instance's mode.
struct StabilityConstants {
    double M = 0.0;
    /// Grid estimate (HUR) or (psi(T)-psi(0))^alpha / Gamma(alpha+1) (HU).
    double M_estimated = 0.0;
    double q = 0.0;
    bool override_ignored = false;
};

/// HUR: M = max(estimate_M, override) and q = M L_f + M^2 L_k.
/// HU: M = (psi(T)-psi(0))^alpha / Gamma(alpha+1) and q = M (L_f + T/2 L_k).
/// Does not check q < 1.
StabilityConstants stability_constants(const ProblemSpec& spec, const QuadraturePlan& plan_alpha);

/// Smallest M with (I^{alpha;psi} phi)(t_i) <= M phi(t_i) on nodes i >= 1.
/// Throws NonpositivePhi when phi(t_i) <= 0 at any node.
double estimate_M(const ProblemSpec& spec, const QuadraturePlan& plan_alpha);

/// t_i -> M phi(t_i) / (1 - q). Throws ContractionViolated when q >= 1.
GridFunction hur_bound(const ProblemSpec& spec, const GridPtr& grid, double M, double q);

/// (psi(T)-psi(0))^alpha eps / (Gamma(alpha+1) - (psi(T)-psi(0))^alpha (L_f + T/2 L_k)).
/// Throws DegenerateDenominator when the denominator is not positive.
double hu_bound(const ProblemSpec& spec);

/// Admissible perturbation envelope on the grid: phi (HUR) or eps (HU).
GridFunction envelope(const ProblemSpec& spec, const GridPtr& grid);

/// Solves u = Omega u + I^{alpha;psi} delta, whose integral-form residual
/// against the unperturbed equation is exactly I^{alpha;psi} delta.
/// Throws InadmissiblePerturbation when |delta(t_i)| exceeds the envelope at
/// any node.
GridFunction make_perturbed(const ProblemSpec& spec, const GridFunction& delta, const QuadraturePlan& plan_alpha,
                            double tol, std::size_t max_iter);
GridFunction make_perturbed(const ProblemSpec& spec, const expr::Expr& delta, const QuadraturePlan& plan_alpha,
                            double tol, std::size_t max_iter);

/// Piecewise constant on 16 equal subintervals with values drawn uniformly
/// from [-1, 1], multiplied by the envelope.
GridFunction random_piecewise_perturbation(const GridFunction& envelope, std::mt19937_64& rng);

struct VerifyOptions {
    SolveOptions solve{};
    /// Samples for the Lipschitz falsification test run before certifying.
    std::size_t lipschitz_samples = 2000;
};

/// Solves for u0, manufactures num_perturbations admissible perturbed
/// solutions (fixed catalog first, then seeded random piecewise ones) and
/// checks every deviation |u - u0| against the theoretical bound.
///
/// Refuses with ContractionViolated when q >= 1 and with HypothesisFailure
/// when the asserted Lipschitz constants are falsified by sampling. A run with
/// zero perturbations is never certified.
StabilityCertificate verify(const ProblemSpec& spec, std::size_t num_perturbations, std::uint64_t seed,
                            const VerifyOptions& opts = {});

}  // namespace frac
