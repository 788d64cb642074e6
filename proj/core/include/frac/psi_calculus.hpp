#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "frac/errors.hpp"
#include "frac/expr.hpp"

/// psi-weighted fractional integrals and the psi-Hilfer derivative on uniform grids.
///
/// For an increasing psi with psi' > 0 the psi-Riemann-Liouville integral is
///
///     (I^{mu;psi} f)(t) = 1/Gamma(mu) * int_0^t psi'(x) (psi(t) - psi(x))^{mu-1} f(x) dx
///
/// and the psi-Hilfer derivative of type (alpha, beta) is the composition
///
///     D^{alpha,beta;psi} f = I^{beta(1-alpha);psi} (1/psi' d/dt) I^{(1-beta)(1-alpha);psi} f.
namespace frac {

/// Order pair (alpha, beta) of the psi-Hilfer derivative.
class FractionalOrder {
public:
    /// Throws InvalidOrder unless 0 < alpha < 1 and 0 <= beta <= 1.
    FractionalOrder(double alpha, double beta);

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    /// gamma = alpha + beta (1 - alpha); always derived, never stored.
    /// beta = 1 yields exactly 1 so the prefactor stays regular at t = 0.
    double gamma() const noexcept { return beta_ == 1.0 ? 1.0 : alpha_ + beta_ * (1.0 - alpha_); }

private:
    double alpha_;
    double beta_;
};

class PsiGrid;
using GridPtr = std::shared_ptr<const PsiGrid>;

/// Uniform nodes t_i = i T / (n-1) with psi and psi' sampled on them.
class PsiGrid {
public:
    /// Samples psi(t) at the nodes. Throws DegenerateGrid when T <= 0, n < 2,
    /// or psi is not strictly increasing on the nodes.
    static GridPtr from_expr(const expr::Expr& psi, double T, std::size_t n);
    static GridPtr from_values(double T, std::vector<double> psi_values);

    double horizon() const noexcept { return T_; }
    std::size_t size() const noexcept { return psi_.size(); }
    double step() const noexcept { return T_ / static_cast<double>(size() - 1); }
    double node(std::size_t i) const noexcept;

    std::span<const double> psi() const noexcept { return psi_; }
    /// Central differences inside, one-sided second order at the ends.
    std::span<const double> psi_prime() const noexcept { return psi_prime_; }
    /// psi(T) - psi(0) as sampled.
    double psi_span() const noexcept { return psi_.back() - psi_.front(); }

    bool same_as(const PsiGrid& other) const noexcept;

private:
    PsiGrid(double T, std::vector<double> psi_values);

    double T_;
    std::vector<double> psi_;
    std::vector<double> psi_prime_;
};

/// Real values on the nodes of a PsiGrid. All values are finite.
class GridFunction {
public:
    GridFunction(GridPtr grid, std::vector<double> values);

    /// Samples a {t} expression on the grid.
    static GridFunction sample(GridPtr grid, const expr::Expr& e);
    static GridFunction constant(GridPtr grid, double c);

    const GridPtr& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    /// max_{i >= first} |f_i|
    double sup_norm(std::size_t first = 0) const;

    GridFunction operator+(const GridFunction& o) const;
    GridFunction operator-(const GridFunction& o) const;
    friend GridFunction operator*(double a, const GridFunction& f);

private:
    void require_same_grid(const GridFunction& o) const;

    GridPtr grid_;
    std::vector<double> values_;
};

/// Product-trapezoid weights for I^{mu;psi} on a grid:
/// (I^{mu;psi} f)(t_i) ~= sum_{j<=i} w[i][j] f(t_j).
///
/// With tau = psi(x) the kernel becomes the classical (tau_i - tau)^{mu-1} on
/// the abscissae tau_j = psi(t_j). The integrand is interpolated linearly in
/// tau on each panel and the kernel is integrated exactly, so every weight is
/// nonnegative and each row sums to (psi(t_i) - psi(0))^mu / Gamma(mu+1).
class QuadraturePlan {
public:
    /// Throws InvalidOrder when mu <= 0.
    static QuadraturePlan build(double mu, GridPtr grid);

    double order() const noexcept { return mu_; }
    const GridPtr& grid() const noexcept { return grid_; }
    /// Weights w[i][0..i].
    std::span<const double> row(std::size_t i) const noexcept {
        return {weights_.data() + offset(i), i + 1};
    }

    std::vector<double> apply(std::span<const double> f) const;

private:
    QuadraturePlan(double mu, GridPtr grid);
    static std::size_t offset(std::size_t i) noexcept { return i * (i + 1) / 2; }

    double mu_;
    GridPtr grid_;
    std::vector<double> weights_;  // packed lower triangle
};

/// Applies `plan`; the value at node 0 is exactly zero. Throws GridMismatch.
GridFunction frac_integral(const QuadraturePlan& plan, const GridFunction& f);

/// d/dt on the uniform grid: central differences inside, one-sided
/// second-order stencils at both ends (first order when n == 2).
std::vector<double> grid_derivative(std::span<const double> values, double h);

/// psi-Hilfer derivative evaluated by composition: inner psi-integral of order
/// (1-beta)(1-alpha), then (1/psi') d/dt by finite differences, then the outer
/// psi-integral of order beta(1-alpha). Zero-order integrals are the identity.
/// The derivative is taken on (0, T]: when the inner order is positive its
/// value at node 0 repeats node 1. Accuracy presumes f is smooth enough for
/// finite differencing.
GridFunction hilfer_derivative(const FractionalOrder& order, const GridPtr& grid, const GridFunction& f);

}  // namespace frac
