#include "frac/psi_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "frac/parallel.hpp"

namespace frac {

FractionalOrder::FractionalOrder(double alpha, double beta) : alpha_(alpha), beta_(beta) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidOrder("alpha must lie in (0,1), got " + std::to_string(alpha));
    if (!(beta >= 0.0 && beta <= 1.0))
        throw InvalidOrder("beta must lie in [0,1], got " + std::to_string(beta));
}

// ---------------------------------------------------------------------------
// PsiGrid
// ---------------------------------------------------------------------------

std::vector<double> grid_derivative(std::span<const double> v, double h) {
    const std::size_t n = v.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    if (n == 2) {
        d[0] = d[1] = (v[1] - v[0]) / h;
        return d;
    }
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    return d;
}

PsiGrid::PsiGrid(double T, std::vector<double> psi_values) : T_(T), psi_(std::move(psi_values)) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DegenerateGrid("horizon T must be positive and finite");
    if (psi_.size() < 2) throw DegenerateGrid("grid needs at least 2 nodes");
    for (std::size_t i = 0; i < psi_.size(); ++i) {
        if (!std::isfinite(psi_[i])) throw DegenerateGrid("psi is not finite at node " + std::to_string(i));
        if (i > 0 && !(psi_[i] > psi_[i - 1]))
            throw DegenerateGrid("psi is not strictly increasing at node " + std::to_string(i));
    }
    psi_prime_ = grid_derivative(psi_, step());
    for (std::size_t i = 0; i < psi_prime_.size(); ++i)
        if (!(psi_prime_[i] > 0.0))
            throw DegenerateGrid("psi' is not positive at node " + std::to_string(i));
}

GridPtr PsiGrid::from_values(double T, std::vector<double> psi_values) {
    return GridPtr(new PsiGrid(T, std::move(psi_values)));
}

GridPtr PsiGrid::from_expr(const expr::Expr& psi, double T, std::size_t n) {
    if (n < 2) throw DegenerateGrid("grid needs at least 2 nodes");
    if (!(T > 0.0) || !std::isfinite(T)) throw DegenerateGrid("horizon T must be positive and finite");
    std::vector<double> values(n);
    const double h = T / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (i + 1 == n) ? T : static_cast<double>(i) * h;
        values[i] = psi.evaluate({t, 0.0, 0.0});
    }
    return from_values(T, std::move(values));
}

double PsiGrid::node(std::size_t i) const noexcept {
    if (i + 1 == size()) return T_;
    return static_cast<double>(i) * step();
}

bool PsiGrid::same_as(const PsiGrid& other) const noexcept {
    return this == &other || (T_ == other.T_ && psi_ == other.psi_);
}

// ---------------------------------------------------------------------------
// GridFunction
// ---------------------------------------------------------------------------

GridFunction::GridFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw PreconditionError("grid function without grid");
    if (values_.size() != grid_->size())
        throw GridMismatch();
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]))
            throw PreconditionError("grid function value is not finite at node " + std::to_string(i));
}

GridFunction GridFunction::sample(GridPtr grid, const expr::Expr& e) {
    const expr::CompiledExpr fn(e);
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid->node(i), 0.0, 0.0);
    return GridFunction(std::move(grid), std::move(v));
}

GridFunction GridFunction::constant(GridPtr grid, double c) {
    const std::size_t n = grid->size();
    return GridFunction(std::move(grid), std::vector<double>(n, c));
}

double GridFunction::sup_norm(std::size_t first) const {
    double m = 0.0;
    for (std::size_t i = first; i < values_.size(); ++i) m = std::max(m, std::abs(values_[i]));
    return m;
}

void GridFunction::require_same_grid(const GridFunction& o) const {
    if (!grid_->same_as(*o.grid_)) throw GridMismatch();
}

GridFunction GridFunction::operator+(const GridFunction& o) const {
    require_same_grid(o);
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i] + o.values_[i];
    return GridFunction(grid_, std::move(v));
}

GridFunction GridFunction::operator-(const GridFunction& o) const {
    require_same_grid(o);
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i] - o.values_[i];
    return GridFunction(grid_, std::move(v));
}

GridFunction operator*(double a, const GridFunction& f) {
    std::vector<double> v(f.values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * f.values_[i];
    return GridFunction(f.grid_, std::move(v));
}

// ---------------------------------------------------------------------------
// QuadraturePlan
// ---------------------------------------------------------------------------

namespace {

// ((1+r)^p - 1) / p without cancellation for small r.
double rel_power_increment(double r, double p) {
    return std::expm1(p * std::log1p(r)) / p;
}

struct PanelWeights {
    double near;  // multiplies f at the panel end farther from t_i
    double far;   // multiplies f at the panel end closer to t_i
};

// Panel [tau_j, tau_j + h] with b = tau_i - (tau_j + h) >= 0. With y measured
// back from the right end, the kernel is (b + y)^{mu-1} and the linear
// interpolant weights are y/h (left node) and 1 - y/h (right node).
PanelWeights panel_weights(double b, double h, double mu) {
    if (b == 0.0) {
        const double hm = std::pow(h, mu);
        return {hm / (mu + 1.0), hm / (mu * (mu + 1.0))};
    }
    const double r = h / b;
    double total;      // int_0^h (b+y)^{mu-1} dy
    double left_part;  // (1/h) int_0^h (b+y)^{mu-1} y dy
    if (r <= 1.0) {
        const double bm = std::pow(b, mu);
        const double a_mu = rel_power_increment(r, mu);
        const double a_mu1 = rel_power_increment(r, mu + 1.0);
        total = bm * a_mu;
        left_part = bm * b * (a_mu1 - a_mu) / h;
    } else {
        const double a = b + h;
        const double am = std::pow(a, mu);
        const double bm = std::pow(b, mu);
        total = (am - bm) / mu;
        left_part = ((am * a - bm * b) / (mu + 1.0) - b * total) / h;
    }
    return {left_part, total - left_part};
}

}  // namespace

QuadraturePlan::QuadraturePlan(double mu, GridPtr grid) : mu_(mu), grid_(std::move(grid)) {}

QuadraturePlan QuadraturePlan::build(double mu, GridPtr grid) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidOrder("integral order must be positive");
    if (!grid) throw PreconditionError("quadrature plan without grid");
    const std::size_t n = grid->size();
    QuadraturePlan plan(mu, grid);
    plan.weights_.assign(offset(n), 0.0);

    const std::span<const double> tau = grid->psi();
    const double inv_gamma = 1.0 / std::tgamma(mu);
    parallel_for(
        1, n,
        [&](std::size_t i) {
            double* w = plan.weights_.data() + offset(i);
            for (std::size_t j = 0; j < i; ++j) {
                const double h = tau[j + 1] - tau[j];
                const double b = tau[i] - tau[j + 1];
                const PanelWeights pw = panel_weights(b, h, mu);
                w[j] += pw.near * inv_gamma;
                w[j + 1] += pw.far * inv_gamma;
            }
        },
        8);
    return plan;
}

std::vector<double> QuadraturePlan::apply(std::span<const double> f) const {
    const std::size_t n = grid_->size();
    if (f.size() != n) throw GridMismatch();
    std::vector<double> out(n, 0.0);
    parallel_for(
        1, n,
        [&](std::size_t i) {
            const std::span<const double> w = row(i);
            double acc = 0.0;
            for (std::size_t j = 0; j <= i; ++j) acc += w[j] * f[j];
            out[i] = acc;
        },
        64);
    return out;
}

GridFunction frac_integral(const QuadraturePlan& plan, const GridFunction& f) {
    if (!plan.grid()->same_as(*f.grid())) throw GridMismatch();
    return GridFunction(plan.grid(), plan.apply(f.values()));
}

// ---------------------------------------------------------------------------
// Hilfer derivative
// ---------------------------------------------------------------------------

GridFunction hilfer_derivative(const FractionalOrder& order, const GridPtr& grid, const GridFunction& f) {
    if (!grid->same_as(*f.grid())) throw GridMismatch();
    const double inner_order = (1.0 - order.beta()) * (1.0 - order.alpha());
    const double outer_order = order.beta() * (1.0 - order.alpha());

    std::vector<double> g = inner_order > 0.0 ? QuadraturePlan::build(inner_order, grid).apply(f.values())
                                               : std::vector<double>(f.values().begin(), f.values().end());
    std::vector<double> h = grid_derivative(g, grid->step());
    // The quadrature pins g(0) = 0, but the right limit g(0+) = I^{1-gamma} f(0+)
    // carries the initial value and may be nonzero. Differentiate on (0, T]
    // only: a forward stencil at node 1, copied to node 0.
    if (inner_order > 0.0 && g.size() >= 4) {
        h[1] = (-3.0 * g[1] + 4.0 * g[2] - g[3]) / (2.0 * grid->step());
        h[0] = h[1];
    }
    const std::span<const double> dpsi = grid->psi_prime();
    for (std::size_t i = 0; i < h.size(); ++i) h[i] /= dpsi[i];

    if (outer_order > 0.0) h = QuadraturePlan::build(outer_order, grid).apply(h);
    return GridFunction(grid, std::move(h));
}

}  // namespace frac
