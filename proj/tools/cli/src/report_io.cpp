#include "frac/cli/report_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>

#include <nlohmann/json.hpp>

namespace frac::cli {

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), end);
}

namespace {

constexpr const char* kPlaceholderNote =
    "# node 0 is a placeholder: (psi(t)-psi(0))^(gamma-1) is singular at t = 0 for gamma < 1";

const char* mode_name(StabilityMode m) {
    switch (m) {
        case StabilityMode::hur: return "HUR";
        case StabilityMode::hu: return "HU";
        case StabilityMode::none: break;
    }
    return "none";
}

}  // namespace

void write_solution_csv(std::ostream& os, const ProblemSpec& spec, const SolveReport& report) {
    const PsiGrid& grid = *report.solution.grid();
    os << "t,psi_t,u0\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i == 0 && spec.order.gamma() < 1.0) os << kPlaceholderNote << '\n';
        os << format_double(grid.node(i)) << ',' << format_double(grid.psi()[i]) << ','
           << format_double(report.solution[i]) << '\n';
    }
}

void write_certificate_csv(std::ostream& os, const StabilityCertificate& cert) {
    const GridFunction& u0 = *cert.u0;
    const GridFunction& bound = *cert.bound;
    const PsiGrid& grid = *u0.grid();
    os << "t,u0,bound,worst_deviation\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i < cert.first_checked_node) os << kPlaceholderNote << '\n';
        os << format_double(grid.node(i)) << ',' << format_double(u0[i]) << ',' << format_double(bound[i]) << ','
           << format_double(cert.worst_deviation[i]) << '\n';
    }
}

std::string certificate_json(const ProblemSpec& spec, const StabilityCertificate& cert) {
    using nlohmann::ordered_json;

    const GridFunction& bound = *cert.bound;
    double bmin = bound[cert.first_checked_node];
    double bmax = bmin;
    for (std::size_t i = cert.first_checked_node; i < bound.size(); ++i) {
        bmin = std::min(bmin, bound[i]);
        bmax = std::max(bmax, bound[i]);
    }

    ordered_json perturbations = ordered_json::array();
    for (const auto& p : cert.perturbations)
        perturbations.push_back({{"name", p.name}, {"max_deviation", p.max_deviation}, {"margin", p.margin}});

    ordered_json doc;
    doc["mode"] = mode_name(cert.mode);
    doc["certified"] = cert.certified;
    doc["order"] = {{"alpha", spec.order.alpha()}, {"beta", spec.order.beta()}, {"gamma", spec.order.gamma()}};
    doc["T"] = spec.T;
    doc["n"] = cert.n;
    doc["seed"] = cert.seed;
    doc["M"] = cert.M;
    doc["M_estimated"] = cert.M_estimated;
    doc["M_override"] = cert.M_override ? ordered_json(*cert.M_override) : ordered_json(nullptr);
    doc["q"] = cert.contraction_q;
    doc["bound"] = {{"kind", cert.mode == StabilityMode::hu ? "constant" : "M*phi(t)/(1-q)"},
                    {"min", bmin},
                    {"max", bmax},
                    {"at_T", bound[bound.size() - 1]}};
    doc["empirical_max_deviation"] = cert.empirical_max_deviation;
    doc["perturbations_tested"] = cert.perturbations_tested;
    doc["slack"] = cert.slack;
    doc["quadrature_error"] = cert.quadrature_error;
    doc["tol"] = cert.tol;
    doc["first_checked_node"] = cert.first_checked_node;
    doc["perturbations"] = std::move(perturbations);
    doc["warnings"] = cert.warnings;
    return doc.dump(2) + "\n";
}

}  // namespace frac::cli
