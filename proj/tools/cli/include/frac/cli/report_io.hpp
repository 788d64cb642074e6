#pragma once

#include <ostream>
#include <string>

#include "frac/solver.hpp"
#include "frac/stability.hpp"

namespace frac::cli {

/// 17 significant digits, '.' decimal point, no grouping; independent of the
/// global locale.
std::string format_double(double v);

/// CSV "t,psi_t,u0", one row per node. When gamma < 1 a comment row flags
/// node 0 as a placeholder.
void write_solution_csv(std::ostream& os, const ProblemSpec& spec, const SolveReport& report);

/// CSV "t,u0,bound,worst_deviation".
void write_certificate_csv(std::ostream& os, const StabilityCertificate& cert);

/// Certificate document; keys keep a fixed order (see docs/formats.md).
std::string certificate_json(const ProblemSpec& spec, const StabilityCertificate& cert);

}  // namespace frac::cli
