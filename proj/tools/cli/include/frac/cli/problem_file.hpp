#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "frac/errors.hpp"
#include "frac/solver.hpp"

namespace frac::cli {

/// Bad command line, unreadable file, malformed JSON, schema violation or an
/// expression that does not parse. Maps to exit code 1.
class InputError : public Error {
public:
    using Error::Error;
};

/// A parsed problem document.
///
///     {
///       "order":     {"alpha": 0.5, "beta": 1.0},
///       "domain":    {"T": 1.0, "n": 513},
///       "functions": {"psi": "t", "f": "-u/2", "k": "0", "phi": "exp(t)"},
///       "constants": {"sigma": 1.0, "L_f": 0.5, "L_k": 0.0, "epsilon": 0.01, "M": 1.2},
///       "solver":    {"tol": 1e-10, "max_iter": 200},
///       "verify":    {"num_perturbations": 20, "seed": 42}
///     }
///
/// psi defaults to "t"; k, phi, epsilon, M, L_k, solver and verify are
/// optional. Unknown keys are rejected.
struct ProblemFile {
    ProblemSpec spec;
    SolveOptions solver;
    std::size_t num_perturbations = 20;
    std::uint64_t seed = 0;
};

ProblemFile parse_problem(const std::string& json_text);
ProblemFile load_problem(const std::filesystem::path& path);

}  // namespace frac::cli
