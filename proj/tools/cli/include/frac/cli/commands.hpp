#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace frac::cli {

/// Stable process exit codes.
enum ExitCode : int {
    kOk = 0,                 // converged / certified
    kInputError = 1,         // bad arguments, file, schema or expression
    kHypothesisFailure = 2,  // q >= 1, degenerate denominator, divergence
    kNotCertified = 3,       // verify ran but a margin exceeded the slack
    kEvaluationError = 4,    // expression domain error during the run
};

struct CommandOptions {
    std::filesystem::path config;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
};

int cmd_solve(const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// Writes the certificate JSON to opts.out and the grid data next to it
/// (see companion_csv_path).
int cmd_verify(const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// One verify run per value of `param` (alpha, beta, T, epsilon or n); long
/// format CSV in input order. Illegal values produce a row with a status
/// message and the sweep continues.
int cmd_sweep(const CommandOptions& opts, const std::string& param, const std::vector<double>& values,
              std::ostream& out, std::ostream& err);

/// "cert.json" -> "cert.csv"; any other name gets ".csv" appended.
std::filesystem::path companion_csv_path(const std::filesystem::path& json_path);

/// Entry point behind the `frac` executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace frac::cli
