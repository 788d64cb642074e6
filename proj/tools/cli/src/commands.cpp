#include "frac/cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <functional>

#include "CLI11.hpp"
#include "frac/cli/problem_file.hpp"
#include "frac/cli/report_io.hpp"
#include "frac/stability.hpp"

namespace frac::cli {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot write output file '" + path.string() + "'");
    return os;
}

ProblemFile load_with_overrides(const CommandOptions& opts) {
    ProblemFile pf = load_problem(opts.config);
    if (opts.seed) pf.seed = *opts.seed;
    if (opts.n) {
        pf.spec.n = *opts.n;
        if (pf.spec.n < 2) throw InputError("--n must be at least 2");
    }
    return pf;
}

// Runs `body`, translating library errors into exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const HypothesisFailure& e) {
        err << "hypothesis failure: " << e.what() << '\n';
        return kHypothesisFailure;
    } catch (const NonContractive& e) {
        err << "non-contractive: " << e.what() << '\n';
        return kHypothesisFailure;
    } catch (const EvalError& e) {
        err << "evaluation error: " << e.what() << '\n';
        return kEvaluationError;
    } catch (const PreconditionError& e) {
        err << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const InvalidOrder& e) {
        err << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const DegenerateGrid& e) {
        err << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const NonpositivePhi& e) {
        err << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kEvaluationError;
    }
}

}  // namespace

std::filesystem::path companion_csv_path(const std::filesystem::path& json_path) {
    if (json_path.extension() == ".json") {
        std::filesystem::path p = json_path;
        return p.replace_extension(".csv");
    }
    return std::filesystem::path(json_path.string() + ".csv");
}

int cmd_solve(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ProblemFile pf = load_with_overrides(opts);
        const SolveReport rep = solve(pf.spec, pf.solver);
        {
            std::ofstream os = open_output(opts.out);
            write_solution_csv(os, pf.spec, rep);
        }
        out << "iterations: " << rep.iterations << '\n'
            << "final_residual: " << format_double(rep.residual_trace.back()) << '\n'
            << "converged: " << (rep.converged ? "true" : "false") << '\n';
        if (!rep.converged) {
            err << "no convergence within max_iter = " << pf.solver.max_iter << '\n';
            return static_cast<int>(kHypothesisFailure);
        }
        return static_cast<int>(kOk);
    });
}

int cmd_verify(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ProblemFile pf = load_with_overrides(opts);
        if (pf.spec.mode() == StabilityMode::none)
            throw InputError("verify needs functions.phi (HUR) or constants.epsilon (HU)");
        const StabilityCertificate cert = verify(pf.spec, pf.num_perturbations, pf.seed, {pf.solver});
        {
            std::ofstream os = open_output(opts.out);
            os << certificate_json(pf.spec, cert);
        }
        {
            std::ofstream os = open_output(companion_csv_path(opts.out));
            write_certificate_csv(os, cert);
        }
        out << "certified: " << (cert.certified ? "true" : "false") << '\n'
            << "q: " << format_double(cert.contraction_q) << '\n'
            << "empirical_max_deviation: " << format_double(cert.empirical_max_deviation) << '\n'
            << "perturbations_tested: " << cert.perturbations_tested << '\n';
        for (const auto& w : cert.warnings) err << "warning: " << w << '\n';
        return static_cast<int>(cert.certified ? kOk : kNotCertified);
    });
}

namespace {

// Applies one sweep value; returns an error message for illegal values.
std::optional<std::string> apply_param(ProblemSpec& spec, const std::string& param, double v) {
    if (!std::isfinite(v)) return "value is not finite";
    if (param == "alpha") {
        if (!(v > 0.0 && v < 1.0)) return "alpha must lie in (0,1)";
        spec.order = FractionalOrder(v, spec.order.beta());
    } else if (param == "beta") {
        if (!(v >= 0.0 && v <= 1.0)) return "beta must lie in [0,1]";
        spec.order = FractionalOrder(spec.order.alpha(), v);
    } else if (param == "T") {
        if (!(v > 0.0)) return "T must be positive";
        spec.T = v;
    } else if (param == "epsilon") {
        if (!spec.epsilon) return "epsilon sweeps need a Hyers-Ulam problem";
        if (!(v >= 0.0)) return "epsilon must be nonnegative";
        spec.epsilon = v;
    } else if (param == "n") {
        if (!(v >= 2.0) || v != std::floor(v) || v > 1e7) return "n must be an integer >= 2";
        spec.n = static_cast<std::size_t>(v);
    }
    return std::nullopt;
}

}  // namespace

int cmd_sweep(const CommandOptions& opts, const std::string& param, const std::vector<double>& values,
              std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (param != "alpha" && param != "beta" && param != "T" && param != "epsilon" && param != "n")
            throw InputError("unknown sweep parameter '" + param + "' (expected alpha, beta, T, epsilon or n)");
        if (values.empty()) throw InputError("sweep needs at least one value");
        const ProblemFile base = load_with_overrides(opts);
        if (base.spec.mode() == StabilityMode::none)
            throw InputError("sweep needs functions.phi (HUR) or constants.epsilon (HU)");

        std::ofstream os = open_output(opts.out);
        os << "param_value,M,q,bound_max,empirical_max,certified,status\n";
        for (const double v : values) {
            ProblemSpec spec = base.spec;
            std::string M, q, bound_max, empirical, certified = "false", status;
            try {
                if (auto bad = apply_param(spec, param, v)) {
                    status = "illegal_value";
                    err << "sweep " << param << " = " << format_double(v) << ": " << *bad << '\n';
                } else {
                    const QuadraturePlan plan = QuadraturePlan::build(spec.order.alpha(), spec.make_grid());
                    const StabilityConstants sc = stability_constants(spec, plan);
                    M = format_double(sc.M);
                    q = format_double(sc.q);
                    const StabilityCertificate cert = verify(spec, base.num_perturbations, base.seed, {base.solver});
                    double bmax = 0.0;
                    for (std::size_t i = cert.first_checked_node; i < cert.bound->size(); ++i)
                        bmax = std::max(bmax, (*cert.bound)[i]);
                    bound_max = format_double(bmax);
                    empirical = format_double(cert.empirical_max_deviation);
                    certified = cert.certified ? "true" : "false";
                    status = cert.certified ? "certified" : "not_certified";
                }
            } catch (const HypothesisFailure& e) {
                status = "hypothesis_failed";
                err << "sweep " << param << " = " << format_double(v) << ": " << e.what() << '\n';
            } catch (const NonContractive& e) {
                status = "non_contractive";
                err << "sweep " << param << " = " << format_double(v) << ": " << e.what() << '\n';
            } catch (const EvalError& e) {
                status = "evaluation_error";
                err << "sweep " << param << " = " << format_double(v) << ": " << e.what() << '\n';
            } catch (const Error& e) {
                status = "illegal_value";
                err << "sweep " << param << " = " << format_double(v) << ": " << e.what() << '\n';
            }
            os << format_double(v) << ',' << M << ',' << q << ',' << bound_max << ',' << empirical << ','
               << certified << ',' << status << '\n';
        }
        out << "rows: " << values.size() << '\n';
        return static_cast<int>(kOk);
    });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Solve psi-Hilfer fractional Volterra integro-differential equations and certify Ulam stability"};
    app.name("frac");
    app.require_subcommand(1);

    CommandOptions opts;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::string param;
    std::vector<double> values;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config, "Problem file (JSON)")->required();
        sub->add_option("--out", opts.out, "Output path")->required();
        sub->add_option("--seed", seed, "Override verify.seed");
        sub->add_option("--n", n, "Override domain.n");
    };
    CLI::App* solve_cmd = app.add_subcommand("solve", "Picard solve; writes t,psi_t,u0 CSV");
    CLI::App* verify_cmd = app.add_subcommand("verify", "Stability certificate (JSON) plus grid CSV");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Repeat verify over a parameter list");
    common(solve_cmd);
    common(verify_cmd);
    common(sweep_cmd);
    sweep_cmd->add_option("--param", param, "alpha | beta | T | epsilon | n")->required();
    sweep_cmd->add_option("--values", values, "Comma-separated parameter values")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "input error: " << e.what() << '\n';
        return kInputError;
    }

    for (CLI::App* sub : {solve_cmd, verify_cmd, sweep_cmd}) {
        if (sub->count("--seed") > 0) opts.seed = seed;
        if (sub->count("--n") > 0) opts.n = n;
    }

    if (solve_cmd->parsed()) return cmd_solve(opts, out, err);
    if (verify_cmd->parsed()) return cmd_verify(opts, out, err);
    return cmd_sweep(opts, param, values, out, err);
}

}  // namespace frac::cli
