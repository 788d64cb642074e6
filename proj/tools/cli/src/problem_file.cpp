#include "frac/cli/problem_file.hpp"

#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace frac::cli {

namespace {

using nlohmann::json;

// Rejects keys outside `allowed`; the error names the full key path.
void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw InputError("schema: '" + where + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (auto a : allowed) known = known || key == a;
        if (!known) throw InputError("schema: unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
}

const json& section(const json& root, const char* name, bool required) {
    static const json empty = json::object();
    if (!root.contains(name)) {
        if (required) throw InputError(std::string("schema: missing section '") + name + "'");
        return empty;
    }
    return root.at(name);
}

double number(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) throw InputError("schema: missing key '" + where + "." + key + "'");
    const json& v = obj.at(key);
    if (!v.is_number()) throw InputError("schema: '" + where + "." + key + "' must be a number");
    return v.get<double>();
}

std::optional<double> opt_number(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) return std::nullopt;
    return number(obj, where, key);
}

std::uint64_t count(const json& obj, const std::string& where, const char* key) {
    const json& v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw InputError("schema: '" + where + "." + key + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

expr::Expr expression(const json& obj, const char* key, expr::VarSet vars) {
    const std::string where = std::string("functions.") + key;
    const json& v = obj.at(key);
    if (!v.is_string()) throw InputError("schema: '" + where + "' must be a string");
    try {
        return expr::parse(v.get<std::string>(), vars);
    } catch (const ParseError& e) {
        throw InputError(where + ": " + e.what());
    }
}

}  // namespace

ProblemFile parse_problem(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed JSON: ") + e.what());
    }
    check_keys(root, "", {"order", "domain", "functions", "constants", "solver", "verify"});

    ProblemFile pf;
    ProblemSpec& spec = pf.spec;
    try {
        const json& order = section(root, "order", true);
        check_keys(order, "order", {"alpha", "beta"});
        spec.order = FractionalOrder(number(order, "order", "alpha"), number(order, "order", "beta"));

        const json& domain = section(root, "domain", true);
        check_keys(domain, "domain", {"T", "n"});
        spec.T = number(domain, "domain", "T");
        if (!domain.contains("n")) throw InputError("schema: missing key 'domain.n'");
        spec.n = count(domain, "domain", "n");

        const json& fns = section(root, "functions", true);
        check_keys(fns, "functions", {"psi", "f", "k", "phi"});
        if (fns.contains("psi")) spec.psi = expression(fns, "psi", expr::kTimeVars);
        if (!fns.contains("f")) throw InputError("schema: missing key 'functions.f'");
        spec.f = expression(fns, "f", expr::kSourceVars);
        if (fns.contains("k")) spec.k = expression(fns, "k", expr::kKernelVars);
        if (fns.contains("phi")) spec.phi = expression(fns, "phi", expr::kTimeVars);

        const json& consts = section(root, "constants", true);
        check_keys(consts, "constants", {"sigma", "L_f", "L_k", "epsilon", "M"});
        spec.sigma = number(consts, "constants", "sigma");
        spec.L_f = number(consts, "constants", "L_f");
        spec.L_k = opt_number(consts, "constants", "L_k").value_or(0.0);
        spec.epsilon = opt_number(consts, "constants", "epsilon");
        spec.M_override = opt_number(consts, "constants", "M");

        const json& solver = section(root, "solver", false);
        check_keys(solver, "solver", {"tol", "max_iter"});
        pf.solver.tol = opt_number(solver, "solver", "tol").value_or(pf.solver.tol);
        if (solver.contains("max_iter")) pf.solver.max_iter = count(solver, "solver", "max_iter");

        const json& ver = section(root, "verify", false);
        check_keys(ver, "verify", {"num_perturbations", "seed"});
        if (ver.contains("num_perturbations")) pf.num_perturbations = count(ver, "verify", "num_perturbations");
        if (ver.contains("seed")) pf.seed = count(ver, "verify", "seed");

        spec.validate();
        if (!(pf.solver.tol > 0.0)) throw InputError("schema: 'solver.tol' must be positive");
        if (pf.solver.max_iter < 1) throw InputError("schema: 'solver.max_iter' must be at least 1");
    } catch (const InputError&) {
        throw;
    } catch (const InvalidOrder& e) {
        throw InputError(std::string("order: ") + e.what());
    } catch (const PreconditionError& e) {
        throw InputError(e.what());
    } catch (const json::exception& e) {
        throw InputError(std::string("schema: ") + e.what());
    }
    return pf;
}

ProblemFile load_problem(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_problem(buf.str());
}

}  // namespace frac::cli
