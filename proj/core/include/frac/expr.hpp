#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "frac/errors.hpp"

/// Scalar expression language for problem data: f(t,u), k(t,s,u), psi(t), phi(t).
///
/// Grammar (EBNF, see docs/grammar.md):
///
///     expr    = term { ("+" | "-") term } ;
///     term    = unary { ("*" | "/") unary } ;
///     unary   = "-" unary | power ;
///     power   = primary [ "^" unary ] ;
///     primary = number | constant | variable | call | "(" expr ")" ;
///     call    = function "(" expr { "," expr } ")" ;
///
/// so "^" binds tighter than unary minus, which binds tighter than "*" and "/".
/// "^" is right-associative; every other binary operator is left-associative.
namespace frac::expr {

enum class Var : std::uint8_t { t = 0, s = 1, u = 2 };
enum class BinaryOp : std::uint8_t { add, sub, mul, div, pow };
enum class Func : std::uint8_t { exp, log, sin, cos, sqrt, abs, pow };
enum class Constant : std::uint8_t { pi, e };

std::string_view name(Var v) noexcept;
std::string_view name(Func f) noexcept;
std::string_view name(Constant c) noexcept;
std::optional<Var> var_from_name(std::string_view s) noexcept;
std::size_t arity(Func f) noexcept;

/// Small set over {t, s, u}.
class VarSet {
public:
    constexpr VarSet() = default;
    constexpr VarSet(std::initializer_list<Var> vars) {
        for (Var v : vars) bits_ |= bit(v);
    }

    constexpr bool contains(Var v) const noexcept { return (bits_ & bit(v)) != 0; }
    constexpr void insert(Var v) noexcept { bits_ |= bit(v); }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    constexpr bool subset_of(VarSet other) const noexcept { return (bits_ & ~other.bits_) == 0; }
    constexpr VarSet operator|(VarSet o) const noexcept {
        VarSet r;
        r.bits_ = bits_ | o.bits_;
        return r;
    }
    constexpr bool operator==(const VarSet&) const = default;

    std::string to_string() const;

private:
    static constexpr std::uint8_t bit(Var v) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(v)); }
    std::uint8_t bits_ = 0;
};

/// Binding contexts of the problem data.
inline constexpr VarSet kTimeVars{Var::t};                  // psi(t), phi(t), perturbations
inline constexpr VarSet kSourceVars{Var::t, Var::u};        // f(t,u)
inline constexpr VarSet kKernelVars{Var::t, Var::s, Var::u};  // k(t,s,u)

/// Values for the three variable slots.
struct Bindings {
    double t = 0.0;
    double s = 0.0;
    double u = 0.0;

    double operator[](Var v) const noexcept {
        switch (v) {
            case Var::t: return t;
            case Var::s: return s;
            case Var::u: return u;
        }
        return 0.0;
    }
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number {
    double value;
};
struct Variable {
    Var var;
};
struct NamedConstant {
    Constant which;
};
struct Negate {
    NodePtr operand;
};
struct Binary {
    BinaryOp op;
    NodePtr lhs;
    NodePtr rhs;
};
struct Call {
    Func func;
    std::vector<NodePtr> args;
};

struct Node {
    std::variant<Number, Variable, NamedConstant, Negate, Binary, Call> kind;
};

/// Immutable expression tree. Cheap to copy; safe to share across threads.
class Expr {
public:
    /// The literal 0.
    Expr();

    static Expr number(double value);
    static Expr variable(Var v);
    static Expr constant(Constant c);
    static Expr negate(const Expr& operand);
    static Expr binary(BinaryOp op, const Expr& lhs, const Expr& rhs);
    static Expr call(Func f, const std::vector<Expr>& args);

    const Node& root() const noexcept { return *root_; }
    const NodePtr& root_ptr() const noexcept { return root_; }

    /// Evaluates with IEEE-754 doubles. Throws EvalError on domain violations
    /// (division by zero, log of a non-positive value, any non-finite result).
    double evaluate(const Bindings& b) const;

    VarSet free_variables() const;

    /// True when the tree contains no variables.
    bool is_constant() const { return free_variables().empty(); }

    /// Infix text with minimal parentheses; parse(to_string()) reproduces the tree.
    std::string to_string() const;

    /// Structural equality, literals compared exactly.
    bool operator==(const Expr& other) const;

private:
    explicit Expr(NodePtr root) : root_(std::move(root)) {}
    NodePtr root_;

    friend class Parser;
};

/// Parses `source`. Variables outside `allowed` raise UnknownVariable.
Expr parse(std::string_view source, VarSet allowed);

/// Evaluates with named bindings; names other than t, s, u are ignored.
/// Throws UnboundVariable if a free variable of `e` has no binding.
double eval(const Expr& e, const std::map<std::string, double, std::less<>>& bindings);

/// Pretty-prints any subtree.
std::string to_string(const Node& node);

/// Flattened postfix form of an Expr for hot loops. Produces results bitwise
/// identical to Expr::evaluate.
class CompiledExpr {
public:
    explicit CompiledExpr(const Expr& e);

    double operator()(const Bindings& b) const;
    double operator()(double t, double s, double u) const { return (*this)(Bindings{t, s, u}); }

    bool is_constant() const noexcept { return constant_; }

private:
    enum class Op : std::uint8_t { push, load, neg, add, sub, mul, div, pow, exp, log, sin, cos, sqrt, abs };
    struct Instr {
        Op op;
        Var var = Var::t;
        double value = 0.0;
        const Node* origin = nullptr;
    };

    void emit(const NodePtr& node);

    Expr source_;  // keeps origin pointers alive
    std::vector<Instr> code_;
    std::size_t max_depth_ = 0;
    bool constant_ = false;
};

}  // namespace frac::expr
