#include "frac/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>

namespace frac::expr {

std::string_view name(Var v) noexcept {
    switch (v) {
        case Var::t: return "t";
        case Var::s: return "s";
        case Var::u: return "u";
    }
    return "?";
}

std::string_view name(Func f) noexcept {
    switch (f) {
        case Func::exp: return "exp";
        case Func::log: return "log";
        case Func::sin: return "sin";
        case Func::cos: return "cos";
        case Func::sqrt: return "sqrt";
        case Func::abs: return "abs";
        case Func::pow: return "pow";
    }
    return "?";
}

std::string_view name(Constant c) noexcept {
    return c == Constant::pi ? "pi" : "e";
}

std::optional<Var> var_from_name(std::string_view s) noexcept {
    if (s == "t") return Var::t;
    if (s == "s") return Var::s;
    if (s == "u") return Var::u;
    return std::nullopt;
}

std::size_t arity(Func f) noexcept {
    return f == Func::pow ? 2 : 1;
}

std::string VarSet::to_string() const {
    std::string out = "{";
    for (Var v : {Var::t, Var::s, Var::u}) {
        if (!contains(v)) continue;
        if (out.size() > 1) out += ",";
        out += name(v);
    }
    return out + "}";
}

// ---------------------------------------------------------------------------
// Arithmetic shared by the tree walker and the compiled form
// ---------------------------------------------------------------------------

namespace {

double constant_value(Constant c) {
    return c == Constant::pi ? std::numbers::pi : std::numbers::e;
}

[[noreturn]] void fail(const char* reason, const Node& origin) {
    throw EvalError(reason, to_string(origin));
}

double checked(double r, const char* reason, const Node& origin) {
    if (!std::isfinite(r)) fail(reason, origin);
    return r;
}

double apply_binary(BinaryOp op, double a, double b, const Node& origin) {
    switch (op) {
        case BinaryOp::add: return checked(a + b, "non-finite result", origin);
        case BinaryOp::sub: return checked(a - b, "non-finite result", origin);
        case BinaryOp::mul: return checked(a * b, "non-finite result", origin);
        case BinaryOp::div:
            if (b == 0.0) fail("division by zero", origin);
            return checked(a / b, "non-finite result", origin);
        case BinaryOp::pow: return checked(std::pow(a, b), "pow domain error", origin);
    }
    fail("bad operator", origin);
}

double apply_unary_func(Func f, double x, const Node& origin) {
    switch (f) {
        case Func::exp: return checked(std::exp(x), "exp overflow", origin);
        case Func::log:
            if (!(x > 0.0)) fail("log of non-positive value", origin);
            return std::log(x);
        case Func::sin: return checked(std::sin(x), "non-finite result", origin);
        case Func::cos: return checked(std::cos(x), "non-finite result", origin);
        case Func::sqrt:
            if (x < 0.0) fail("sqrt of negative value", origin);
            return std::sqrt(x);
        case Func::abs: return std::abs(x);
        case Func::pow: break;
    }
    fail("bad function arity", origin);
}

double eval_node(const Node& node, const Bindings& b) {
    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Number>) {
                return k.value;
            } else if constexpr (std::is_same_v<K, Variable>) {
                return b[k.var];
            } else if constexpr (std::is_same_v<K, NamedConstant>) {
                return constant_value(k.which);
            } else if constexpr (std::is_same_v<K, Negate>) {
                return -eval_node(*k.operand, b);
            } else if constexpr (std::is_same_v<K, Binary>) {
                const double lhs = eval_node(*k.lhs, b);
                const double rhs = eval_node(*k.rhs, b);
                return apply_binary(k.op, lhs, rhs, node);
            } else {
                if (k.func == Func::pow) {
                    const double x = eval_node(*k.args[0], b);
                    const double y = eval_node(*k.args[1], b);
                    return apply_binary(BinaryOp::pow, x, y, node);
                }
                return apply_unary_func(k.func, eval_node(*k.args[0], b), node);
            }
        },
        node.kind);
}

void collect_vars(const Node& node, VarSet& out) {
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Variable>) {
                out.insert(k.var);
            } else if constexpr (std::is_same_v<K, Negate>) {
                collect_vars(*k.operand, out);
            } else if constexpr (std::is_same_v<K, Binary>) {
                collect_vars(*k.lhs, out);
                collect_vars(*k.rhs, out);
            } else if constexpr (std::is_same_v<K, Call>) {
                for (const auto& a : k.args) collect_vars(*a, out);
            }
        },
        node.kind);
}

bool equal_nodes(const Node& a, const Node& b) {
    if (a.kind.index() != b.kind.index()) return false;
    return std::visit(
        [&](const auto& ka) -> bool {
            using K = std::decay_t<decltype(ka)>;
            const auto& kb = std::get<K>(b.kind);
            if constexpr (std::is_same_v<K, Number>) {
                return ka.value == kb.value;
            } else if constexpr (std::is_same_v<K, Variable>) {
                return ka.var == kb.var;
            } else if constexpr (std::is_same_v<K, NamedConstant>) {
                return ka.which == kb.which;
            } else if constexpr (std::is_same_v<K, Negate>) {
                return equal_nodes(*ka.operand, *kb.operand);
            } else if constexpr (std::is_same_v<K, Binary>) {
                return ka.op == kb.op && equal_nodes(*ka.lhs, *kb.lhs) && equal_nodes(*ka.rhs, *kb.rhs);
            } else {
                if (ka.func != kb.func || ka.args.size() != kb.args.size()) return false;
                for (std::size_t i = 0; i < ka.args.size(); ++i)
                    if (!equal_nodes(*ka.args[i], *kb.args[i])) return false;
                return true;
            }
        },
        a.kind);
}

// Printing precedence: higher binds tighter.
enum Prec : int { kAdd = 1, kMul = 2, kUnary = 3, kPow = 4, kAtom = 5 };

int precedence(const Node& node) {
    if (const auto* bin = std::get_if<Binary>(&node.kind)) {
        switch (bin->op) {
            case BinaryOp::add:
            case BinaryOp::sub: return kAdd;
            case BinaryOp::mul:
            case BinaryOp::div: return kMul;
            case BinaryOp::pow: return kPow;
        }
    }
    if (std::holds_alternative<Negate>(node.kind)) return kUnary;
    return kAtom;
}

void print(const Node& node, std::string& out);

void print_wrapped(const Node& node, bool parens, std::string& out) {
    if (parens) out += '(';
    print(node, out);
    if (parens) out += ')';
}

void print_number(double v, std::string& out) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.append(buf.data(), end);
}

void print(const Node& node, std::string& out) {
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Number>) {
                print_number(k.value, out);
            } else if constexpr (std::is_same_v<K, Variable>) {
                out += name(k.var);
            } else if constexpr (std::is_same_v<K, NamedConstant>) {
                out += name(k.which);
            } else if constexpr (std::is_same_v<K, Negate>) {
                out += '-';
                print_wrapped(*k.operand, precedence(*k.operand) < kUnary, out);
            } else if constexpr (std::is_same_v<K, Binary>) {
                const int p = precedence(node);
                if (k.op == BinaryOp::pow) {
                    // lhs is a primary; rhs is a unary
                    print_wrapped(*k.lhs, precedence(*k.lhs) <= kPow, out);
                    out += '^';
                    print_wrapped(*k.rhs, precedence(*k.rhs) < kUnary, out);
                    return;
                }
                print_wrapped(*k.lhs, precedence(*k.lhs) < p, out);
                switch (k.op) {
                    case BinaryOp::add: out += " + "; break;
                    case BinaryOp::sub: out += " - "; break;
                    case BinaryOp::mul: out += '*'; break;
                    case BinaryOp::div: out += '/'; break;
                    case BinaryOp::pow: break;
                }
                print_wrapped(*k.rhs, precedence(*k.rhs) <= p, out);
            } else {
                out += name(k.func);
                out += '(';
                for (std::size_t i = 0; i < k.args.size(); ++i) {
                    if (i > 0) out += ", ";
                    print(*k.args[i], out);
                }
                out += ')';
            }
        },
        node.kind);
}

NodePtr make(Node n) {
    return std::make_shared<const Node>(std::move(n));
}

}  // namespace

std::string to_string(const Node& node) {
    std::string out;
    print(node, out);
    return out;
}

// ---------------------------------------------------------------------------
// Expr
// ---------------------------------------------------------------------------

Expr::Expr() : root_(make(Node{Number{0.0}})) {}

Expr Expr::number(double value) {
    if (!std::isfinite(value)) throw PreconditionError("numeric literal must be finite");
    return Expr(make(Node{Number{value}}));
}

Expr Expr::variable(Var v) {
    return Expr(make(Node{Variable{v}}));
}

Expr Expr::constant(Constant c) {
    return Expr(make(Node{NamedConstant{c}}));
}

Expr Expr::negate(const Expr& operand) {
    return Expr(make(Node{Negate{operand.root_}}));
}

Expr Expr::binary(BinaryOp op, const Expr& lhs, const Expr& rhs) {
    return Expr(make(Node{Binary{op, lhs.root_, rhs.root_}}));
}

Expr Expr::call(Func f, const std::vector<Expr>& args) {
    if (args.size() != arity(f))
        throw PreconditionError(std::string(name(f)) + " expects " + std::to_string(arity(f)) + " argument(s)");
    std::vector<NodePtr> nodes;
    nodes.reserve(args.size());
    for (const auto& a : args) nodes.push_back(a.root_);
    return Expr(make(Node{Call{f, std::move(nodes)}}));
}

double Expr::evaluate(const Bindings& b) const {
    return eval_node(*root_, b);
}

VarSet Expr::free_variables() const {
    VarSet vs;
    collect_vars(*root_, vs);
    return vs;
}

std::string Expr::to_string() const {
    return expr::to_string(*root_);
}

bool Expr::operator==(const Expr& other) const {
    return equal_nodes(*root_, *other.root_);
}

double eval(const Expr& e, const std::map<std::string, double, std::less<>>& bindings) {
    Bindings b;
    const VarSet free = e.free_variables();
    for (Var v : {Var::t, Var::s, Var::u}) {
        if (!free.contains(v)) continue;
        auto it = bindings.find(name(v));
        if (it == bindings.end()) throw UnboundVariable(std::string(name(v)));
        switch (v) {
            case Var::t: b.t = it->second; break;
            case Var::s: b.s = it->second; break;
            case Var::u: b.u = it->second; break;
        }
    }
    return e.evaluate(b);
}

// ---------------------------------------------------------------------------
// CompiledExpr
// ---------------------------------------------------------------------------

CompiledExpr::CompiledExpr(const Expr& e) : source_(e), constant_(e.is_constant()) {
    emit(e.root_ptr());
    std::size_t depth = 0;
    for (const auto& in : code_) {
        switch (in.op) {
            case Op::push:
            case Op::load: ++depth; break;
            case Op::add:
            case Op::sub:
            case Op::mul:
            case Op::div:
            case Op::pow: --depth; break;
            default: break;
        }
        max_depth_ = std::max(max_depth_, depth);
    }
}

void CompiledExpr::emit(const NodePtr& node) {
    const Node* origin = node.get();
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Number>) {
                code_.push_back({Op::push, Var::t, k.value, origin});
            } else if constexpr (std::is_same_v<K, Variable>) {
                code_.push_back({Op::load, k.var, 0.0, origin});
            } else if constexpr (std::is_same_v<K, NamedConstant>) {
                code_.push_back({Op::push, Var::t, constant_value(k.which), origin});
            } else if constexpr (std::is_same_v<K, Negate>) {
                emit(k.operand);
                code_.push_back({Op::neg, Var::t, 0.0, origin});
            } else if constexpr (std::is_same_v<K, Binary>) {
                emit(k.lhs);
                emit(k.rhs);
                static constexpr std::array<Op, 5> ops{Op::add, Op::sub, Op::mul, Op::div, Op::pow};
                code_.push_back({ops[static_cast<std::size_t>(k.op)], Var::t, 0.0, origin});
            } else {
                for (const auto& a : k.args) emit(a);
                static constexpr std::array<Op, 7> ops{Op::exp, Op::log, Op::sin, Op::cos,
                                                       Op::sqrt, Op::abs, Op::pow};
                code_.push_back({ops[static_cast<std::size_t>(k.func)], Var::t, 0.0, origin});
            }
        },
        node->kind);
}

double CompiledExpr::operator()(const Bindings& b) const {
    std::array<double, 32> small{};
    std::vector<double> large;
    double* stack = small.data();
    if (max_depth_ > small.size()) {
        large.resize(max_depth_);
        stack = large.data();
    }
    std::size_t sp = 0;
    for (const auto& in : code_) {
        switch (in.op) {
            case Op::push: stack[sp++] = in.value; break;
            case Op::load: stack[sp++] = b[in.var]; break;
            case Op::neg: stack[sp - 1] = -stack[sp - 1]; break;
            case Op::add:
            case Op::sub:
            case Op::mul:
            case Op::div:
            case Op::pow: {
                static constexpr std::array<BinaryOp, 5> bops{BinaryOp::add, BinaryOp::sub, BinaryOp::mul,
                                                              BinaryOp::div, BinaryOp::pow};
                const auto idx = static_cast<std::size_t>(in.op) - static_cast<std::size_t>(Op::add);
                const double rhs = stack[--sp];
                stack[sp - 1] = apply_binary(bops[idx], stack[sp - 1], rhs, *in.origin);
                break;
            }
            case Op::exp: stack[sp - 1] = apply_unary_func(Func::exp, stack[sp - 1], *in.origin); break;
            case Op::log: stack[sp - 1] = apply_unary_func(Func::log, stack[sp - 1], *in.origin); break;
            case Op::sin: stack[sp - 1] = apply_unary_func(Func::sin, stack[sp - 1], *in.origin); break;
            case Op::cos: stack[sp - 1] = apply_unary_func(Func::cos, stack[sp - 1], *in.origin); break;
            case Op::sqrt: stack[sp - 1] = apply_unary_func(Func::sqrt, stack[sp - 1], *in.origin); break;
            case Op::abs: stack[sp - 1] = apply_unary_func(Func::abs, stack[sp - 1], *in.origin); break;
        }
    }
    return stack[0];
}

}  // namespace frac::expr
