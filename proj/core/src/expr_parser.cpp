#include <cctype>
#include <charconv>
#include <cmath>

#include "frac/expr.hpp"

namespace frac::expr {

namespace {

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end };

struct Token {
    Tok kind;
    std::string_view text;
    SourcePos pos;
    double value = 0.0;
};

std::string describe(const Token& t) {
    if (t.kind == Tok::end) return "end of input";
    return "'" + std::string(t.text) + "'";
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space();
        const SourcePos pos = here();
        if (i_ >= src_.size()) return {Tok::end, {}, pos};

        const char c = src_[i_];
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i_ + 1 < src_.size() &&
                                                            std::isdigit(static_cast<unsigned char>(src_[i_ + 1]))))
            return number(pos);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident(pos);

        Tok kind;
        switch (c) {
            case '+': kind = Tok::plus; break;
            case '-': kind = Tok::minus; break;
            case '*': kind = Tok::star; break;
            case '/': kind = Tok::slash; break;
            case '^': kind = Tok::caret; break;
            case '(': kind = Tok::lparen; break;
            case ')': kind = Tok::rparen; break;
            case ',': kind = Tok::comma; break;
            default:
                throw SyntaxError("unexpected character '" + std::string(1, c) + "'", pos);
        }
        advance();
        return {kind, src_.substr(i_ - 1, 1), pos};
    }

private:
    SourcePos here() const { return {line_, col_}; }

    void advance() {
        if (src_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }

    void skip_space() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) advance();
    }

    bool digit_at(std::size_t k) const {
        return k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]));
    }

    Token number(SourcePos pos) {
        const std::size_t start = i_;
        while (digit_at(i_)) advance();
        if (i_ < src_.size() && src_[i_] == '.') {
            advance();
            while (digit_at(i_)) advance();
        }
        // Exponent only if digits follow; otherwise 'e' starts the next token.
        if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
            std::size_t k = i_ + 1;
            if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
            if (digit_at(k)) {
                while (i_ < k) advance();
                while (digit_at(i_)) advance();
            }
        }
        const std::string_view text = src_.substr(start, i_ - start);
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value))
            throw SyntaxError("invalid numeric literal '" + std::string(text) + "'", pos);
        return {Tok::number, text, pos, value};
    }

    Token ident(SourcePos pos) {
        const std::size_t start = i_;
        while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) advance();
        return {Tok::ident, src_.substr(start, i_ - start), pos};
    }

    std::string_view src_;
    std::size_t i_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

std::optional<Func> func_from_name(std::string_view s) {
    for (Func f : {Func::exp, Func::log, Func::sin, Func::cos, Func::sqrt, Func::abs, Func::pow})
        if (name(f) == s) return f;
    return std::nullopt;
}

}  // namespace

/// Recursive-descent parser over the token stream.
class Parser {
public:
    Parser(std::string_view src, VarSet allowed) : lex_(src), allowed_(allowed) { cur_ = lex_.next(); }

    Expr parse_all() {
        Expr e = expression();
        if (cur_.kind != Tok::end) throw SyntaxError("expected operator or end of input, found " + describe(cur_), cur_.pos);
        return e;
    }

private:
    void bump() { cur_ = lex_.next(); }

    void expect(Tok kind, const char* what) {
        if (cur_.kind != kind) throw SyntaxError(std::string("expected ") + what + ", found " + describe(cur_), cur_.pos);
        bump();
    }

    Expr expression() {
        Expr lhs = term();
        while (cur_.kind == Tok::plus || cur_.kind == Tok::minus) {
            const BinaryOp op = cur_.kind == Tok::plus ? BinaryOp::add : BinaryOp::sub;
            bump();
            lhs = Expr::binary(op, lhs, term());
        }
        return lhs;
    }

    Expr term() {
        Expr lhs = unary();
        while (cur_.kind == Tok::star || cur_.kind == Tok::slash) {
            const BinaryOp op = cur_.kind == Tok::star ? BinaryOp::mul : BinaryOp::div;
            bump();
            lhs = Expr::binary(op, lhs, unary());
        }
        return lhs;
    }

    Expr unary() {
        if (cur_.kind == Tok::minus) {
            bump();
            return Expr::negate(unary());
        }
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (cur_.kind == Tok::caret) {
            bump();
            return Expr::binary(BinaryOp::pow, base, unary());
        }
        return base;
    }

    Expr primary() {
        const Token tok = cur_;
        switch (tok.kind) {
            case Tok::number:
                bump();
                return Expr::number(tok.value);
            case Tok::lparen: {
                bump();
                Expr inner = expression();
                expect(Tok::rparen, "')'");
                return inner;
            }
            case Tok::ident:
                bump();
                if (cur_.kind == Tok::lparen) return call(tok);
                if (tok.text == "pi") return Expr::constant(Constant::pi);
                if (tok.text == "e") return Expr::constant(Constant::e);
                if (auto v = var_from_name(tok.text); v && allowed_.contains(*v)) return Expr::variable(*v);
                throw UnknownVariable(std::string(tok.text), tok.pos);
            default:
                throw SyntaxError("expected operand, found " + describe(tok), tok.pos);
        }
    }

    Expr call(const Token& fname) {
        const auto f = func_from_name(fname.text);
        if (!f) throw UnknownFunction(std::string(fname.text), fname.pos);
        bump();  // '('
        std::vector<Expr> args;
        args.push_back(expression());
        while (cur_.kind == Tok::comma) {
            bump();
            args.push_back(expression());
        }
        expect(Tok::rparen, "',' or ')'");
        if (args.size() != arity(*f))
            throw SyntaxError(std::string(name(*f)) + " expects " + std::to_string(arity(*f)) + " argument(s), got " +
                                  std::to_string(args.size()),
                              fname.pos);
        return Expr::call(*f, args);
    }

    Lexer lex_;
    VarSet allowed_;
    Token cur_{Tok::end, {}, {}};
};

Expr parse(std::string_view source, VarSet allowed) {
    return Parser(source, allowed).parse_all();
}

}  // namespace frac::expr
