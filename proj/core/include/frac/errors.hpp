#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace frac {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Violated operation precondition (bad counts, missing mode data, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Expression language
// ---------------------------------------------------------------------------

/// Source location, 1-based.
struct SourcePos {
    std::size_t line = 1;
    std::size_t column = 1;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, SourcePos pos)
        : Error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + what),
          pos_(pos) {}

    SourcePos pos() const noexcept { return pos_; }

private:
    SourcePos pos_;
};

class SyntaxError : public ParseError {
public:
    using ParseError::ParseError;
};

class UnknownVariable : public ParseError {
public:
    UnknownVariable(const std::string& name, SourcePos pos)
        : ParseError("unknown variable '" + name + "'", pos), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class UnknownFunction : public ParseError {
public:
    UnknownFunction(const std::string& name, SourcePos pos)
        : ParseError("unknown function '" + name + "'", pos), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class UnboundVariable : public Error {
public:
    explicit UnboundVariable(const std::string& name)
        : Error("unbound variable '" + name + "'"), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Domain violation during evaluation; carries the offending subexpression.
class EvalError : public Error {
public:
    EvalError(const std::string& reason, std::string subexpr)
        : Error(reason + " in '" + subexpr + "'"), subexpr_(std::move(subexpr)) {}
    const std::string& subexpression() const noexcept { return subexpr_; }

private:
    std::string subexpr_;
};

// ---------------------------------------------------------------------------
// Fractional calculus
// ---------------------------------------------------------------------------

class InvalidOrder : public Error {
public:
    using Error::Error;
};

class DegenerateGrid : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    GridMismatch() : Error("grid function does not live on the expected grid") {}
};

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

class SingularPrefactor : public Error {
public:
    using Error::Error;
};

/// Picard iteration diverged. The residual trace is preserved for diagnosis.
class NonContractive : public Error {
public:
    NonContractive(const std::string& what, std::vector<double> trace)
        : Error(what), trace_(std::move(trace)) {}
    const std::vector<double>& residual_trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

// ---------------------------------------------------------------------------
// Stability
// ---------------------------------------------------------------------------

/// Base for failures of the stability hypotheses; no certificate is possible.
class HypothesisFailure : public Error {
public:
    using Error::Error;
};

class ContractionViolated : public HypothesisFailure {
public:
    using HypothesisFailure::HypothesisFailure;
};

class DegenerateDenominator : public HypothesisFailure {
public:
    using HypothesisFailure::HypothesisFailure;
};

class NonpositivePhi : public Error {
public:
    using Error::Error;
};

class InadmissiblePerturbation : public Error {
public:
    using Error::Error;
};

}  // namespace frac
