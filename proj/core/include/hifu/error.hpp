#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hifu {

/// Base class of every error raised by the simulator.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed input text; `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line);
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that violates a contract; `field()` names the offender.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what);
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// An iterative procedure stopped without meeting its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual, int iterations);
    [[nodiscard]] double residual() const noexcept { return residual_; }
    [[nodiscard]] int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

/// A truncated series or quadrature could not guarantee its accuracy.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double estimate);
    [[nodiscard]] double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

/// A coefficient that must stay positive (q, b, 1 - 2kp) did not.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// A system matrix that must be positive definite is not.
class DefinitenessError : public Error {
public:
    using Error::Error;
};

/// Request exceeds the memory budget.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// Operation not supported for this variant (e.g. evaluating a Dirac kernel).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Internal bookkeeping mismatch (history length vs. weight count and the like).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace hifu
