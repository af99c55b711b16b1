#include "hifu/error.hpp"

#include <utility>

namespace hifu {

ParseError::ParseError(const std::string& what, std::size_t line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

ValidationError::ValidationError(std::string field, const std::string& what)
    : Error(field + ": " + what), field_(std::move(field)) {}

ConvergenceError::ConvergenceError(const std::string& what, double residual, int iterations)
    : Error(what), residual_(residual), iterations_(iterations) {}

AccuracyError::AccuracyError(const std::string& what, double estimate)
    : Error(what), estimate_(estimate) {}

}  // namespace hifu
