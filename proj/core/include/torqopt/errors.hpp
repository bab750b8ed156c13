#pragma once

#include <stdexcept>
#include <string>

namespace torqopt {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A tensor evaluator failed or produced an invalid matrix (asymmetric,
// nonfinite, outside the chart domain).
struct EvaluationError : Error {
    using Error::Error;
};

// A matrix that must be symmetric positive definite was not.
struct SingularMatrixError : Error {
    using Error::Error;
};

// Expression text could not be parsed; `offset` is the byte position of
// the first offending character.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t offset_)
        : Error(msg + " (at byte " + std::to_string(offset_) + ")"), offset(offset_) {}
    std::size_t offset;
};

// Math domain error during expression evaluation (sqrt of a negative,
// tan at a pole, ...).
struct DomainError : Error {
    using Error::Error;
};

// The integrator produced a nonfinite state; `last_valid_time` is the
// time of the last finite node.
struct DivergenceError : Error {
    DivergenceError(const std::string& msg, double t)
        : Error(msg + " (last valid time " + std::to_string(t) + ")"), last_valid_time(t) {}
    double last_valid_time;
};

}  // namespace torqopt
