#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dbnmf {

/// Shapes that do not chain (X ≈ W H, W_{l-1} ≈ W_l H_l, equal-size operands).
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Unsupported beta, inconsistent ranks, non-positive penalties.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of a scalar kernel.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A closed form was asked for outside the regime where it is valid.
struct PreconditionError : std::domain_error {
    using std::domain_error::domain_error;
};

struct DegenerateInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoRootError : NumericalError {
    using NumericalError::NumericalError;
};

/// Raised when an invariant that the algorithm guarantees is observed broken,
/// e.g. the objective increasing across a block majorization-minimization sweep.
struct ConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

struct ComparisonError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace dbnmf
