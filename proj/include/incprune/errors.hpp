#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace incprune {

/// Caller broke a documented precondition (bad index, malformed belief, ...).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Problem text does not follow the model grammar.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& message)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// A parsed model violates a stochasticity or range invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ZeroProbabilityObservation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The simplex could not finish within its pivot budget.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptySet : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ProvenanceMissing : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Raised by the exhaustive cross-sum when the materialized set passes its cap.
class CombinatorialBlowup : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonConvergent : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A run passed its wall-clock deadline.
class TimeoutExpired : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace incprune
