#pragma once

#include <stdexcept>
#include <string>

namespace qkdim {

/// Invalid arguments (negative dimension, gamma outside (0,1], ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operands of incompatible size.
class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base for failures of a numerical procedure on otherwise valid input.
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public ComputationError {
public:
    using ComputationError::ComputationError;
};

class ToleranceNotMet : public ComputationError {
public:
    ToleranceNotMet(const std::string& what, double best, double achieved)
        : ComputationError(what), best_value(best), achieved_error(achieved) {}

    double best_value;
    double achieved_error;
};

class BudgetUnreachable : public ComputationError {
public:
    using ComputationError::ComputationError;
};

class OverflowError : public ComputationError {
public:
    using ComputationError::ComputationError;
};

/// A normalisation or denominator that should be positive vanished.
class DegenerateError : public ComputationError {
public:
    using ComputationError::ComputationError;
};

/// Tensor space larger than the configured exact-simulation budget.
class BudgetExceeded : public ComputationError {
public:
    using ComputationError::ComputationError;
};

}  // namespace qkdim
