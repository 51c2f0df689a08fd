#pragma once

#include <stdexcept>
#include <string>

namespace metatune {

/// A value lies outside the bounds of its hyperparameter dimension or the unit cube.
class BoundsError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Vector or matrix dimensions disagree.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation (gamma >= 1, p <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Factorization failure or non-finite values during learning.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid experiment or component configuration.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field.empty() ? message : field + ": " + message),
          field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Filesystem failures in the harness.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace metatune
