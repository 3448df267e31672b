#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gelfand {

/// Raised when an argument does not conform to the space or type it is used with.
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An operator produced a non-finite coefficient.
class OperatorOverflow : public std::runtime_error {
public:
    OperatorOverflow(std::size_t coefficient, const std::string& what)
        : std::runtime_error(what), coefficient_(coefficient) {}

    std::size_t coefficient() const noexcept { return coefficient_; }

private:
    std::size_t coefficient_;
};

/// Adaptive quadrature failed, usually because g vanishes on the range.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A run configuration failed validation.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reading or writing an artifact failed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gelfand
