#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace possio {

/// Machine-readable failure categories. The CLI maps these onto exit codes.
enum class ErrorCategory {
    config,
    domain,
    convergence,
    characteristic_value,
};

std::string_view to_string(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

/// Argument outside the mathematical domain of a function (z = 0 for Y0, the doublet point, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorCategory::domain, what) {}
};

class ConvergenceError : public Error {
public:
    explicit ConvergenceError(const std::string& what) : Error(ErrorCategory::convergence, what) {}
};

/// Adaptive quadrature ran out of subdivisions.
class QuadratureError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

/// Time samples do not decay enough for a truncated Laplace transform.
class DecayError : public ConvergenceError {
public:
    using ConvergenceError::ConvergenceError;
};

/// The modified Fredholm determinant vanishes (numerically) at s.
class CharacteristicValueError : public Error {
public:
    CharacteristicValueError(const std::string& what, std::complex<double> s)
        : Error(ErrorCategory::characteristic_value, what), s_(s) {}

    std::complex<double> s() const noexcept { return s_; }

private:
    std::complex<double> s_;
};

}  // namespace possio
