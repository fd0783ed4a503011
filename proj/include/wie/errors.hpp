#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wie {

/// Bad argument values (nonpositive widths, unordered inputs, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation outside the domain a trajectory or force is defined on.
class OutOfDomain : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Malformed input file. Carries the 1-based line the problem was found on.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::string detail_;
};

/// Solver configuration that would produce meaningless numbers (weight underflow).
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Factorization of the reduced system failed.
class ConditioningError : public std::runtime_error {
public:
    ConditioningError(const std::string& what, double condition_estimate)
        : std::runtime_error(what), condition_estimate_(condition_estimate) {}

    double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

/// The computed minimizer does not satisfy the stationarity system to tolerance.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Quadrature step too coarse for the oscillation it has to resolve.
class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wie
