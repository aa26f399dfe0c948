#pragma once

#include <stdexcept>
#include <string>

namespace hypnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside its documented range.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Input outside the mathematical domain of an operation (e.g. log of zero).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A grid is too coarse for the requested kernel, window or stencil.
class ResolutionError : public Error {
public:
    explicit ResolutionError(const std::string& what, long required_points = 0)
        : Error(what), required_points_(required_points) {}

    /// Smallest grid size (points per axis) that would have been accepted, 0 if unknown.
    long required_points() const noexcept { return required_points_; }

private:
    long required_points_;
};

/// Witness coordinates (t, x, xi) attached to hyperbolicity failures.
struct Witness {
    double t = 0.0;
    double x[2] = {0.0, 0.0};
    double xi[2] = {0.0, 0.0};
};

/// Non-real characteristic roots or a collapsed eigenvalue gap.
class HyperbolicityError : public Error {
public:
    HyperbolicityError(const std::string& what, Witness w) : Error(what), witness_(w) {}
    const Witness& witness() const noexcept { return witness_; }

private:
    Witness witness_;
};

/// The correction constant search could not close the positivity margin.
class PositivityError : public Error {
public:
    using Error::Error;
};

/// Solution norm exceeded the blow-up guard.
class BlowUpError : public Error {
public:
    BlowUpError(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// NaN or infinity appeared during a computation.
class NumericalFault : public Error {
public:
    using Error::Error;
};

/// Requested time lies beyond the validity horizon of a closed-form oracle.
class HorizonError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& what)
        : Error(field + ": " + what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace hypnet
