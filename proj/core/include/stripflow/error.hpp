#pragma once

#include <stdexcept>
#include <string>

namespace stripflow {

/// Base class of every error raised by the library. The CLI maps the
/// concrete subclass onto a process exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid construction parameters (tree shape, epsilon, resolution).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A point, edge, or vertex that does not belong to the object it is used with.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Vector length does not match the degree-of-freedom count.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Non-positive mass or other inconsistency found while assembling.
class AssemblyError : public Error {
public:
    using Error::Error;
};

/// Solver or quadrature failed to reach its tolerance.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Ill-posed request (singular harmonic problem, mismatched grids, missing input).
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Source weights violate the quotient compatibility constraint.
class IncompatibilityError : public Error {
public:
    using Error::Error;
};

/// Configuration document does not match the schema. `path()` names the key.
class ValidationError : public Error {
public:
    ValidationError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace stripflow
