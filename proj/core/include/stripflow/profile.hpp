#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace stripflow {

/// A strictly positive coefficient profile on one edge, evaluated in the
/// edge-local coordinate s in [0, length].
///
/// Power profiles are written in a global coordinate sigma = offset + s, which
/// is how the treebolic profiles sigma^-2 and beta^k sigma^alpha are expressed.
/// Tabulated profiles interpolate log(value) linearly between samples.
class Profile {
public:
    enum class Kind { Constant, Power, TabulatedLogLinear };

    static Profile constant(double c);
    static Profile power(double c, double exponent, double offset = 0.0);
    static Profile tabulated(std::vector<double> s, std::vector<double> values);

    Kind kind() const noexcept { return kind_; }
    bool symbolic() const noexcept { return kind_ != Kind::TabulatedLogLinear; }

    double operator()(double s) const;

    /// Coefficient, exponent and offset; for Constant the exponent is 0.
    double coefficient() const noexcept { return coefficient_; }
    double exponent() const noexcept { return exponent_; }
    double offset() const noexcept { return offset_; }
    const std::vector<double>& sample_s() const noexcept { return sample_s_; }
    const std::vector<double>& sample_log_values() const noexcept { return sample_log_; }

    /// Exact derivative d/ds (log-linear profiles use the piecewise slope).
    double derivative(double s) const;

    /// Exact integral of the profile raised to `power` over [s0, s1]; Simpson
    /// panels for tabulated profiles.
    double integral_of_power(double s0, double s1, double power) const;

    /// Pointwise product and real power. Symbolic when both factors are
    /// symbolic and share the global coordinate, tabulated otherwise.
    Profile pow(double e) const;
    Profile operator*(const Profile& other) const;
    Profile scaled(double factor) const;

    /// Fails with ParameterError unless the profile is positive on [0, length].
    void validate(double length) const;

private:
    Profile() = default;

    Kind kind_ = Kind::Constant;
    double coefficient_ = 1.0;
    double exponent_ = 0.0;
    double offset_ = 0.0;
    std::vector<double> sample_s_;
    std::vector<double> sample_log_;
};

/// Per-edge data of a strip: geometry phi, measure weight psi and the reduced
/// energy density a = psi phi^((n-1)/2) and mass density m = psi phi^((n+1)/2).
struct EdgeCoefficients {
    Profile phi;
    Profile psi;
    Profile a;
    Profile m;
    int fiber_dimension = 1;

    static EdgeCoefficients from_geometry(Profile phi, Profile psi, int fiber_dimension);
};

}  // namespace stripflow
