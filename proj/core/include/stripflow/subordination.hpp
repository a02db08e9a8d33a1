#pragma once

#include <functional>
#include <vector>

namespace stripflow {

/// Fibers carrying an explicit heat kernel: the real line and a circle.
struct KernelFiber {
    enum class Kind { Line, Circle };
    Kind kind = Kind::Line;
    double length = 0.0;  // circumference for a circle

    static KernelFiber line() { return {Kind::Line, 0.0}; }
    static KernelFiber circle(double circumference);
};

/// h_M(t, x, y). Circle: Fourier series for large t, method of images for small t.
double heat_kernel_fiber(const KernelFiber& fiber, double t, double x, double y);

struct QuadratureSpec {
    /// Composite Gauss-Legendre panels of this width in log t and log w.
    double panel_width = 1.0;
    int nodes = 12;
    double log_lower = -30.0;  // lower cutoff of log t and log w
    /// Repeat on halved panels and fail above this relative disagreement.
    double tolerance = 1e-9;
    bool refine_check = true;
};

/// (1/sqrt(pi)) int_0^inf e^{-t} int_0^inf e^{-u} u^{-1/2} F(t^2 / 4u) du dt,
/// evaluated with u = w^2 on logarithmic panels.
double subordinated_integral(const std::function<double(double)>& F, const QuadratureSpec& q = {});

/// Kernel of (Id + sqrt(-Delta_M))^{-1}. Off-diagonal only (x != y), the
/// diagonal value is infinite for both fibers.
double resolvent_kernel_G(const KernelFiber& fiber, double x, double y, const QuadratureSpec& q = {});

/// The same quadrature applied to a Laplace eigenmode e^{-lambda tau};
/// reproduces 1 / (1 + sqrt(lambda)).
double subordinated_multiplier(double lambda, const QuadratureSpec& q = {});

/// Samples of G(x, .) with int G dy and the Fourier coefficients
/// int G(x, y) cos(k (x - y) 2 pi / L) dy for k = 0..k_max on a circle,
/// using panels graded geometrically toward the diagonal.
struct CircleResolventMoments {
    double mass = 0.0;
    std::vector<double> fourier;
};
CircleResolventMoments circle_resolvent_moments(double circumference, int k_max,
                                                const QuadratureSpec& q = {});

/// int_R G(0, y) dy on the line with the same grading.
double line_resolvent_mass(const QuadratureSpec& q = {});

/// e^{-s sqrt(-Delta)} on uniform samples of a circle of circumference L.
std::vector<double> poisson_extension(double circumference, const std::vector<double>& samples,
                                      double s);

}  // namespace stripflow
