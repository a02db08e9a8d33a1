#include "stripflow/subordination.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include <unsupported/Eigen/FFT>

#include "stripflow/error.hpp"

namespace stripflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct GaussRule {
    std::vector<double> x, w;  // on [-1, 1]
};

GaussRule gauss_legendre(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        r.x[i] = z;
        r.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return r;
}

// nodes and weights of a composite rule on [lo, hi]
std::pair<std::vector<double>, std::vector<double>> composite(double lo, double hi, double width,
                                                              const GaussRule& g) {
    std::vector<double> x, w;
    int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / width - 1e-12)));
    double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        double c = lo + (p + 0.5) * h;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            x.push_back(c + 0.5 * h * g.x[i]);
            w.push_back(0.5 * h * g.w[i]);
        }
    }
    return {x, w};
}

constexpr double kLogUpperT = 3.95;  // e^{-t} < 1e-22 beyond
constexpr double kLogUpperW = 2.0;   // e^{-w^2} < 1e-23 beyond

double integrate_once(const std::function<double(double)>& F, const QuadratureSpec& q,
                      double width) {
    GaussRule g = gauss_legendre(q.nodes);
    auto [ys, wy] = composite(q.log_lower, kLogUpperT, width, g);
    auto [zs, wz] = composite(q.log_lower, kLogUpperW, width, g);
    std::vector<double> wv(zs.size()), wgt(zs.size());
    for (std::size_t j = 0; j < zs.size(); ++j) {
        wv[j] = std::exp(zs[j]);
        wgt[j] = wz[j] * wv[j] * std::exp(-wv[j] * wv[j]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        double t = std::exp(ys[i]);
        double inner = 0.0;
        for (std::size_t j = 0; j < zs.size(); ++j) {
            if (wgt[j] == 0.0) continue;
            double tau = t * t / (4.0 * wv[j] * wv[j]);
            inner += wgt[j] * F(tau);
        }
        total += wy[i] * t * std::exp(-t) * inner;
    }
    return 2.0 / std::sqrt(kPi) * total;
}

double circle_kernel(double L, double t, double d) {
    d = std::fmod(d, L);
    if (d < 0) d += L;
    double k1 = 2.0 * kPi / L;
    if (k1 * k1 * t >= 1.0) {
        double sum = 1.0;
        for (int k = 1; k < 64; ++k) {
            double e = std::exp(-k1 * k1 * k * k * t);
            sum += 2.0 * e * std::cos(k1 * k * d);
            if (e < 1e-18) break;
        }
        return sum / L;
    }
    double norm = 1.0 / std::sqrt(4.0 * kPi * t);
    double sum = 0.0;
    for (int n = -4; n <= 4; ++n) {
        double r = d + n * L;
        sum += std::exp(-r * r / (4.0 * t));
    }
    return norm * sum;
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericalError(std::string(what) + ": non-finite quadrature value");
}

// G as a function of the fiber distance only
double G_of_distance(const KernelFiber& f, double d, const QuadratureSpec& q) {
    QuadratureSpec nq = q;
    nq.refine_check = false;
    return resolvent_kernel_G(f, 0.0, d, nq);
}

// geometric panels on (0, hi]: [hi 2^{-j-1}, hi 2^{-j}], j < levels
template <class Fn>
void graded_panels(double hi, int levels, const GaussRule& g, Fn&& fn) {
    for (int j = 0; j < levels; ++j) {
        double b = hi * std::ldexp(1.0, -j);
        double a = 0.5 * b;
        double h = b - a;
        for (std::size_t i = 0; i < g.x.size(); ++i)
            fn(a + 0.5 * h * (g.x[i] + 1.0), 0.5 * h * g.w[i]);
    }
}

}  // namespace

KernelFiber KernelFiber::circle(double circumference) {
    if (!(circumference > 0) || !std::isfinite(circumference))
        throw ParameterError("circle circumference must be positive");
    return {Kind::Circle, circumference};
}

double heat_kernel_fiber(const KernelFiber& fiber, double t, double x, double y) {
    if (!(t > 0)) throw DomainError("heat kernel needs t > 0");
    double d = x - y;
    if (fiber.kind == KernelFiber::Kind::Line)
        return std::exp(-d * d / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
    return circle_kernel(fiber.length, t, d);
}

double subordinated_integral(const std::function<double(double)>& F, const QuadratureSpec& q) {
    if (q.nodes < 2 || !(q.panel_width > 0) || !(q.log_lower < 0))
        throw ParameterError("bad quadrature specification");
    double v = integrate_once(F, q, q.panel_width);
    require_finite(v, "subordinated integral");
    if (q.refine_check) {
        double v2 = integrate_once(F, q, 0.5 * q.panel_width);
        require_finite(v2, "subordinated integral");
        double scale = std::max(std::abs(v2), 1e-300);
        if (std::abs(v2 - v) > q.tolerance * scale)
            throw NumericalError("subordinated integral not converged: " + std::to_string(v) +
                                 " vs " + std::to_string(v2));
        return v2;
    }
    return v;
}

double resolvent_kernel_G(const KernelFiber& fiber, double x, double y, const QuadratureSpec& q) {
    double d = x - y;
    if (fiber.kind == KernelFiber::Kind::Circle) {
        d = std::fmod(d, fiber.length);
        if (d < 0) d += fiber.length;
        if (d == 0.0) throw DomainError("resolvent kernel is infinite on the diagonal");
    } else if (d == 0.0) {
        throw DomainError("resolvent kernel is infinite on the diagonal");
    }
    return subordinated_integral([&](double tau) { return heat_kernel_fiber(fiber, tau, d, 0.0); },
                                 q);
}

double subordinated_multiplier(double lambda, const QuadratureSpec& q) {
    if (!(lambda >= 0)) throw ParameterError("eigenvalue must be >= 0");
    return subordinated_integral([lambda](double tau) { return std::exp(-lambda * tau); }, q);
}

CircleResolventMoments circle_resolvent_moments(double circumference, int k_max,
                                                const QuadratureSpec& q) {
    KernelFiber f = KernelFiber::circle(circumference);
    if (k_max < 0) throw ParameterError("k_max must be >= 0");
    if (q.refine_check) resolvent_kernel_G(f, 0.0, 0.25 * circumference, q);

    const double half = 0.5 * circumference;
    GaussRule g = gauss_legendre(10);
    CircleResolventMoments out;
    out.fourier.assign(k_max + 1, 0.0);
    // G(d) = G(L - d): integrate over (0, L/2] and double
    graded_panels(half, 44, g, [&](double d, double w) {
        double G = G_of_distance(f, d, q);
        out.mass += 2.0 * w * G;
        for (int k = 0; k <= k_max; ++k)
            out.fourier[k] += 2.0 * w * G * std::cos(2.0 * kPi * k * d / circumference);
    });
    return out;
}

double line_resolvent_mass(const QuadratureSpec& q) {
    KernelFiber f = KernelFiber::line();
    if (q.refine_check) resolvent_kernel_G(f, 0.0, 1.0, q);
    GaussRule g = gauss_legendre(10);
    const double D = 1024.0 * 1024.0;
    double mass = 0.0;
    graded_panels(D, 64, g, [&](double d, double w) { mass += 2.0 * w * G_of_distance(f, d, q); });
    // G(d) = 1 / (pi d^2) + O(d^-4) beyond D
    return mass + 2.0 / (kPi * D);
}

std::vector<double> poisson_extension(double circumference, const std::vector<double>& samples,
                                      double s) {
    if (!(circumference > 0)) throw ParameterError("circumference must be positive");
    if (!(s >= 0)) throw ParameterError("extension height must be >= 0");
    const std::size_t n = samples.size();
    if (n == 0) return {};
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> modes;
    fft.fwd(modes, samples);
    for (std::size_t k = 0; k < n; ++k) {
        double kk = k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - n;
        modes[k] *= std::exp(-s * std::abs(2.0 * kPi * kk / circumference));
    }
    std::vector<std::complex<double>> back;
    fft.inv(back, modes);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = back[i].real();
    return out;
}

}  // namespace stripflow
