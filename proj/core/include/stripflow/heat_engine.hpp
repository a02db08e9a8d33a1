#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "stripflow/assembly.hpp"

namespace stripflow {

enum class Scheme { ImplicitEuler, CrankNicolson };

/// Factored one-step operator of the heat flow on the free DOFs. Reusable
/// across fields; pinned DOFs stay zero.
class HeatPropagator {
public:
    HeatPropagator(const Discretization& d, double dt, Scheme scheme);
    ~HeatPropagator();
    HeatPropagator(HeatPropagator&&) noexcept;
    HeatPropagator& operator=(HeatPropagator&&) noexcept;

    double dt() const noexcept { return dt_; }
    Scheme scheme() const noexcept { return scheme_; }

    /// Applies `steps` time steps.
    Field advance(const Field& f, std::size_t steps) const;

private:
    struct Impl;
    const Discretization* d_;
    double dt_;
    Scheme scheme_;
    std::unique_ptr<Impl> impl_;
};

/// Approximates e^{tL} f0 with ceil(t/dt) equal steps. Implicit Euler keeps
/// values inside [min f0, max f0] (with zeros on pinned DOFs).
Field step_heat(const Discretization& d, const Field& f0, double t, double dt,
                Scheme scheme = Scheme::CrankNicolson);

struct HeatKernelSlice {
    double t = 0.0;
    std::size_t source = 0;
    /// h(t, source, .) as a density against mu.
    Field values;

    double retained_mass(const Discretization& d) const { return values.dot(d.mass); }
};

/// h(t, source, j) = (e^{tL} delta_source / mass_source)_j.
HeatKernelSlice heat_kernel(const Discretization& d, std::size_t source, double t, double dt,
                            Scheme scheme = Scheme::CrankNicolson);

/// Solves K_II u_I = -K_IB u_B. Pinned DOFs count as boundary with value 0.
/// Throws ConfigurationError when the boundary set is empty.
Field solve_harmonic(const Discretization& d, const std::map<std::size_t, double>& boundary);

/// Second-order one-sided derivative of f at the vertex layer of v moving
/// into edge e, for fiber node j.
double one_sided_derivative(const Discretization& d, const Field& f, EdgeId e, VertexId v,
                            std::size_t j);

struct KirchhoffResidual {
    std::vector<double> residual;  // per fiber node
    double max_norm = 0.0;
};

/// residual(x) = sum_e a_e(v) D_e f(v, x) with D_e the derivative into e.
KirchhoffResidual kirchhoff_residual(const Discretization& d, const Field& f, VertexId v);

struct GaussianBoundReport {
    double c_star = 0.0;        // sup of log h + d^2 / (4 (1 + eps) t)
    std::size_t argmax = 0;
    std::size_t non_finite = 0; // nodes with h <= 0 or non-finite values
};

/// `distances` holds d(source, .) per DOF.
GaussianBoundReport gaussian_bound_check(const Discretization& d, const HeatKernelSlice& slice,
                                         double epsilon, const std::vector<double>& distances);

struct ProbeSample {
    double x = 0.0;
    /// Finest-level one-sided d/ds (edge orientation) on each side and its
    /// change between the last two levels.
    double ds_first = 0.0;
    double ds_second = 0.0;
    double ds_cauchy = 0.0;
    /// d/dx extrapolated to the layer from each side.
    double dx_first = 0.0;
    double dx_second = 0.0;
    double dx_cauchy = 0.0;
};

struct ProbeReport {
    std::vector<ProbeSample> samples;
    double ds_gap = 0.0;    // max |ds_first - ds_second|
    double ds_cauchy = 0.0; // max Cauchy change of the one-sided ds values
    double dx_gap = 0.0;
    double dx_cauchy = 0.0;
    bool converging = true; // Cauchy changes shrink along the ladder
};

/// One-sided derivative stability across a refinement ladder (>= 3 nested
/// discretizations of one complex) at the layer of v between edges e1, e2.
/// `solver` returns the field to probe on each discretization.
ProbeReport smoothness_probe(const std::vector<const Discretization*>& ladder,
                             const std::function<Field(const Discretization&)>& solver,
                             VertexId v, EdgeId e1, EdgeId e2);

}  // namespace stripflow
