#pragma once

#include "stripflow/assembly.hpp"
#include "stripflow/metric_graph.hpp"
#include "stripflow/strip_complex.hpp"

namespace stripflow {

/// Smooth cutoff theta: 1 on [0, inner], 0 on [outer, inf), quintic
/// smoothstep in between.
struct Theta {
    double inner = 1.0;
    double outer = 2.0;

    double operator()(double r) const;
    double derivative(double r) const;
};

/// rho_1 of an EdgeExhaustion at every DOF (constant along the fiber).
Field sample_exhaustion(const Discretization& d, const EdgeExhaustion& rho);
/// rho_1 of a TreebolicExhaustion at every DOF.
Field sample_exhaustion(const Discretization& d, const TreebolicExhaustion& rho);

/// varrho_n = theta(rho_0 / n). Throws ConfigurationError when rho_0 is empty.
Field approx_unity(const Discretization& d, const Field& rho0, int n, const Theta& theta = {});

/// Brute-force metric gradient: max over grid links of |f_b - f_a| divided by
/// the Riemannian link length.
double gradient_sup(const Discretization& d, const Field& f);

/// max |L f| over DOFs away from truncation layers and fiber ends.
double laplacian_sup(const Discretization& d, const Field& f);

}  // namespace stripflow
