#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "stripflow/assembly.hpp"

namespace stripflow::testing {

// Dense generator -M^-1 K on the free DOFs.
inline Eigen::MatrixXd dense_generator(const Discretization& d, std::vector<std::size_t>& free) {
    free = d.free_dofs();
    const Eigen::MatrixXd K(d.stiffness);
    const auto n = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd L(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            L(a, b) = -K(static_cast<Eigen::Index>(free[static_cast<std::size_t>(a)]),
                         static_cast<Eigen::Index>(free[static_cast<std::size_t>(b)])) /
                      d.mass[static_cast<Eigen::Index>(free[static_cast<std::size_t>(a)])];
    return L;
}

// e^{tL} f0 through the Pade/scaling-squaring matrix exponential.
inline Field expm_apply(const Discretization& d, const Field& f0, double t) {
    std::vector<std::size_t> free;
    const Eigen::MatrixXd E = (t * dense_generator(d, free)).exp();
    Eigen::VectorXd g(static_cast<Eigen::Index>(free.size()));
    for (std::size_t a = 0; a < free.size(); ++a) g[static_cast<Eigen::Index>(a)] = f0[static_cast<Eigen::Index>(free[a])];
    const Eigen::VectorXd h = E * g;
    Field out = Field::Zero(f0.size());
    for (std::size_t a = 0; a < free.size(); ++a) out[static_cast<Eigen::Index>(free[a])] = h[static_cast<Eigen::Index>(a)];
    return out;
}

inline Field delta(const Discretization& d, std::size_t k) {
    Field f = Field::Zero(static_cast<Eigen::Index>(d.dof_count()));
    f[static_cast<Eigen::Index>(k)] = 1.0 / d.mass[static_cast<Eigen::Index>(k)];
    return f;
}

}  // namespace stripflow::testing
