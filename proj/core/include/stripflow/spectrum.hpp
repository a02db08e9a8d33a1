#pragma once

#include <cstddef>

#include "stripflow/assembly.hpp"

namespace stripflow {

struct SpectrumOptions {
    double tolerance = 1e-8;     // relative residual of K v = lambda M v
    std::size_t krylov_dim = 40;
    std::size_t max_restarts = 200;
    /// Free blocks up to this size are solved densely.
    std::size_t dense_limit = 300;
};

struct SpectralBottom {
    double lambda = 0.0;
    Field eigenvector;  // M-normalized, zero on pinned DOFs
    double residual = 0.0;
    std::size_t iterations = 0;
};

/// Smallest generalized eigenvalue of K v = lambda M v on the free DOFs
/// (0 with a constant eigenvector when everything reflects). Shift-invert
/// Lanczos with full reorthogonalization and explicit restarts.
SpectralBottom spectral_bottom(const Discretization& d, const SpectrumOptions& options = {});

}  // namespace stripflow
