#pragma once

#include <cstddef>
#include <vector>

#include "stripflow/assembly.hpp"

namespace stripflow {

/// mu of a set of grid cells (dual cells of the listed DOFs).
double measure(const Discretization& d, const std::vector<std::size_t>& cells);

/// mu of the rectangle [s0, s1] x [x0, x1] inside strip e (x-range ignored
/// for a point fiber).
double measure(const StripComplex& sc, EdgeId e, double s0, double s1, double x0, double x1);

/// Riemannian length of the straight segment (s0, x0) -> (s1, x1) inside
/// strip e, i.e. int sqrt(phi) |d(s, x)| (Gauss-Legendre in the parameter).
double segment_length(const StripComplex& sc, EdgeId e, double s0, double x0, double s1,
                      double x1);

struct DistanceOptions {
    GridOptions grid;
    /// Neighbour stencil half-width: links to (i + di, j + dj) for primitive
    /// offsets with |di|, |dj| <= stencil.
    int stencil = 3;
};

/// Grid distances from one DOF to every DOF. Path lengths are exact along
/// each stencil segment, so every value is an upper bound for rho.
std::vector<double> grid_distances(const StripComplex& sc, const Grid& grid, std::size_t source,
                                   int stencil = 3);

/// Upper approximation of rho(xi, zeta); both points snap to their nearest
/// grid node.
double distance(const StripComplex& sc, const PointOnComplex& xi, const PointOnComplex& zeta,
                const DistanceOptions& resolution = {});

/// mu of the cells whose nodes lie within grid distance r of xi.
double ball_volume(const StripComplex& sc, const PointOnComplex& xi, double r,
                   const DistanceOptions& resolution = {});

}  // namespace stripflow
