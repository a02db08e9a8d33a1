#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "stripflow/metric_graph.hpp"
#include "stripflow/profile.hpp"

namespace stripflow {

/// The fiber M of a strip complex. Interval fibers are [-L/2, L/2] with
/// reflecting ends; circles are [0, L) with wrap-around.
struct Fiber {
    enum class Kind { Point, Circle, Interval };

    Kind kind = Kind::Point;
    double length = 1.0;

    static Fiber point() { return {Kind::Point, 1.0}; }
    static Fiber circle(double circumference);
    static Fiber interval(double length);

    int dimension() const noexcept { return kind == Kind::Point ? 0 : 1; }
    /// Fiber measure: 1 for a point.
    double measure() const noexcept { return kind == Kind::Point ? 1.0 : length; }
    bool contains(double x) const;
};

struct TreebolicParams {
    int p = 2;
    double q = 2.0;
    double alpha = 0.0;
    double beta = 1.0;
    int k_min = -1;
    int k_max = 1;
    double R = 1.0;
};

/// Gamma^1 x M with per-edge coefficients. Immutable after construction.
class StripComplex {
public:
    StripComplex(MetricGraph graph, Fiber fiber, std::vector<EdgeCoefficients> coeffs,
                 std::optional<TreebolicParams> treebolic = std::nullopt);

    const MetricGraph& graph() const noexcept { return graph_; }
    const Fiber& fiber() const noexcept { return fiber_; }
    const EdgeCoefficients& coefficients(EdgeId e) const { return coeffs_.at(e); }
    const std::vector<EdgeCoefficients>& coefficients() const noexcept { return coeffs_; }
    const std::optional<TreebolicParams>& treebolic() const noexcept { return treebolic_; }

private:
    MetricGraph graph_;
    Fiber fiber_;
    std::vector<EdgeCoefficients> coeffs_;
    std::optional<TreebolicParams> treebolic_;
};

/// (edge, s, x) on a strip or (vertex, x) on a bifurcation manifold.
struct StripPoint {
    EdgeId edge = 0;
    double s = 0.0;
    double x = 0.0;
};
struct ManifoldPoint {
    VertexId vertex = 0;
    double x = 0.0;
};
using PointOnComplex = std::variant<StripPoint, ManifoldPoint>;

/// Canonical strip representation; vertex points land on their first incident edge.
StripPoint to_strip_point(const StripComplex& sc, const PointOnComplex& p);

/// Throws DomainError unless the point lies in the complex.
void check_point(const StripComplex& sc, const PointOnComplex& p);

/// Treebolic space HT(p, q) with measure beta^k y^alpha dxi, truncated to
/// levels [k_min, k_max] and |x| <= R (reflecting fiber of length 2R).
/// On a level-k edge phi = sigma^-2 and psi = beta^k sigma^alpha, so
/// a = beta^k sigma^alpha and m = beta^k sigma^(alpha-2).
StripComplex build_treebolic(const TreebolicParams& params);

/// Intrinsic metric tree T_{p,q} with energy s^alpha |f'|^2 and measure
/// beta^k s^(alpha-2) ds per level-k edge (point fiber).
StripComplex build_tree_complex(int p, double q, double alpha, double beta, int k_min, int k_max);

/// Strip complex with the same phi, psi on every edge.
StripComplex build_uniform_complex(MetricGraph graph, Fiber fiber, const Profile& phi,
                                   const Profile& psi);

/// Upper half-plane coordinates of a treebolic point: z = x + i y with y = sigma.
struct HalfPlanePoint {
    double x = 0.0;
    double y = 1.0;
    EdgeId edge = 0;
};
HalfPlanePoint to_half_plane(const StripComplex& sc, const StripPoint& p);
StripPoint from_half_plane(const StripComplex& sc, const HalfPlanePoint& z);

/// Smooth eta with eta = 1 on (1 - 1/(8q), 1 + q/8) and eta(q y) = q eta(y).
class HorocycleBump {
public:
    explicit HorocycleBump(double q);
    double operator()(double y) const;
    double derivative(double y) const;
    double q() const noexcept { return q_; }

private:
    // Profile on one period [1, q).
    double period_value(double u) const;
    double period_derivative(double u) const;

    double q_;
    double lo_;
    double hi_;
};

/// Strip-adapted exhaustion of a treebolic complex: delta(x + i eta(y)) plus
/// the subtree term kappa relative to the first-child reference end.
class TreebolicExhaustion {
public:
    explicit TreebolicExhaustion(const StripComplex& sc);

    double operator()(const PointOnComplex& p) const;
    /// kappa alone (0 on the reference geodesic).
    double kappa(const StripPoint& p) const;
    /// delta(z) = log(1 + (1 + x^2 + y^2)/y).
    static double delta(double x, double y);
    const HorocycleBump& eta() const noexcept { return eta_; }
    /// Level of the branch vertex of the subtree containing the edge; nullopt
    /// on the reference geodesic.
    std::optional<int> branch_level(EdgeId e) const { return branch_level_.at(e); }

private:
    StripComplex sc_;
    HorocycleBump eta_;
    std::vector<std::optional<int>> branch_level_;
};

}  // namespace stripflow
