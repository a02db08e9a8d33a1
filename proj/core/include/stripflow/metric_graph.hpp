#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stripflow/profile.hpp"

namespace stripflow {

using VertexId = std::size_t;
using EdgeId = std::size_t;

struct Edge {
    EdgeId id = 0;
    VertexId tail = 0;  // e^-
    VertexId head = 0;  // e^+
    double length = 1.0;
    /// Horocycle index of the head for tree-built graphs.
    std::optional<int> level;
    /// Global coordinate of the tail; sigma = offset + s along the edge.
    std::optional<double> global_offset;
};

struct Vertex {
    VertexId id = 0;
    bool truncation_boundary = false;
    std::optional<int> level;
};

/// Oriented, loop-free, connected metric graph. Immutable once built.
class MetricGraph {
public:
    MetricGraph() = default;
    MetricGraph(std::vector<Vertex> vertices, std::vector<Edge> edges);

    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    const Vertex& vertex(VertexId v) const;
    const Edge& edge(EdgeId e) const;
    const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    /// E_v, in increasing edge id.
    const std::vector<EdgeId>& incident(VertexId v) const;
    std::size_t degree(VertexId v) const { return incident(v).size(); }

    /// The endpoint of `e` other than `v`.
    VertexId opposite(EdgeId e, VertexId v) const;

    double min_edge_length() const;
    double max_edge_length() const;

private:
    std::vector<Vertex> vertices_;
    std::vector<Edge> edges_;
    std::vector<std::vector<EdgeId>> adjacency_;
};

/// A point of the 1-complex: edge-local coordinate s in [0, l_e].
struct GraphPoint {
    EdgeId edge = 0;
    double s = 0.0;

    static GraphPoint at_vertex(const MetricGraph& g, VertexId v);
};

/// Truncated horocyclic tree T_{p,q}. The root sits on level k_min; every
/// vertex below k_max has p children and the edge ending on level k has
/// length q^(k-1)(q-1) with global coordinate sigma in [q^(k-1), q^k].
/// Children are listed in order, so "first child" is well defined.
MetricGraph build_tree(int p, double q, int k_min, int k_max);

/// Same branching pattern with every edge of the given length and no global
/// coordinate (the bare trees of the horocyclic-collapse example).
MetricGraph build_regular_tree(int p, int k_min, int k_max, double edge_length);

/// Path v0 - v1 - ... - vn with the given edge lengths; end vertices flagged.
MetricGraph build_path(const std::vector<double>& lengths);

/// Star with one center (vertex 0) and one leaf per length; edges point
/// center -> leaf and leaves are flagged.
MetricGraph build_star(const std::vector<double>& lengths);

/// Vertex on level 0 reached from the root by first children (the root if
/// k_min >= 0). Requires a tree-built graph.
VertexId tree_origin(const MetricGraph& g);

/// Parent edge of a tree vertex, or nullopt for the root.
std::optional<EdgeId> tree_parent_edge(const MetricGraph& g, VertexId v);

/// Children edges of a tree vertex in first-child order.
std::vector<EdgeId> tree_child_edges(const MetricGraph& g, VertexId v);

/// Shortest-path distance in (Gamma^1, l). Throws DomainError for points on
/// unknown edges or outside [0, l_e].
double graph_distance(const MetricGraph& g, const GraphPoint& a, const GraphPoint& b);

/// Dijkstra distances from a point to every vertex.
std::vector<double> vertex_distances(const MetricGraph& g, const GraphPoint& from);

enum class Completeness { Complete, Incomplete, Unknown };

struct RayCompleteness {
    VertexId boundary_vertex = 0;
    Completeness verdict = Completeness::Unknown;
    /// Per-edge integrals of sqrt(phi) along the implied infinite extension
    /// (first few terms) and the total, +inf when divergent.
    std::vector<double> leading_terms;
    double total = 0.0;
};

struct CompletenessReport {
    std::vector<RayCompleteness> rays;
    bool all_complete() const;
};

/// Evaluates int sqrt(phi) along the geometric extension of every truncation
/// ray. The extension continues the incident edge with lengths in the ratio of
/// the last two edges and keeps the symbolic profile in its global coordinate.
CompletenessReport completeness_indicator(const MetricGraph& g,
                                          const std::vector<EdgeCoefficients>& coeffs);

/// Edge-adapted exhaustion: rho_1 = rho_low + c_e A_e(s), where A_e is the
/// integral of a smooth cutoff that vanishes within epsilon of each vertex
/// and c_e in [0, 1] repairs edges whose endpoints are reached from both sides.
class EdgeExhaustion {
public:
    EdgeExhaustion(const MetricGraph& g, double epsilon, VertexId origin);

    double epsilon() const noexcept { return epsilon_; }
    double value(EdgeId e, double s) const;
    double derivative(EdgeId e, double s) const;
    double vertex_value(VertexId v) const { return rho_vertex_.at(v); }
    /// Scale factor c_e; 1 on edges used by minimizing paths.
    double edge_scale(EdgeId e) const { return scale_.at(e); }

    struct Samples {
        std::vector<std::vector<double>> s;
        std::vector<std::vector<double>> values;
    };
    Samples sample(std::size_t nodes_per_edge) const;

private:
    double cutoff(double s, double length) const;
    double cutoff_integral(double s, double length) const;

    std::vector<double> lengths_;
    double epsilon_;
    std::vector<double> rho_vertex_;
    std::vector<double> scale_;
    std::vector<double> low_value_;
    std::vector<bool> increasing_;  // rho grows from tail to head
};

EdgeExhaustion edge_exhaustion(const MetricGraph& g, double epsilon, VertexId origin);

}  // namespace stripflow
