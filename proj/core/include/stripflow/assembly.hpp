#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "stripflow/strip_complex.hpp"

namespace stripflow {

/// Function values (or densities) indexed by degree of freedom.
using Field = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

enum class SSpacing {
    Automatic,  // geometric in sigma on edges with a global coordinate, uniform otherwise
    Uniform,
    Geometric,
};

struct GridOptions {
    std::size_t nodes_per_edge = 9;
    std::size_t fiber_nodes = 9;
    SSpacing spacing = SSpacing::Automatic;
};

struct NodeInfo {
    enum class Kind { Vertex, EdgeInterior };
    Kind kind = Kind::Vertex;
    VertexId vertex = 0;     // valid for Kind::Vertex
    EdgeId edge = 0;         // valid for Kind::EdgeInterior
    std::size_t s_index = 0; // index on the edge (interior nodes)
    std::size_t x_index = 0;
    double s = 0.0;
    double x = 0.0;
};

/// Tensor grid per strip. The vertex layer {v} x (x-nodes) is one set of
/// degrees of freedom shared by every incident strip, which is how the trace
/// equality across a bifurcation manifold is encoded.
///
/// DOF layout: vertex layers first (v * fiber_count + j), then the interior
/// s-nodes of each edge in edge order.
class Grid {
public:
    Grid(const StripComplex& sc, const GridOptions& options);

    std::size_t dof_count() const noexcept { return info_.size(); }
    std::size_t fiber_count() const noexcept { return x_.size(); }
    std::size_t nodes_per_edge() const noexcept { return options_.nodes_per_edge; }
    const GridOptions& options() const noexcept { return options_; }

    const std::vector<double>& fiber_nodes() const noexcept { return x_; }
    /// Dual-cell widths of the fiber nodes (1 for a point fiber).
    const std::vector<double>& fiber_weights() const noexcept { return x_weight_; }
    bool fiber_wraps() const noexcept { return wraps_; }
    /// Fiber links (j, j', spacing).
    struct FiberLink {
        std::size_t a;
        std::size_t b;
        double dx;
    };
    const std::vector<FiberLink>& fiber_links() const noexcept { return x_links_; }

    const std::vector<double>& s_nodes(EdgeId e) const { return s_.at(e); }
    std::size_t edge_count() const noexcept { return s_.size(); }

    /// DOF of s-node i (0 = tail layer, last = head layer) and fiber node j.
    std::size_t node(EdgeId e, std::size_t i, std::size_t j) const;
    std::size_t vertex_node(VertexId v, std::size_t j) const;
    const NodeInfo& info(std::size_t dof) const { return info_.at(dof); }

    /// Nearest grid node to a point (nearest s-node on its edge, nearest x-node).
    std::size_t nearest_node(const StripComplex& sc, const PointOnComplex& p) const;

    /// True for an Interval fiber end node.
    bool is_fiber_end(std::size_t j) const;

private:
    GridOptions options_;
    std::vector<std::vector<double>> s_;
    std::vector<double> x_;
    std::vector<double> x_weight_;
    std::vector<FiberLink> x_links_;
    bool wraps_ = false;
    bool interval_ = false;
    std::size_t vertex_count_ = 0;
    std::vector<std::size_t> edge_base_;
    std::vector<VertexId> tails_;
    std::vector<VertexId> heads_;
    std::vector<NodeInfo> info_;
};

enum class Boundary { Reflecting, Absorbing };

/// Boundary condition on the truncation-boundary vertex layers and on the
/// ends of an Interval fiber.
struct BoundaryPolicy {
    Boundary graph = Boundary::Reflecting;
    Boundary fiber = Boundary::Reflecting;

    static BoundaryPolicy reflecting() { return {Boundary::Reflecting, Boundary::Reflecting}; }
    static BoundaryPolicy absorbing() { return {Boundary::Absorbing, Boundary::Absorbing}; }
    bool all_reflecting() const noexcept {
        return graph == Boundary::Reflecting && fiber == Boundary::Reflecting;
    }
};

/// Lumped mass vector and symmetric stiffness matrix of the weighted form
/// sum_e int a_e (|d_s f|^2 + |d_x f|^2) ds dx with measure m_e ds dx.
///
/// `stiffness` is always the full reflecting matrix (K 1 = 0). Absorbing
/// boundaries are expressed by `pinned` DOFs, which are held at zero; all
/// solvers work on the free block.
struct Discretization {
    StripComplex complex;
    Grid grid;
    Field mass;
    SparseMatrix stiffness;
    std::vector<bool> pinned;
    BoundaryPolicy policy;
    /// s-part of the dual-cell mass of s-node i inside edge e (half cells at
    /// the two ends); node mass = s_mass[e][i] * fiber_weight[j], summed over
    /// incident edges at vertex layers.
    std::vector<std::vector<double>> s_mass;

    std::size_t dof_count() const noexcept { return static_cast<std::size_t>(mass.size()); }
    /// Indices of non-pinned DOFs, and the inverse map (-1 for pinned).
    std::vector<std::size_t> free_dofs() const;
    std::vector<std::ptrdiff_t> free_index() const;
    double total_mass() const { return mass.sum(); }
};

Grid build_grid(const StripComplex& sc, const GridOptions& options);

/// Throws AssemblyError naming the cell when a dual cell gets non-positive mass.
Discretization assemble(const StripComplex& sc, const Grid& grid, const BoundaryPolicy& policy);
Discretization assemble(const StripComplex& sc, const GridOptions& options,
                        const BoundaryPolicy& policy = BoundaryPolicy::reflecting());

/// L f = -M^-1 K f, zero on pinned DOFs (which are treated as zero in f).
Field apply_generator(const Discretization& d, const Field& f);

/// E(f, f) = f^T K f over free DOFs.
double energy(const Discretization& d, const Field& f);

/// Samples a function of (edge, s, x) at every DOF; vertex layers use the
/// first incident edge.
template <class F>
Field sample_field(const Discretization& d, F&& f) {
    Field out(static_cast<Eigen::Index>(d.dof_count()));
    const MetricGraph& g = d.complex.graph();
    for (std::size_t k = 0; k < d.dof_count(); ++k) {
        const NodeInfo& n = d.grid.info(k);
        if (n.kind == NodeInfo::Kind::Vertex) {
            GraphPoint gp = GraphPoint::at_vertex(g, n.vertex);
            out[static_cast<Eigen::Index>(k)] = f(gp.edge, gp.s, n.x);
        } else {
            out[static_cast<Eigen::Index>(k)] = f(n.edge, n.s, n.x);
        }
    }
    return out;
}

}  // namespace stripflow
