#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "stripflow/assembly.hpp"
#include "stripflow/heat_engine.hpp"

namespace stripflow {

/// Graph homomorphism between two strip complexes plus the fiber behaviour.
/// A(e) is measured as the ratio of fiber-integrated energy densities, so a
/// fiber collapse has A(e) = fiber length.
struct QuotientMap {
    std::string source_id;
    std::string target_id;
    std::vector<VertexId> vertex_map;
    std::vector<EdgeId> edge_map;
    std::vector<bool> reversed;  // source edge runs against its image
    bool collapses_fiber = false;
    std::vector<double> A;       // per source edge
    std::vector<double> a;       // per source vertex (NaN where unchecked)

    std::size_t source_edges() const noexcept { return edge_map.size(); }
};

/// Fills `reversed` from the vertex and edge maps and checks that the edge
/// map respects incidence. Inserts nothing; see `subdivide` for dummy vertices.
void finalize_map(QuotientMap& map, const MetricGraph& source, const MetricGraph& target);

/// Splits every edge in two at its midpoint (same profiles in the global
/// coordinate), so that a quotient identifying both endpoints of an edge
/// stays loop-free.
StripComplex subdivide(const StripComplex& sc);

struct Quotient {
    StripComplex target;
    QuotientMap map;
    bool no_op = false;  // the source fiber was already a point
};

/// Gamma^1 x M -> Gamma^1 with the same per-edge (a, m).
Quotient collapse_fiber(const StripComplex& sc);

/// treebolic(p, q, alpha, beta) -> treebolic(1, q, alpha, beta p) by horocycle level.
Quotient slice_plane(const StripComplex& sc);

/// Unit-edge regular tree with psi = p^-k b_k on level-k edges and phi = 1
/// (point fiber).
StripComplex build_weighted_tree(int p, int k_min, int k_max,
                                 const std::function<double(int)>& b);

/// Tree -> path over the horocycle levels with psi_0 = b_k on the edge
/// [k-1, k]. Throws IncompatibilityError naming the worst vertex when the
/// source weights violate the additivity constraint.
Quotient horocyclic_collapse(const StripComplex& tree, const std::function<double(int)>& b);

struct CompatibilityCertificate {
    bool ok = true;
    std::vector<double> A;  // per source edge
    std::vector<double> a;  // per source vertex (NaN on truncation vertices)
    struct Violation {
        enum class Kind { EdgeRatio, VertexSum } kind;
        std::size_t id;  // edge or vertex
        double spread;   // relative spread of the offending ratios
    };
    std::vector<Violation> violations;  // worst first
};

/// Condition (3): psi_e / psi_0 (fiber-integrated a and m) constant along
/// each edge on 8 interior samples within 1e-10. Condition (4): at every
/// interior source vertex the sums of A(e) over edges with a common image
/// agree across the image edges.
CompatibilityCertificate check_weight_compatibility(const StripComplex& source,
                                                    const StripComplex& target,
                                                    const QuotientMap& map);

/// Which source DOFs pool into each target DOF; requires the target grid to
/// be the image of the source grid.
struct Aggregation {
    std::vector<std::size_t> target_of;                // per source DOF
    std::vector<std::vector<std::size_t>> pool;        // per target DOF
};
Aggregation aggregation_table(const Discretization& source, const Discretization& target,
                              const QuotientMap& map);

/// Pooled measure sum_{pool} u * mass per target DOF.
Field aggregate_measure(const Discretization& source, const Aggregation& agg, const Field& u);
/// Mass-weighted average density over each pool.
Field aggregate_density(const Discretization& source, const Aggregation& agg, const Field& u);

struct ProjectionReport {
    double relative_l1 = 0.0;
    std::size_t target_source = 0;
    Field aggregated;  // pooled probability measure of the source kernel
    Field target;      // probability measure of the target kernel
    double ctmc_relative_l1 = -1.0;  // when Monte Carlo was requested
};

struct ProjectionOptions {
    double dt = 0.0;  // 0 -> t / 256
    Scheme scheme = Scheme::CrankNicolson;
    std::size_t ctmc_paths = 0;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

/// Projects e^{tL_source} delta and compares it with e^{tL_target} delta at
/// the image point, in relative L1 of the two probability measures.
ProjectionReport compare_projected_heat(const Discretization& source, const Discretization& target,
                                        const QuotientMap& map, std::size_t source_dof, double t,
                                        const ProjectionOptions& options = {});

/// Measure of each (bin edge, x-bin) cell: vertex layers are split by the
/// half-cell masses of their incident edges and fiber cells by overlap with
/// the x-bins defined by `x_breaks` (interior breakpoints).
std::vector<double> bin_measure(const Discretization& d, const Field& density,
                                const std::vector<EdgeId>& edge_to_bin, std::size_t bin_edges,
                                const std::vector<double>& x_breaks);

double relative_l1(const std::vector<double>& a, const std::vector<double>& reference);

}  // namespace stripflow
