#include "stripflow/quotients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stripflow/brownian.hpp"
#include "stripflow/error.hpp"

namespace stripflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Profile shift_profile(const Profile& p, double delta, double length) {
    switch (p.kind()) {
    case Profile::Kind::Constant:
        return p;
    case Profile::Kind::Power:
        return Profile::power(p.coefficient(), p.exponent(), p.offset() + delta);
    case Profile::Kind::TabulatedLogLinear: {
        std::vector<double> s, v;
        for (int k = 0; k <= 16; ++k) {
            const double x = length * k / 16.0;
            s.push_back(x);
            v.push_back(p(x + delta));
        }
        return Profile::tabulated(std::move(s), std::move(v));
    }
    }
    return p;
}

EdgeCoefficients shift_coefficients(const EdgeCoefficients& c, double delta, double length) {
    return {shift_profile(c.phi, delta, length), shift_profile(c.psi, delta, length),
            shift_profile(c.a, delta, length), shift_profile(c.m, delta, length),
            c.fiber_dimension};
}

std::vector<VertexId> vertices_by_level(const MetricGraph& g, int k_min, int k_max) {
    std::vector<VertexId> out(static_cast<std::size_t>(k_max - k_min + 1), 0);
    std::vector<bool> seen(out.size(), false);
    for (const Vertex& v : g.vertices()) {
        if (!v.level) throw DomainError("vertex without level");
        const auto k = static_cast<std::size_t>(*v.level - k_min);
        if (!seen.at(k)) {
            out[k] = v.id;
            seen[k] = true;
        }
    }
    return out;
}

}  // namespace

void finalize_map(QuotientMap& map, const MetricGraph& source, const MetricGraph& target) {
    if (map.vertex_map.size() != source.vertex_count() || map.edge_map.size() != source.edge_count()) {
        throw ConfigurationError("quotient map does not cover the source graph");
    }
    map.reversed.assign(source.edge_count(), false);
    for (const Edge& e : source.edges()) {
        const Edge& t = target.edge(map.edge_map[e.id]);
        const VertexId a = map.vertex_map[e.tail];
        const VertexId b = map.vertex_map[e.head];
        if (a == t.tail && b == t.head) continue;
        if (a == t.head && b == t.tail) {
            map.reversed[e.id] = true;
            continue;
        }
        throw ConfigurationError("edge map does not respect incidence at edge " +
                                 std::to_string(e.id));
    }
}

StripComplex subdivide(const StripComplex& sc) {
    const MetricGraph& g = sc.graph();
    std::vector<Vertex> vertices = g.vertices();
    std::vector<Edge> edges;
    std::vector<EdgeCoefficients> coeffs;
    for (const Edge& e : g.edges()) {
        const VertexId mid = vertices.size();
        vertices.push_back({mid, false, std::nullopt});
        const double h = 0.5 * e.length;
        Edge a = e, b = e;
        a.id = edges.size();
        a.head = mid;
        a.length = h;
        b.id = a.id + 1;
        b.tail = mid;
        b.length = h;
        if (e.global_offset) b.global_offset = *e.global_offset + h;
        edges.push_back(a);
        edges.push_back(b);
        coeffs.push_back(shift_coefficients(sc.coefficients(e.id), 0.0, h));
        coeffs.push_back(shift_coefficients(sc.coefficients(e.id), h, h));
    }
    return StripComplex(MetricGraph(std::move(vertices), std::move(edges)), sc.fiber(),
                        std::move(coeffs), sc.treebolic());
}

Quotient collapse_fiber(const StripComplex& sc) {
    const MetricGraph& g = sc.graph();
    QuotientMap map;
    map.source_id = "source";
    map.target_id = "fiber-collapse";
    for (VertexId v = 0; v < g.vertex_count(); ++v) map.vertex_map.push_back(v);
    for (EdgeId e = 0; e < g.edge_count(); ++e) map.edge_map.push_back(e);
    map.collapses_fiber = sc.fiber().kind != Fiber::Kind::Point;
    finalize_map(map, g, g);
    if (!map.collapses_fiber) {
        map.A.assign(g.edge_count(), 1.0);
        map.a.assign(g.vertex_count(), 1.0);
        return {sc, map, true};
    }
    std::vector<EdgeCoefficients> coeffs;
    for (const auto& c : sc.coefficients()) {
        // n = 0 with the same a, m: phi = m / a, psi = sqrt(a m).
        coeffs.push_back({c.m * c.a.pow(-1.0), (c.a * c.m).pow(0.5), c.a, c.m, 0});
    }
    StripComplex target(g, Fiber::point(), std::move(coeffs));
    const auto cert = check_weight_compatibility(sc, target, map);
    map.A = cert.A;
    map.a = cert.a;
    return {std::move(target), std::move(map), false};
}

Quotient slice_plane(const StripComplex& sc) {
    if (!sc.treebolic()) throw DomainError("slice_plane needs a treebolic complex");
    const TreebolicParams tp = *sc.treebolic();
    TreebolicParams plane = tp;
    plane.p = 1;
    plane.beta = tp.beta * tp.p;
    StripComplex target = build_treebolic(plane);
    const MetricGraph& g = sc.graph();
    const MetricGraph& g0 = target.graph();
    const auto by_level = vertices_by_level(g0, tp.k_min, tp.k_max);
    QuotientMap map;
    map.source_id = "treebolic";
    map.target_id = "plane";
    for (const Vertex& v : g.vertices()) {
        map.vertex_map.push_back(by_level.at(static_cast<std::size_t>(*v.level - tp.k_min)));
    }
    for (const Edge& e : g.edges()) {
        const VertexId h0 = map.vertex_map[e.head];
        map.edge_map.push_back(*tree_parent_edge(g0, h0));
    }
    finalize_map(map, g, g0);
    const auto cert = check_weight_compatibility(sc, target, map);
    map.A = cert.A;
    map.a = cert.a;
    return {std::move(target), std::move(map), false};
}

StripComplex build_weighted_tree(int p, int k_min, int k_max,
                                 const std::function<double(int)>& b) {
    MetricGraph g = build_regular_tree(p, k_min, k_max, 1.0);
    std::vector<EdgeCoefficients> coeffs;
    for (const Edge& e : g.edges()) {
        const int k = *e.level;
        const double psi = std::pow(static_cast<double>(p), -k) * b(k);
        coeffs.push_back(EdgeCoefficients::from_geometry(Profile::constant(1.0),
                                                         Profile::constant(psi), 0));
    }
    return StripComplex(std::move(g), Fiber::point(), std::move(coeffs));
}

Quotient horocyclic_collapse(const StripComplex& tree, const std::function<double(int)>& b) {
    const MetricGraph& g = tree.graph();
    if (tree.fiber().kind != Fiber::Kind::Point) throw DomainError("horocyclic collapse needs a 1D tree");
    int k_min = std::numeric_limits<int>::max(), k_max = std::numeric_limits<int>::min();
    for (const Vertex& v : g.vertices()) {
        if (!v.level) throw DomainError("horocyclic collapse needs level tags");
        k_min = std::min(k_min, *v.level);
        k_max = std::max(k_max, *v.level);
    }
    std::vector<double> lengths(static_cast<std::size_t>(k_max - k_min), 0.0);
    for (const Edge& e : g.edges()) lengths.at(static_cast<std::size_t>(*e.level - k_min - 1)) = e.length;
    for (const Edge& e : g.edges()) {
        if (std::abs(e.length - lengths[static_cast<std::size_t>(*e.level - k_min - 1)]) > 1e-12 * e.length) {
            throw DomainError("edges of one level must share their length");
        }
    }
    MetricGraph line = build_path(lengths);
    std::vector<EdgeCoefficients> coeffs;
    for (int k = k_min + 1; k <= k_max; ++k) {
        coeffs.push_back(EdgeCoefficients::from_geometry(Profile::constant(1.0),
                                                         Profile::constant(b(k)), 0));
    }
    StripComplex target(line, Fiber::point(), std::move(coeffs));
    QuotientMap map;
    map.source_id = "tree";
    map.target_id = "line";
    for (const Vertex& v : g.vertices()) map.vertex_map.push_back(static_cast<VertexId>(*v.level - k_min));
    for (const Edge& e : g.edges()) map.edge_map.push_back(static_cast<EdgeId>(*e.level - k_min - 1));
    finalize_map(map, g, target.graph());
    const auto cert = check_weight_compatibility(tree, target, map);
    if (!cert.ok) {
        std::ostringstream os;
        os << "source weights are incompatible at";
        const std::size_t shown = std::min<std::size_t>(cert.violations.size(), 8);
        for (std::size_t i = 0; i < shown; ++i) {
            const auto& w = cert.violations[i];
            os << (i ? ", " : " ")
               << (w.kind == CompatibilityCertificate::Violation::Kind::VertexSum ? "vertex " : "edge ")
               << w.id << " (relative spread " << w.spread << ")";
        }
        if (shown < cert.violations.size()) os << ", ...";
        throw IncompatibilityError(os.str());
    }
    map.A = cert.A;
    map.a = cert.a;
    return {std::move(target), std::move(map), false};
}

CompatibilityCertificate check_weight_compatibility(const StripComplex& source,
                                                    const StripComplex& target,
                                                    const QuotientMap& map) {
    const MetricGraph& g = source.graph();
    const MetricGraph& g0 = target.graph();
    if (map.edge_map.size() != g.edge_count() || map.vertex_map.size() != g.vertex_count() ||
        map.reversed.size() != g.edge_count()) {
        throw ConfigurationError("quotient map is not finalized for this source");
    }
    const double fs = source.fiber().measure();
    const double ft = target.fiber().measure();
    CompatibilityCertificate cert;
    cert.A.assign(g.edge_count(), kNaN);
    cert.a.assign(g.vertex_count(), kNaN);
    using V = CompatibilityCertificate::Violation;

    for (const Edge& e : g.edges()) {
        const EdgeId e0 = map.edge_map[e.id];
        const Edge& t = g0.edge(e0);
        const auto& c = source.coefficients(e.id);
        const auto& c0 = target.coefficients(e0);
        std::vector<double> ra, rm;
        for (int k = 0; k < 8; ++k) {
            const double u = (k + 0.5) / 8.0;
            const double s = u * e.length;
            const double tau = (map.reversed[e.id] ? 1.0 - u : u) * t.length;
            ra.push_back(c.a(s) * fs / (c0.a(tau) * ft));
            rm.push_back(c.m(s) * fs / (c0.m(tau) * ft));
        }
        double mean = 0.0;
        for (double r : ra) mean += r;
        mean /= static_cast<double>(ra.size());
        double spread = 0.0;
        for (double r : ra) spread = std::max(spread, std::abs(r - mean) / mean);
        for (double r : rm) spread = std::max(spread, std::abs(r - mean) / mean);
        cert.A[e.id] = mean;
        if (spread > 1e-10) cert.violations.push_back({V::Kind::EdgeRatio, e.id, spread});
    }

    for (const Vertex& v : g.vertices()) {
        if (v.truncation_boundary) continue;
        const VertexId v0 = map.vertex_map[v.id];
        std::vector<double> sums;
        for (EdgeId e0 : g0.incident(v0)) {
            double s = 0.0;
            for (EdgeId e : g.incident(v.id)) {
                if (map.edge_map[e] == e0) s += cert.A[e];
            }
            sums.push_back(s);
        }
        if (sums.empty()) continue;
        const double hi = *std::max_element(sums.begin(), sums.end());
        const double lo = *std::min_element(sums.begin(), sums.end());
        double mean = 0.0;
        for (double s : sums) mean += s;
        cert.a[v.id] = mean / static_cast<double>(sums.size());
        const double spread = hi > 0 ? (hi - lo) / hi : 1.0;
        if (spread > 1e-10) cert.violations.push_back({V::Kind::VertexSum, v.id, spread});
    }
    std::stable_sort(cert.violations.begin(), cert.violations.end(),
                     [](const V& x, const V& y) { return x.spread > y.spread; });
    cert.ok = cert.violations.empty();
    return cert;
}

Aggregation aggregation_table(const Discretization& source, const Discretization& target,
                              const QuotientMap& map) {
    const Grid& gs = source.grid;
    const Grid& gt = target.grid;
    const MetricGraph& g = source.complex.graph();
    if (map.edge_map.size() != g.edge_count() || map.reversed.size() != g.edge_count()) {
        throw ConfigurationError("quotient map does not match the source discretization");
    }
    if (gs.nodes_per_edge() != gt.nodes_per_edge()) {
        throw ConfigurationError("grid mismatch: nodes per edge differ");
    }
    const std::size_t ns = gs.nodes_per_edge();
    if (map.collapses_fiber) {
        if (gt.fiber_count() != 1) throw ConfigurationError("grid mismatch: target fiber is not a point");
    } else {
        if (gs.fiber_count() != gt.fiber_count()) throw ConfigurationError("grid mismatch: fiber nodes differ");
        for (std::size_t j = 0; j < gs.fiber_count(); ++j) {
            if (std::abs(gs.fiber_nodes()[j] - gt.fiber_nodes()[j]) > 1e-12 * (1.0 + std::abs(gt.fiber_nodes()[j]))) {
                throw ConfigurationError("grid mismatch: fiber nodes differ");
            }
        }
    }
    for (const Edge& e : g.edges()) {
        const EdgeId e0 = map.edge_map[e.id];
        const auto& s = gs.s_nodes(e.id);
        const auto& s0 = gt.s_nodes(e0);
        for (std::size_t i = 0; i < ns; ++i) {
            const double mapped = map.reversed[e.id] ? s0.back() - s0[ns - 1 - i] : s0[i];
            if (std::abs(mapped - s[i]) > 1e-9 * (1.0 + e.length)) {
                throw ConfigurationError("grid mismatch: s-nodes of edge " + std::to_string(e.id) +
                                         " are not mapped onto the target grid");
            }
        }
    }
    Aggregation agg;
    agg.target_of.resize(gs.dof_count());
    agg.pool.assign(gt.dof_count(), {});
    for (std::size_t k = 0; k < gs.dof_count(); ++k) {
        const NodeInfo& n = gs.info(k);
        const std::size_t j = map.collapses_fiber ? 0 : n.x_index;
        std::size_t t;
        if (n.kind == NodeInfo::Kind::Vertex) {
            t = gt.vertex_node(map.vertex_map[n.vertex], j);
        } else {
            const std::size_t i = map.reversed[n.edge] ? ns - 1 - n.s_index : n.s_index;
            t = gt.node(map.edge_map[n.edge], i, j);
        }
        agg.target_of[k] = t;
        agg.pool[t].push_back(k);
    }
    for (std::size_t t = 0; t < agg.pool.size(); ++t) {
        if (agg.pool[t].empty()) throw ConfigurationError("quotient map is not onto the target grid");
    }
    return agg;
}

Field aggregate_measure(const Discretization& source, const Aggregation& agg, const Field& u) {
    if (static_cast<std::size_t>(u.size()) != source.dof_count()) throw ShapeError("field size");
    Field out = Field::Zero(static_cast<Eigen::Index>(agg.pool.size()));
    for (std::size_t k = 0; k < agg.target_of.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        out[static_cast<Eigen::Index>(agg.target_of[k])] += u[kk] * source.mass[kk];
    }
    return out;
}

Field aggregate_density(const Discretization& source, const Aggregation& agg, const Field& u) {
    Field num = aggregate_measure(source, agg, u);
    Field one = Field::Ones(u.size());
    Field den = aggregate_measure(source, agg, one);
    return num.cwiseQuotient(den);
}

double relative_l1(const std::vector<double>& a, const std::vector<double>& reference) {
    if (a.size() != reference.size()) throw ShapeError("relative_l1 size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        num += std::abs(a[k] - reference[k]);
        den += std::abs(reference[k]);
    }
    return den > 0 ? num / den : num;
}

namespace {

std::vector<double> to_vec(const Field& f) { return {f.data(), f.data() + f.size()}; }

}  // namespace

ProjectionReport compare_projected_heat(const Discretization& source, const Discretization& target,
                                        const QuotientMap& map, std::size_t source_dof, double t,
                                        const ProjectionOptions& options) {
    const Aggregation agg = aggregation_table(source, target, map);
    if (source_dof >= source.dof_count()) throw DomainError("source DOF out of range");
    const double dt = options.dt > 0 ? options.dt : t / 256.0;
    ProjectionReport rep;
    rep.target_source = agg.target_of[source_dof];
    const HeatKernelSlice hs = heat_kernel(source, source_dof, t, dt, options.scheme);
    const HeatKernelSlice ht = heat_kernel(target, rep.target_source, t, dt, options.scheme);
    rep.aggregated = aggregate_measure(source, agg, hs.values);
    rep.target = ht.values.cwiseProduct(target.mass);
    rep.relative_l1 = relative_l1(to_vec(rep.aggregated), to_vec(rep.target));
    if (options.ctmc_paths > 0) {
        const EmpiricalMeasure em =
            sample_ctmc(source, source_dof, t, options.ctmc_paths, {options.seed, options.threads});
        const auto frac = em.fractions();
        std::vector<double> pooled(agg.pool.size(), 0.0);
        for (std::size_t k = 0; k < frac.size(); ++k) pooled[agg.target_of[k]] += frac[k];
        rep.ctmc_relative_l1 = relative_l1(pooled, to_vec(rep.target));
    }
    return rep;
}

std::vector<double> bin_measure(const Discretization& d, const Field& density,
                                const std::vector<EdgeId>& edge_to_bin, std::size_t bin_edges,
                                const std::vector<double>& x_breaks) {
    if (static_cast<std::size_t>(density.size()) != d.dof_count()) throw ShapeError("field size");
    const Grid& grid = d.grid;
    if (edge_to_bin.size() != grid.edge_count()) throw ShapeError("edge bin map size");
    if (d.complex.fiber().kind == Fiber::Kind::Point && !x_breaks.empty()) {
        throw ParameterError("a point fiber has a single x-bin");
    }
    if (!std::is_sorted(x_breaks.begin(), x_breaks.end())) throw ParameterError("x breaks must be sorted");
    const std::size_t nb = x_breaks.size() + 1;
    const std::size_t nx = grid.fiber_count();
    const auto& xs = grid.fiber_nodes();
    const Fiber& fib = d.complex.fiber();

    // Fraction of each fiber dual cell falling into each x-bin.
    std::vector<std::vector<double>> share(nx, std::vector<double>(nb, 0.0));
    for (std::size_t j = 0; j < nx; ++j) {
        if (fib.kind == Fiber::Kind::Point || nx == 1) {
            share[j][0] = 1.0;
            continue;
        }
        std::vector<std::pair<double, double>> pieces;
        if (fib.kind == Fiber::Kind::Interval) {
            const double lo = j == 0 ? xs[0] : 0.5 * (xs[j - 1] + xs[j]);
            const double hi = j + 1 == nx ? xs[j] : 0.5 * (xs[j] + xs[j + 1]);
            pieces.push_back({lo, hi});
        } else {
            const double h = 0.5 * fib.length / static_cast<double>(nx);
            double lo = xs[j] - h, hi = xs[j] + h;
            if (lo < 0) {
                pieces.push_back({lo + fib.length, fib.length});
                lo = 0;
            }
            if (hi > fib.length) {
                pieces.push_back({0.0, hi - fib.length});
                hi = fib.length;
            }
            pieces.push_back({lo, hi});
        }
        double width = 0.0;
        for (auto [lo, hi] : pieces) width += hi - lo;
        for (auto [lo, hi] : pieces) {
            for (std::size_t b = 0; b < nb; ++b) {
                const double blo = b == 0 ? -INFINITY : x_breaks[b - 1];
                const double bhi = b + 1 == nb ? INFINITY : x_breaks[b];
                const double ov = std::min(hi, bhi) - std::max(lo, blo);
                if (ov > 0) share[j][b] += ov / width;
            }
        }
    }

    std::vector<double> out(bin_edges * nb, 0.0);
    const auto& w = grid.fiber_weights();
    for (EdgeId e = 0; e < grid.edge_count(); ++e) {
        const std::size_t be = edge_to_bin[e];
        if (be >= bin_edges) throw DomainError("bin edge out of range");
        for (std::size_t i = 0; i < grid.nodes_per_edge(); ++i) {
            for (std::size_t j = 0; j < nx; ++j) {
                const double mass = d.s_mass[e][i] * w[j];
                const double val = density[static_cast<Eigen::Index>(grid.node(e, i, j))] * mass;
                for (std::size_t b = 0; b < nb; ++b) out[be * nb + b] += val * share[j][b];
            }
        }
    }
    return out;
}

}  // namespace stripflow
