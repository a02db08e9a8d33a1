#include "stripflow/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stripflow/error.hpp"

namespace stripflow {

namespace {

std::vector<double> edge_nodes(const Edge& e, std::size_t n, SSpacing spacing) {
    std::vector<double> s(n);
    const bool has_offset = e.global_offset && *e.global_offset > 0.0;
    const bool geometric = spacing == SSpacing::Geometric ||
                           (spacing == SSpacing::Automatic && has_offset);
    if (geometric && !has_offset) {
        throw ParameterError("geometric spacing needs a positive global coordinate on edge " +
                             std::to_string(e.id));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        if (geometric) {
            const double lo = *e.global_offset;
            const double hi = lo + e.length;
            s[i] = lo * std::pow(hi / lo, t) - lo;
        } else {
            s[i] = t * e.length;
        }
    }
    s.front() = 0.0;
    s.back() = e.length;
    return s;
}

}  // namespace

Grid::Grid(const StripComplex& sc, const GridOptions& options) : options_(options) {
    if (options.nodes_per_edge < 2) throw ParameterError("nodes_per_edge must be at least 2");
    if (options.fiber_nodes < 1) throw ParameterError("fiber_nodes must be at least 1");

    const MetricGraph& g = sc.graph();
    const Fiber& fib = sc.fiber();
    std::size_t nx = fib.kind == Fiber::Kind::Point ? 1 : options.fiber_nodes;
    options_.fiber_nodes = nx;

    x_.assign(nx, 0.0);
    x_weight_.assign(nx, 1.0);
    switch (fib.kind) {
    case Fiber::Kind::Point:
        break;
    case Fiber::Kind::Interval:
        interval_ = true;
        if (nx == 1) {
            x_weight_[0] = fib.length;
        } else {
            const double dx = fib.length / static_cast<double>(nx - 1);
            for (std::size_t j = 0; j < nx; ++j) {
                x_[j] = -0.5 * fib.length + static_cast<double>(j) * dx;
                x_weight_[j] = (j == 0 || j + 1 == nx) ? 0.5 * dx : dx;
            }
            x_.back() = 0.5 * fib.length;
            for (std::size_t j = 0; j + 1 < nx; ++j) x_links_.push_back({j, j + 1, dx});
        }
        break;
    case Fiber::Kind::Circle: {
        wraps_ = true;
        const double dx = fib.length / static_cast<double>(nx);
        for (std::size_t j = 0; j < nx; ++j) {
            x_[j] = static_cast<double>(j) * dx;
            x_weight_[j] = dx;
        }
        if (nx >= 2) {
            for (std::size_t j = 0; j < nx; ++j) x_links_.push_back({j, (j + 1) % nx, dx});
        }
        break;
    }
    }

    vertex_count_ = g.vertex_count();
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        for (std::size_t j = 0; j < nx; ++j) {
            NodeInfo n;
            n.kind = NodeInfo::Kind::Vertex;
            n.vertex = v;
            n.x_index = j;
            n.x = x_[j];
            info_.push_back(n);
        }
    }
    const std::size_t ns = options.nodes_per_edge;
    for (const Edge& e : g.edges()) {
        s_.push_back(edge_nodes(e, ns, options.spacing));
        tails_.push_back(e.tail);
        heads_.push_back(e.head);
        edge_base_.push_back(info_.size());
        for (std::size_t i = 1; i + 1 < ns; ++i) {
            for (std::size_t j = 0; j < nx; ++j) {
                NodeInfo n;
                n.kind = NodeInfo::Kind::EdgeInterior;
                n.edge = e.id;
                n.s_index = i;
                n.x_index = j;
                n.s = s_.back()[i];
                n.x = x_[j];
                info_.push_back(n);
            }
        }
    }
}

std::size_t Grid::vertex_node(VertexId v, std::size_t j) const {
    if (v >= vertex_count_ || j >= x_.size()) throw DomainError("grid node out of range");
    return v * x_.size() + j;
}

std::size_t Grid::node(EdgeId e, std::size_t i, std::size_t j) const {
    if (e >= s_.size() || i >= options_.nodes_per_edge || j >= x_.size()) {
        throw DomainError("grid node out of range");
    }
    if (i == 0) return vertex_node(tails_[e], j);
    if (i + 1 == options_.nodes_per_edge) return vertex_node(heads_[e], j);
    return edge_base_[e] + (i - 1) * x_.size() + j;
}

bool Grid::is_fiber_end(std::size_t j) const {
    return interval_ && x_.size() >= 2 && (j == 0 || j + 1 == x_.size());
}

std::size_t Grid::nearest_node(const StripComplex& sc, const PointOnComplex& p) const {
    check_point(sc, p);
    auto nearest_x = [&](double x) {
        std::size_t best = 0;
        double bd = INFINITY;
        for (std::size_t j = 0; j < x_.size(); ++j) {
            double d = std::abs(x - x_[j]);
            if (wraps_) d = std::min(d, sc.fiber().length - d);
            if (d < bd) {
                bd = d;
                best = j;
            }
        }
        return best;
    };
    if (const auto* mp = std::get_if<ManifoldPoint>(&p)) {
        return vertex_node(mp->vertex, nearest_x(mp->x));
    }
    const auto& sp = std::get<StripPoint>(p);
    const auto& s = s_.at(sp.edge);
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (std::abs(s[i] - sp.s) < std::abs(s[best] - sp.s)) best = i;
    }
    return node(sp.edge, best, nearest_x(sp.x));
}

Grid build_grid(const StripComplex& sc, const GridOptions& options) { return Grid(sc, options); }

std::vector<std::size_t> Discretization::free_dofs() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < pinned.size(); ++k) {
        if (!pinned[k]) out.push_back(k);
    }
    return out;
}

std::vector<std::ptrdiff_t> Discretization::free_index() const {
    std::vector<std::ptrdiff_t> out(pinned.size(), -1);
    std::ptrdiff_t c = 0;
    for (std::size_t k = 0; k < pinned.size(); ++k) {
        if (!pinned[k]) out[k] = c++;
    }
    return out;
}

Discretization assemble(const StripComplex& sc, const Grid& grid, const BoundaryPolicy& policy) {
    const MetricGraph& g = sc.graph();
    if (grid.edge_count() != g.edge_count() ||
        grid.dof_count() != g.vertex_count() * grid.fiber_count() +
                                g.edge_count() * (grid.nodes_per_edge() - 2) * grid.fiber_count()) {
        throw ConfigurationError("grid was not built from this complex");
    }
    const std::size_t n = grid.dof_count();
    const std::size_t ns = grid.nodes_per_edge();
    const std::size_t nx = grid.fiber_count();
    const auto& w = grid.fiber_weights();

    Field mass = Field::Zero(static_cast<Eigen::Index>(n));
    std::vector<std::vector<double>> s_mass(g.edge_count());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(n * 8);
    auto link = [&](std::size_t i, std::size_t j, double c) {
        const auto a = static_cast<Eigen::Index>(i);
        const auto b = static_cast<Eigen::Index>(j);
        trips.emplace_back(a, a, c);
        trips.emplace_back(b, b, c);
        trips.emplace_back(a, b, -c);
        trips.emplace_back(b, a, -c);
    };

    for (const Edge& e : g.edges()) {
        const EdgeCoefficients& co = sc.coefficients(e.id);
        const auto& s = grid.s_nodes(e.id);
        std::vector<double> a_cell(ns);
        s_mass[e.id].resize(ns);
        for (std::size_t i = 0; i < ns; ++i) {
            const double lo = i == 0 ? s[0] : 0.5 * (s[i - 1] + s[i]);
            const double hi = i + 1 == ns ? s[i] : 0.5 * (s[i] + s[i + 1]);
            s_mass[e.id][i] = co.m.integral_of_power(lo, hi, 1.0);
            a_cell[i] = co.a.integral_of_power(lo, hi, 1.0);
            if (!(s_mass[e.id][i] > 0.0) || !std::isfinite(s_mass[e.id][i])) {
                std::ostringstream os;
                os << "non-positive mass in cell (edge " << e.id << ", s-node " << i << ")";
                throw AssemblyError(os.str());
            }
        }
        for (std::size_t i = 0; i + 1 < ns; ++i) {
            const double ds = s[i + 1] - s[i];
            const double am = co.a(0.5 * (s[i] + s[i + 1]));
            for (std::size_t j = 0; j < nx; ++j) {
                link(grid.node(e.id, i, j), grid.node(e.id, i + 1, j), am * w[j] / ds);
            }
        }
        for (std::size_t i = 0; i < ns; ++i) {
            for (const auto& l : grid.fiber_links()) {
                link(grid.node(e.id, i, l.a), grid.node(e.id, i, l.b), a_cell[i] / l.dx);
            }
            for (std::size_t j = 0; j < nx; ++j) {
                mass[static_cast<Eigen::Index>(grid.node(e.id, i, j))] += s_mass[e.id][i] * w[j];
            }
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!(mass[static_cast<Eigen::Index>(k)] > 0.0)) {
            std::ostringstream os;
            const NodeInfo& ni = grid.info(k);
            os << "non-positive mass at node " << k << " (x-node " << ni.x_index << ")";
            throw AssemblyError(os.str());
        }
    }

    SparseMatrix K(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    K.setFromTriplets(trips.begin(), trips.end());
    K.makeCompressed();

    std::vector<bool> pinned(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        const NodeInfo& ni = grid.info(k);
        if (policy.graph == Boundary::Absorbing && ni.kind == NodeInfo::Kind::Vertex &&
            g.vertex(ni.vertex).truncation_boundary) {
            pinned[k] = true;
        }
        if (policy.fiber == Boundary::Absorbing && grid.is_fiber_end(ni.x_index)) pinned[k] = true;
    }
    if (std::all_of(pinned.begin(), pinned.end(), [](bool b) { return b; })) {
        throw ConfigurationError("every degree of freedom is pinned");
    }
    return Discretization{sc, grid, std::move(mass), std::move(K), std::move(pinned), policy,
                          std::move(s_mass)};
}

Discretization assemble(const StripComplex& sc, const GridOptions& options,
                        const BoundaryPolicy& policy) {
    return assemble(sc, build_grid(sc, options), policy);
}

namespace {

void check_size(const Discretization& d, const Field& f) {
    if (static_cast<std::size_t>(f.size()) != d.dof_count()) {
        throw ShapeError("field has " + std::to_string(f.size()) + " entries, expected " +
                         std::to_string(d.dof_count()));
    }
}

Field zero_pinned(const Discretization& d, const Field& f) {
    Field g = f;
    for (std::size_t k = 0; k < d.pinned.size(); ++k) {
        if (d.pinned[k]) g[static_cast<Eigen::Index>(k)] = 0.0;
    }
    return g;
}

}  // namespace

Field apply_generator(const Discretization& d, const Field& f) {
    check_size(d, f);
    Field g = zero_pinned(d, f);
    Field out = -(d.stiffness * g).cwiseQuotient(d.mass);
    for (std::size_t k = 0; k < d.pinned.size(); ++k) {
        if (d.pinned[k]) out[static_cast<Eigen::Index>(k)] = 0.0;
    }
    return out;
}

double energy(const Discretization& d, const Field& f) {
    check_size(d, f);
    Field g = zero_pinned(d, f);
    return g.dot(d.stiffness * g);
}

}  // namespace stripflow
