#include "stripflow/grid_metric.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "stripflow/error.hpp"

namespace stripflow {

namespace {

// 8-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 8> kGlNodes = {
    0.019855071751231856, 0.10166676129318664, 0.2372337950418355, 0.4082826787521751,
    0.5917173212478249,   0.7627662049581645,  0.8983332387068134, 0.9801449282487681};
constexpr std::array<double, 8> kGlWeights = {
    0.05061426814518813, 0.11119051722668724, 0.15685332293894363, 0.18134189168918100,
    0.18134189168918100, 0.15685332293894363, 0.11119051722668724, 0.05061426814518813};

}  // namespace

double measure(const Discretization& d, const std::vector<std::size_t>& cells) {
    double sum = 0.0;
    for (std::size_t c : cells) {
        if (c >= d.dof_count()) throw DomainError("cell outside the grid");
        sum += d.mass[static_cast<Eigen::Index>(c)];
    }
    return sum;
}

double measure(const StripComplex& sc, EdgeId e, double s0, double s1, double x0, double x1) {
    const Edge& edge = sc.graph().edge(e);
    if (!(s0 >= 0.0 && s1 <= edge.length && s0 <= s1)) throw DomainError("s-range outside the edge");
    const double width = sc.fiber().kind == Fiber::Kind::Point ? 1.0 : std::abs(x1 - x0);
    return sc.coefficients(e).m.integral_of_power(s0, s1, 1.0) * width;
}

double segment_length(const StripComplex& sc, EdgeId e, double s0, double x0, double s1,
                      double x1) {
    const Profile& phi = sc.coefficients(e).phi;
    const double euclid = std::hypot(s1 - s0, x1 - x0);
    if (euclid == 0.0) return 0.0;
    if (s0 == s1) return std::sqrt(phi(s0)) * euclid;
    double sum = 0.0;
    for (std::size_t k = 0; k < kGlNodes.size(); ++k) {
        sum += kGlWeights[k] * std::sqrt(phi(s0 + kGlNodes[k] * (s1 - s0)));
    }
    return sum * euclid;
}

std::vector<double> grid_distances(const StripComplex& sc, const Grid& grid, std::size_t source,
                                   int stencil) {
    if (source >= grid.dof_count()) throw DomainError("source outside the grid");
    if (stencil < 1) throw ParameterError("stencil must be at least 1");
    const std::size_t n = grid.dof_count();
    const std::size_t ns = grid.nodes_per_edge();
    const std::size_t nx = grid.fiber_count();
    const auto& xs = grid.fiber_nodes();
    const double period = sc.fiber().length;

    struct Link {
        std::size_t to;
        double w;
    };
    std::vector<std::vector<Link>> adj(n);
    const int sx = nx > 1 ? stencil : 0;
    for (EdgeId e = 0; e < grid.edge_count(); ++e) {
        const auto& s = grid.s_nodes(e);
        for (std::size_t i = 0; i < ns; ++i) {
            for (std::size_t j = 0; j < nx; ++j) {
                const std::size_t a = grid.node(e, i, j);
                for (int di = 0; di <= stencil; ++di) {
                    for (int dj = -sx; dj <= sx; ++dj) {
                        if (di == 0 && dj <= 0) continue;
                        if (std::gcd(di, std::abs(dj)) != 1) continue;
                        const auto i2 = static_cast<std::ptrdiff_t>(i) + di;
                        if (i2 >= static_cast<std::ptrdiff_t>(ns)) continue;
                        auto j2 = static_cast<std::ptrdiff_t>(j) + dj;
                        double x2;
                        if (grid.fiber_wraps()) {
                            const auto m = static_cast<std::ptrdiff_t>(nx);
                            if (2 * std::abs(dj) > m) continue;
                            x2 = xs[j] + dj * (period / static_cast<double>(nx));
                            j2 = ((j2 % m) + m) % m;
                        } else {
                            if (j2 < 0 || j2 >= static_cast<std::ptrdiff_t>(nx)) continue;
                            x2 = xs[static_cast<std::size_t>(j2)];
                        }
                        // Vertex layers are stored once; links inside them come from
                        // every incident edge, so keep them only from the first one.
                        if (di == 0 && (i == 0 || i + 1 == ns)) {
                            const VertexId v = i == 0 ? sc.graph().edge(e).tail
                                                      : sc.graph().edge(e).head;
                            if (sc.graph().incident(v).front() != e) continue;
                        }
                        const std::size_t b = grid.node(e, static_cast<std::size_t>(i2),
                                                        static_cast<std::size_t>(j2));
                        const double w = segment_length(sc, e, s[i], xs[j],
                                                        s[static_cast<std::size_t>(i2)], x2);
                        adj[a].push_back({b, w});
                        adj[b].push_back({a, w});
                    }
                }
            }
        }
    }

    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[source] = 0.0;
    pq.push({0.0, source});
    while (!pq.empty()) {
        auto [dv, v] = pq.top();
        pq.pop();
        if (dv > dist[v]) continue;
        for (const Link& l : adj[v]) {
            const double nd = dv + l.w;
            if (nd < dist[l.to]) {
                dist[l.to] = nd;
                pq.push({nd, l.to});
            }
        }
    }
    return dist;
}

double distance(const StripComplex& sc, const PointOnComplex& xi, const PointOnComplex& zeta,
                const DistanceOptions& resolution) {
    Grid grid(sc, resolution.grid);
    const std::size_t a = grid.nearest_node(sc, xi);
    const std::size_t b = grid.nearest_node(sc, zeta);
    if (a == b) return 0.0;
    return grid_distances(sc, grid, a, resolution.stencil)[b];
}

double ball_volume(const StripComplex& sc, const PointOnComplex& xi, double r,
                   const DistanceOptions& resolution) {
    if (!(r > 0.0)) throw ParameterError("ball radius must be positive");
    Discretization d = assemble(sc, resolution.grid);
    const std::size_t a = d.grid.nearest_node(sc, xi);
    const auto dist = grid_distances(sc, d.grid, a, resolution.stencil);
    double v = 0.0;
    for (std::size_t k = 0; k < dist.size(); ++k) {
        if (dist[k] <= r) v += d.mass[static_cast<Eigen::Index>(k)];
    }
    return v;
}

}  // namespace stripflow
