#include "stripflow/metric_graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <sstream>

#include "stripflow/error.hpp"

namespace stripflow {

MetricGraph::MetricGraph(std::vector<Vertex> vertices, std::vector<Edge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
    if (vertices_.empty()) {
        throw ParameterError("graph needs at least one vertex");
    }
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        if (vertices_[i].id != i) {
            throw ParameterError("vertex ids must be 0..n-1 in order");
        }
    }
    adjacency_.assign(vertices_.size(), {});
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        std::ostringstream where;
        where << "edge " << i;
        if (e.id != i) {
            throw ParameterError(where.str() + ": edge ids must be 0..m-1 in order");
        }
        if (e.tail >= vertices_.size() || e.head >= vertices_.size()) {
            throw ParameterError(where.str() + ": endpoint out of range");
        }
        if (e.tail == e.head) {
            throw ParameterError(where.str() + ": loops are not allowed");
        }
        if (!(e.length > 0.0) || !std::isfinite(e.length)) {
            throw ParameterError(where.str() + ": length must be positive");
        }
        adjacency_[e.tail].push_back(i);
        adjacency_[e.head].push_back(i);
    }
    // Connectivity.
    std::vector<bool> seen(vertices_.size(), false);
    std::vector<VertexId> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
        VertexId v = stack.back();
        stack.pop_back();
        for (EdgeId e : adjacency_[v]) {
            VertexId w = opposite(e, v);
            if (!seen[w]) {
                seen[w] = true;
                ++reached;
                stack.push_back(w);
            }
        }
    }
    if (reached != vertices_.size()) {
        throw ParameterError("graph is not connected");
    }
    if (vertices_.size() > 1) {
        for (const auto& adj : adjacency_) {
            if (adj.empty()) throw ParameterError("isolated vertex");
        }
    }
}

const Vertex& MetricGraph::vertex(VertexId v) const {
    if (v >= vertices_.size()) throw DomainError("unknown vertex " + std::to_string(v));
    return vertices_[v];
}

const Edge& MetricGraph::edge(EdgeId e) const {
    if (e >= edges_.size()) throw DomainError("unknown edge " + std::to_string(e));
    return edges_[e];
}

const std::vector<EdgeId>& MetricGraph::incident(VertexId v) const {
    if (v >= adjacency_.size()) throw DomainError("unknown vertex " + std::to_string(v));
    return adjacency_[v];
}

VertexId MetricGraph::opposite(EdgeId e, VertexId v) const {
    const Edge& ed = edge(e);
    if (ed.tail == v) return ed.head;
    if (ed.head == v) return ed.tail;
    throw DomainError("vertex is not an endpoint of the edge");
}

double MetricGraph::min_edge_length() const {
    double m = std::numeric_limits<double>::infinity();
    for (const Edge& e : edges_) m = std::min(m, e.length);
    return m;
}

double MetricGraph::max_edge_length() const {
    double m = 0.0;
    for (const Edge& e : edges_) m = std::max(m, e.length);
    return m;
}

GraphPoint GraphPoint::at_vertex(const MetricGraph& g, VertexId v) {
    const auto& inc = g.incident(v);
    if (inc.empty()) throw DomainError("vertex has no incident edge");
    const Edge& e = g.edge(inc.front());
    return {e.id, e.tail == v ? 0.0 : e.length};
}

namespace {

MetricGraph build_branching(int p, int k_min, int k_max,
                            const std::function<double(int)>& length_of_level,
                            const std::function<std::optional<double>(int)>& offset_of_level) {
    if (p < 1) throw ParameterError("tree needs p >= 1");
    if (k_min >= k_max) throw ParameterError("tree needs k_min < k_max");
    if (k_max - k_min > 24) throw ParameterError("tree depth too large");
    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
    vertices.push_back({0, true, k_min});
    std::vector<VertexId> frontier{0};
    for (int k = k_min + 1; k <= k_max; ++k) {
        std::vector<VertexId> next;
        next.reserve(frontier.size() * static_cast<std::size_t>(p));
        for (VertexId parent : frontier) {
            for (int c = 0; c < p; ++c) {
                VertexId child = vertices.size();
                vertices.push_back({child, k == k_max, k});
                Edge e;
                e.id = edges.size();
                e.tail = parent;
                e.head = child;
                e.length = length_of_level(k);
                e.level = k;
                e.global_offset = offset_of_level(k);
                edges.push_back(e);
                next.push_back(child);
            }
        }
        frontier = std::move(next);
    }
    return MetricGraph(std::move(vertices), std::move(edges));
}

}  // namespace

MetricGraph build_tree(int p, double q, int k_min, int k_max) {
    if (!(q > 1.0) || !std::isfinite(q)) throw ParameterError("tree needs q > 1");
    return build_branching(
        p, k_min, k_max, [q](int k) { return std::pow(q, k - 1) * (q - 1.0); },
        [q](int k) { return std::optional<double>(std::pow(q, k - 1)); });
}

MetricGraph build_regular_tree(int p, int k_min, int k_max, double edge_length) {
    if (!(edge_length > 0.0)) throw ParameterError("edge length must be positive");
    return build_branching(
        p, k_min, k_max, [edge_length](int) { return edge_length; },
        [](int) { return std::optional<double>(); });
}

MetricGraph build_path(const std::vector<double>& lengths) {
    if (lengths.empty()) throw ParameterError("path needs at least one edge");
    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
    for (std::size_t i = 0; i <= lengths.size(); ++i) {
        vertices.push_back({i, i == 0 || i == lengths.size(), std::nullopt});
    }
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        Edge e;
        e.id = i;
        e.tail = i;
        e.head = i + 1;
        e.length = lengths[i];
        edges.push_back(e);
    }
    return MetricGraph(std::move(vertices), std::move(edges));
}

MetricGraph build_star(const std::vector<double>& lengths) {
    if (lengths.empty()) throw ParameterError("star needs at least one edge");
    std::vector<Vertex> vertices{{0, false, std::nullopt}};
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        vertices.push_back({i + 1, true, std::nullopt});
        Edge e;
        e.id = i;
        e.tail = 0;
        e.head = i + 1;
        e.length = lengths[i];
        edges.push_back(e);
    }
    return MetricGraph(std::move(vertices), std::move(edges));
}

std::optional<EdgeId> tree_parent_edge(const MetricGraph& g, VertexId v) {
    for (EdgeId e : g.incident(v)) {
        if (g.edge(e).head == v) return e;
    }
    return std::nullopt;
}

std::vector<EdgeId> tree_child_edges(const MetricGraph& g, VertexId v) {
    std::vector<EdgeId> out;
    for (EdgeId e : g.incident(v)) {
        if (g.edge(e).tail == v) out.push_back(e);
    }
    return out;
}

VertexId tree_origin(const MetricGraph& g) {
    VertexId v = 0;
    if (!g.vertex(0).level) throw DomainError("graph was not built as a tree");
    while (*g.vertex(v).level < 0) {
        auto children = tree_child_edges(g, v);
        if (children.empty()) break;
        v = g.edge(children.front()).head;
    }
    return v;
}

namespace {

void check_point(const MetricGraph& g, const GraphPoint& p) {
    if (p.edge >= g.edge_count()) {
        throw DomainError("point on unknown edge " + std::to_string(p.edge));
    }
    double l = g.edge(p.edge).length;
    if (!(p.s >= 0.0 && p.s <= l)) throw DomainError("point outside its edge");
}

std::vector<double> dijkstra(const MetricGraph& g, std::vector<double> dist,
                             const std::function<double(EdgeId)>& weight) {
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (VertexId v = 0; v < dist.size(); ++v) {
        if (std::isfinite(dist[v])) pq.emplace(dist[v], v);
    }
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[v]) continue;
        for (EdgeId e : g.incident(v)) {
            VertexId w = g.opposite(e, v);
            double nd = d + weight(e);
            if (nd < dist[w]) {
                dist[w] = nd;
                pq.emplace(nd, w);
            }
        }
    }
    return dist;
}

}  // namespace

std::vector<double> vertex_distances(const MetricGraph& g, const GraphPoint& from) {
    check_point(g, from);
    const Edge& e = g.edge(from.edge);
    std::vector<double> init(g.vertex_count(), std::numeric_limits<double>::infinity());
    init[e.tail] = from.s;
    init[e.head] = std::min(init[e.head], e.length - from.s);
    return dijkstra(g, std::move(init), [&g](EdgeId id) { return g.edge(id).length; });
}

double graph_distance(const MetricGraph& g, const GraphPoint& a, const GraphPoint& b) {
    check_point(g, b);
    auto d = vertex_distances(g, a);
    const Edge& eb = g.edge(b.edge);
    double best = std::min(d[eb.tail] + b.s, d[eb.head] + eb.length - b.s);
    if (a.edge == b.edge) best = std::min(best, std::abs(a.s - b.s));
    return best;
}

bool CompletenessReport::all_complete() const {
    return std::all_of(rays.begin(), rays.end(),
                       [](const RayCompleteness& r) { return r.verdict == Completeness::Complete; });
}

namespace {

// Integral of sqrt(phi) over sigma in [lo, hi] for a symbolic profile written
// in the global coordinate; infinite limits allowed.
double sqrt_phi_integral(const Profile& phi, double lo, double hi) {
    if (phi.kind() == Profile::Kind::Constant) {
        return std::sqrt(phi.coefficient()) * (hi - lo);
    }
    double c = std::sqrt(phi.coefficient());
    double g = 0.5 * phi.exponent() + 1.0;
    auto prim = [&](double x) {
        if (std::abs(g) < 1e-14) return std::log(x);
        return std::pow(x, g) / g;
    };
    if (std::isinf(hi)) {
        if (g >= -1e-14) return std::numeric_limits<double>::infinity();
        return c * (0.0 - prim(lo));
    }
    if (lo <= 0.0) {
        if (g <= 1e-14) return std::numeric_limits<double>::infinity();
        return c * prim(hi);
    }
    return c * (prim(hi) - prim(lo));
}

}  // namespace

CompletenessReport completeness_indicator(const MetricGraph& g,
                                          const std::vector<EdgeCoefficients>& coeffs) {
    if (coeffs.size() != g.edge_count()) {
        throw ShapeError("one EdgeCoefficients entry per edge expected");
    }
    CompletenessReport report;
    for (const Vertex& v : g.vertices()) {
        if (!v.truncation_boundary) continue;
        RayCompleteness ray;
        ray.boundary_vertex = v.id;
        const auto& inc = g.incident(v.id);
        if (inc.empty()) {
            report.rays.push_back(ray);
            continue;
        }
        const Edge& e = g.edge(inc.front());
        const Profile& phi = coeffs[e.id].phi;
        // +1: extension continues past the head (sigma grows), -1: past the tail.
        const int dir = e.head == v.id ? +1 : -1;
        // Edge on the far side of e, continuing the same line.
        VertexId far = dir > 0 ? e.tail : e.head;
        double ratio = 1.0;
        for (EdgeId f : g.incident(far)) {
            if (f == e.id) continue;
            const Edge& ef = g.edge(f);
            bool continues = dir > 0 ? ef.head == far : ef.tail == far;
            if (continues) {
                ratio = e.length / ef.length;
                break;
            }
        }
        if (!phi.symbolic()) {
            report.rays.push_back(ray);
            continue;
        }
        const bool has_sigma = phi.kind() == Profile::Kind::Power;
        const double sigma_b = dir > 0 ? phi.offset() + e.length : phi.offset();
        // Leading terms of the extension.
        double len = e.length * ratio;
        double sigma = sigma_b;
        for (int j = 0; j < 5; ++j) {
            double next = sigma + dir * len;
            if (has_sigma && next <= 0.0) break;
            double lo = std::min(sigma, next);
            double hi = std::max(sigma, next);
            ray.leading_terms.push_back(has_sigma ? sqrt_phi_integral(phi, lo, hi)
                                                  : std::sqrt(phi.coefficient()) * len);
            sigma = next;
            len *= ratio;
        }
        const double inf = std::numeric_limits<double>::infinity();
        if (!has_sigma) {
            ray.total = ratio >= 1.0 ? inf : std::sqrt(phi.coefficient()) * e.length * ratio / (1.0 - ratio);
        } else if (ratio >= 1.0) {
            if (dir > 0) {
                ray.total = sqrt_phi_integral(phi, sigma_b, inf);
            } else {
                // Descending without bound would cross sigma = 0.
                report.rays.push_back(ray);
                continue;
            }
        } else {
            double span = e.length * ratio / (1.0 - ratio);
            double end = sigma_b + dir * span;
            if (dir < 0 && end < -1e-9 * sigma_b) {
                report.rays.push_back(ray);
                continue;
            }
            if (dir < 0 && end <= 1e-9 * sigma_b) end = 0.0;
            ray.total = dir > 0 ? sqrt_phi_integral(phi, sigma_b, end)
                                : sqrt_phi_integral(phi, end, sigma_b);
        }
        ray.verdict = std::isinf(ray.total) ? Completeness::Complete : Completeness::Incomplete;
        report.rays.push_back(ray);
    }
    return report;
}

namespace {

// C^2 smoothstep on [0, 1] and its antiderivative.
double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double smoothstep_integral(double t) {
    t = std::clamp(t, 0.0, 1.0);
    double t4 = t * t * t * t;
    return t4 * (t * (t - 3.0) + 2.5);
}

}  // namespace

EdgeExhaustion::EdgeExhaustion(const MetricGraph& g, double epsilon, VertexId origin)
    : epsilon_(epsilon) {
    if (!(epsilon > 0.0) || !(8.0 * epsilon < g.min_edge_length())) {
        throw ParameterError("edge exhaustion needs 0 < 8 epsilon < min edge length");
    }
    g.vertex(origin);
    lengths_.reserve(g.edge_count());
    for (const Edge& e : g.edges()) lengths_.push_back(e.length);

    std::vector<double> init(g.vertex_count(), std::numeric_limits<double>::infinity());
    init[origin] = 0.0;
    rho_vertex_ = dijkstra(g, std::move(init), [this](EdgeId e) {
        return cutoff_integral(lengths_[e], lengths_[e]);
    });

    scale_.resize(g.edge_count());
    low_value_.resize(g.edge_count());
    increasing_.resize(g.edge_count());
    for (const Edge& e : g.edges()) {
        double rt = rho_vertex_[e.tail];
        double rh = rho_vertex_[e.head];
        double w = cutoff_integral(e.length, e.length);
        increasing_[e.id] = rh >= rt;
        low_value_[e.id] = std::min(rt, rh);
        scale_[e.id] = std::min(1.0, std::abs(rh - rt) / w);
    }
}

double EdgeExhaustion::cutoff(double s, double l) const {
    const double eps = epsilon_;
    if (s <= eps || s >= l - eps) return 0.0;
    if (s < 2.0 * eps) return smoothstep((s - eps) / eps);
    if (s > l - 2.0 * eps) return smoothstep((l - eps - s) / eps);
    return 1.0;
}

double EdgeExhaustion::cutoff_integral(double s, double l) const {
    const double eps = epsilon_;
    s = std::clamp(s, 0.0, l);
    double rise = eps * smoothstep_integral((s - eps) / eps);
    double flat = std::clamp(s, 2.0 * eps, l - 2.0 * eps) - 2.0 * eps;
    // Falling ramp: integral of smoothstep((l - eps - u)/eps) for u up to s.
    double fall = 0.0;
    if (s > l - 2.0 * eps) {
        double full = 0.5 * eps;
        double remaining = eps * smoothstep_integral((l - eps - s) / eps);
        fall = full - remaining;
    }
    return rise + flat + fall;
}

double EdgeExhaustion::value(EdgeId e, double s) const {
    double l = lengths_.at(e);
    if (s < 0.0 || s > l) throw DomainError("point outside its edge");
    double a = cutoff_integral(s, l);
    double from_low = increasing_[e] ? a : cutoff_integral(l, l) - a;
    return low_value_[e] + scale_[e] * from_low;
}

double EdgeExhaustion::derivative(EdgeId e, double s) const {
    double l = lengths_.at(e);
    double d = scale_[e] * cutoff(s, l);
    return increasing_[e] ? d : -d;
}

EdgeExhaustion::Samples EdgeExhaustion::sample(std::size_t nodes_per_edge) const {
    if (nodes_per_edge < 2) throw ParameterError("need at least two nodes per edge");
    Samples out;
    for (EdgeId e = 0; e < lengths_.size(); ++e) {
        std::vector<double> s(nodes_per_edge), v(nodes_per_edge);
        for (std::size_t i = 0; i < nodes_per_edge; ++i) {
            s[i] = lengths_[e] * static_cast<double>(i) / static_cast<double>(nodes_per_edge - 1);
            v[i] = value(e, s[i]);
        }
        out.s.push_back(std::move(s));
        out.values.push_back(std::move(v));
    }
    return out;
}

EdgeExhaustion edge_exhaustion(const MetricGraph& g, double epsilon, VertexId origin) {
    return EdgeExhaustion(g, epsilon, origin);
}

}  // namespace stripflow
