#include "stripflow/strip_complex.hpp"

#include <algorithm>
#include <cmath>

#include "stripflow/error.hpp"

namespace stripflow {

Fiber Fiber::circle(double circumference) {
    if (!(circumference > 0.0)) throw ParameterError("circle fiber needs L > 0");
    return {Kind::Circle, circumference};
}

Fiber Fiber::interval(double length) {
    if (!(length > 0.0)) throw ParameterError("interval fiber needs L > 0");
    return {Kind::Interval, length};
}

bool Fiber::contains(double x) const {
    switch (kind) {
        case Kind::Point:
            return x == 0.0;
        case Kind::Circle:
            return x >= 0.0 && x < length;
        case Kind::Interval:
            return std::abs(x) <= 0.5 * length * (1.0 + 1e-12);
    }
    return false;
}

StripComplex::StripComplex(MetricGraph graph, Fiber fiber, std::vector<EdgeCoefficients> coeffs,
                           std::optional<TreebolicParams> treebolic)
    : graph_(std::move(graph)),
      fiber_(fiber),
      coeffs_(std::move(coeffs)),
      treebolic_(treebolic) {
    if (coeffs_.size() != graph_.edge_count()) {
        throw ParameterError("one coefficient set per edge expected");
    }
    for (const Edge& e : graph_.edges()) {
        const EdgeCoefficients& c = coeffs_[e.id];
        if (c.fiber_dimension != fiber_.dimension()) {
            throw ParameterError("coefficient fiber dimension does not match the fiber on edge " +
                                 std::to_string(e.id));
        }
        c.phi.validate(e.length);
        c.psi.validate(e.length);
        c.a.validate(e.length);
        c.m.validate(e.length);
    }
}

StripPoint to_strip_point(const StripComplex& sc, const PointOnComplex& p) {
    check_point(sc, p);
    if (const auto* sp = std::get_if<StripPoint>(&p)) return *sp;
    const auto& mp = std::get<ManifoldPoint>(p);
    GraphPoint gp = GraphPoint::at_vertex(sc.graph(), mp.vertex);
    return {gp.edge, gp.s, mp.x};
}

void check_point(const StripComplex& sc, const PointOnComplex& p) {
    double x = 0.0;
    if (const auto* sp = std::get_if<StripPoint>(&p)) {
        if (sp->edge >= sc.graph().edge_count()) throw DomainError("point on unknown edge");
        double l = sc.graph().edge(sp->edge).length;
        if (!(sp->s >= 0.0 && sp->s <= l)) throw DomainError("s outside the edge");
        x = sp->x;
    } else {
        const auto& mp = std::get<ManifoldPoint>(p);
        sc.graph().vertex(mp.vertex);
        x = mp.x;
    }
    if (!sc.fiber().contains(x)) throw DomainError("x outside the fiber");
}

namespace {

void check_treebolic(const TreebolicParams& t) {
    if (t.p < 1) throw ParameterError("treebolic space needs p >= 1");
    if (!(t.q > 1.0)) throw ParameterError("treebolic space needs q > 1");
    if (!(t.beta > 0.0)) throw ParameterError("treebolic space needs beta > 0");
    if (!(t.R > 0.0)) throw ParameterError("treebolic space needs R > 0");
    if (t.k_min >= t.k_max) throw ParameterError("treebolic space needs k_min < k_max");
}

}  // namespace

StripComplex build_treebolic(const TreebolicParams& params) {
    check_treebolic(params);
    MetricGraph g = build_tree(params.p, params.q, params.k_min, params.k_max);
    std::vector<EdgeCoefficients> coeffs;
    coeffs.reserve(g.edge_count());
    for (const Edge& e : g.edges()) {
        const double offset = *e.global_offset;
        const double weight = std::pow(params.beta, *e.level);
        Profile phi = Profile::power(1.0, -2.0, offset);
        Profile psi = Profile::power(weight, params.alpha, offset);
        coeffs.push_back(EdgeCoefficients::from_geometry(phi, psi, 1));
    }
    return StripComplex(std::move(g), Fiber::interval(2.0 * params.R), std::move(coeffs), params);
}

StripComplex build_tree_complex(int p, double q, double alpha, double beta, int k_min, int k_max) {
    TreebolicParams t{p, q, alpha, beta, k_min, k_max, 1.0};
    check_treebolic(t);
    MetricGraph g = build_tree(p, q, k_min, k_max);
    std::vector<EdgeCoefficients> coeffs;
    for (const Edge& e : g.edges()) {
        const double offset = *e.global_offset;
        const double weight = std::pow(beta, *e.level);
        // n = 0: a = psi phi^(-1/2) = psi sigma, so psi = beta^k sigma^(alpha-1).
        Profile phi = Profile::power(1.0, -2.0, offset);
        Profile psi = Profile::power(weight, alpha - 1.0, offset);
        coeffs.push_back(EdgeCoefficients::from_geometry(phi, psi, 0));
    }
    return StripComplex(std::move(g), Fiber::point(), std::move(coeffs));
}

StripComplex build_uniform_complex(MetricGraph graph, Fiber fiber, const Profile& phi,
                                   const Profile& psi) {
    std::vector<EdgeCoefficients> coeffs(graph.edge_count(),
                                         EdgeCoefficients::from_geometry(phi, psi, fiber.dimension()));
    return StripComplex(std::move(graph), fiber, std::move(coeffs));
}

HalfPlanePoint to_half_plane(const StripComplex& sc, const StripPoint& p) {
    if (!sc.treebolic()) throw DomainError("not a treebolic complex");
    check_point(sc, p);
    const Edge& e = sc.graph().edge(p.edge);
    return {p.x, *e.global_offset + p.s, p.edge};
}

StripPoint from_half_plane(const StripComplex& sc, const HalfPlanePoint& z) {
    if (!sc.treebolic()) throw DomainError("not a treebolic complex");
    const Edge& e = sc.graph().edge(z.edge);
    const double lo = *e.global_offset;
    const double hi = lo + e.length;
    if (!(z.y >= lo * (1 - 1e-14) && z.y <= hi * (1 + 1e-14))) {
        throw DomainError("height outside the strip of the given edge");
    }
    StripPoint p{z.edge, std::clamp(z.y - lo, 0.0, e.length), z.x};
    check_point(sc, p);
    return p;
}

namespace {

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double smoothstep_derivative(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return 30.0 * t * t * (t - 1.0) * (t - 1.0);
}

}  // namespace

HorocycleBump::HorocycleBump(double q) : q_(q), lo_(1.0 + q / 8.0), hi_(q - 1.0 / 8.0) {
    if (!(lo_ < hi_)) {
        throw ParameterError("horocycle bump needs q > 9/7 so the flat windows do not overlap");
    }
}

double HorocycleBump::period_value(double u) const {
    return 1.0 + (q_ - 1.0) * smoothstep((u - lo_) / (hi_ - lo_));
}

double HorocycleBump::period_derivative(double u) const {
    return (q_ - 1.0) * smoothstep_derivative((u - lo_) / (hi_ - lo_)) / (hi_ - lo_);
}

namespace {

// y = q^k u with u in [1, q).
std::pair<double, double> split_scale(double y, double q) {
    double k = std::floor(std::log(y) / std::log(q));
    double scale = std::pow(q, k);
    double u = y / scale;
    if (u >= q) {
        scale *= q;
        u = y / scale;
    } else if (u < 1.0) {
        scale /= q;
        u = y / scale;
    }
    return {scale, u};
}

}  // namespace

double HorocycleBump::operator()(double y) const {
    if (!(y > 0.0)) throw DomainError("eta is defined for y > 0");
    auto [scale, u] = split_scale(y, q_);
    return scale * period_value(u);
}

double HorocycleBump::derivative(double y) const {
    if (!(y > 0.0)) throw DomainError("eta is defined for y > 0");
    auto [scale, u] = split_scale(y, q_);
    (void)scale;
    return period_derivative(u);
}

TreebolicExhaustion::TreebolicExhaustion(const StripComplex& sc)
    : sc_(sc), eta_(sc.treebolic() ? sc.treebolic()->q : 2.0) {
    if (!sc.treebolic()) throw DomainError("treebolic exhaustion needs a treebolic complex");
    const MetricGraph& g = sc.graph();
    // Reference end: first children from the root.
    std::vector<bool> on_geodesic(g.vertex_count(), false);
    VertexId v = 0;
    on_geodesic[v] = true;
    for (;;) {
        auto children = tree_child_edges(g, v);
        if (children.empty()) break;
        v = g.edge(children.front()).head;
        on_geodesic[v] = true;
    }
    branch_level_.resize(g.edge_count());
    for (const Edge& e : g.edges()) {
        if (on_geodesic[e.head]) continue;
        VertexId w = e.head;
        while (!on_geodesic[w]) {
            auto parent = tree_parent_edge(g, w);
            if (!parent) throw DomainError("reference end is not in the truncated graph");
            w = g.edge(*parent).tail;
        }
        branch_level_[e.id] = *g.vertex(w).level;
    }
}

double TreebolicExhaustion::delta(double x, double y) {
    return std::log(1.0 + (1.0 + x * x + y * y) / y);
}

double TreebolicExhaustion::kappa(const StripPoint& p) const {
    const auto& level = branch_level_.at(p.edge);
    if (!level) return 0.0;
    const Edge& e = sc_.graph().edge(p.edge);
    double y = *e.global_offset + p.s;
    return std::log(eta_(std::pow(eta_.q(), -*level) * y));
}

double TreebolicExhaustion::operator()(const PointOnComplex& p) const {
    StripPoint sp = to_strip_point(sc_, p);
    const Edge& e = sc_.graph().edge(sp.edge);
    double y = *e.global_offset + sp.s;
    return delta(sp.x, eta_(y)) + kappa(sp);
}

}  // namespace stripflow
