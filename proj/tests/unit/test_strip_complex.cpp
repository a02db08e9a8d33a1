#include <gtest/gtest.h>

#include <cmath>
#include <optional>

#include "stripflow/assembly.hpp"
#include "stripflow/error.hpp"
#include "stripflow/exhaustion.hpp"
#include "stripflow/grid_metric.hpp"
#include "stripflow/profile.hpp"
#include "stripflow/strip_complex.hpp"

using namespace stripflow;

namespace {

StripComplex treebolic(int p, double alpha, double beta, int kmin, int kmax, double R) {
    TreebolicParams tp;
    tp.p = p;
    tp.alpha = alpha;
    tp.beta = beta;
    tp.k_min = kmin;
    tp.k_max = kmax;
    tp.R = R;
    return build_treebolic(tp);
}

EdgeId edge_at_level(const StripComplex& sc, int level) {
    for (const Edge& e : sc.graph().edges())
        if (e.level == level) return e.id;
    throw std::runtime_error("no edge at level");
}

}  // namespace

TEST(ProfileTest, PowerAndIntegrals) {
    const Profile f = Profile::power(2.0, -2.0, 1.0);
    EXPECT_DOUBLE_EQ(f(0.0), 2.0);
    EXPECT_DOUBLE_EQ(f(1.0), 0.5);
    EXPECT_DOUBLE_EQ(f.derivative(1.0), -0.5);
    // int_1^2 2 sigma^-2 dsigma = 1
    EXPECT_NEAR(f.integral_of_power(0.0, 1.0, 1.0), 1.0, 1e-14);
    // int_1^2 (2 sigma^-2)^(1/2) = 2 sqrt(2) ln 2 / 2
    EXPECT_NEAR(f.integral_of_power(0.0, 1.0, 0.5), std::sqrt(2.0) * std::log(2.0), 1e-14);
    const Profile g = f * Profile::power(3.0, 1.0, 1.0);
    EXPECT_TRUE(g.symbolic());
    EXPECT_DOUBLE_EQ(g(1.0), 6.0 / 2.0);
    EXPECT_DOUBLE_EQ(f.pow(0.5)(1.0), 0.5 * std::sqrt(2.0));
    EXPECT_THROW(Profile::constant(-1.0), ParameterError);
}

TEST(ProfileTest, TabulatedIsLogLinear) {
    const Profile t = Profile::tabulated({0.0, 1.0}, {1.0, std::exp(2.0)});
    EXPECT_NEAR(t(0.5), std::exp(1.0), 1e-12);
    EXPECT_NEAR(t.derivative(0.5), 2.0 * std::exp(1.0), 1e-12);
    EXPECT_NEAR(t.integral_of_power(0.0, 1.0, 1.0), (std::exp(2.0) - 1.0) / 2.0, 1e-6);
    EXPECT_THROW(Profile::tabulated({0.0, 1.0}, {1.0, 0.0}), ParameterError);
}

TEST(Treebolic, HyperbolicMeasure) {
    const StripComplex sc = treebolic(2, 0.0, 1.0, 0, 2, 1.0);
    const EdgeId e = edge_at_level(sc, 1);
    const auto& c = sc.coefficients(e);
    for (double s : {0.0, 0.3, 1.0}) {
        const double sigma = 1.0 + s;
        EXPECT_NEAR(c.m(s), std::pow(sigma, -2.0), 1e-14);
        EXPECT_NEAR(c.a(s), 1.0, 1e-14);
        EXPECT_NEAR(c.phi(s), std::pow(sigma, -2.0), 1e-14);
    }
}

TEST(Treebolic, SlicedPlaneHasLevelFreeEnergy) {
    const StripComplex sc = treebolic(1, 0.0, 1.0, -2, 2, 1.0);
    for (const Edge& e : sc.graph().edges()) {
        const double sigma = *e.global_offset + 0.25 * e.length;
        EXPECT_NEAR(sc.coefficients(e.id).a(0.25 * e.length), 1.0, 1e-14);
        EXPECT_NEAR(sc.coefficients(e.id).m(0.25 * e.length), std::pow(sigma, -2.0), 1e-14);
    }
}

TEST(Treebolic, AlphaTwoGivesLebesgueMeasure) {
    const StripComplex sc = treebolic(2, 2.0, 0.5, -1, 2, 1.0);
    for (const Edge& e : sc.graph().edges())
        for (double s : {0.0, 0.5 * e.length, e.length})
            EXPECT_NEAR(sc.coefficients(e.id).m(s), std::pow(0.5, *e.level), 1e-14);
}

TEST(Treebolic, BifurcationRatioIsBeta) {
    const double beta = 0.5;
    const StripComplex sc = treebolic(2, 1.0, beta, -1, 2, 1.0);
    const MetricGraph& g = sc.graph();
    for (const Vertex& v : g.vertices()) {
        const auto parent = tree_parent_edge(g, v.id);
        if (!parent || v.truncation_boundary) continue;
        const double below = sc.coefficients(*parent).a(g.edge(*parent).length);
        for (EdgeId c : tree_child_edges(g, v.id)) EXPECT_NEAR(sc.coefficients(c).a(0.0) / below, beta, 1e-14);
    }
}

TEST(Measure, Strips) {
    const StripComplex sc = treebolic(2, 0.0, 1.0, 0, 2, 1.0);
    const EdgeId e = edge_at_level(sc, 1);
    EXPECT_DOUBLE_EQ(measure(sc, e, 0.0, 0.0, 0.0, 1.0), 0.0);
    EXPECT_NEAR(measure(sc, e, 0.0, 1.0, 0.0, 1.0), 0.5, 1e-13);
    EXPECT_NEAR(measure(sc, e, 0.0, 1.0, -1.0, 1.0), 1.0, 1e-13);
    const Discretization d = assemble(sc, GridOptions{5, 5});
    EXPECT_DOUBLE_EQ(measure(d, {}), 0.0);
}

TEST(Measure, GridMassMatchesExactVolume) {
    const StripComplex sc = treebolic(2, 0.0, 1.0, -1, 2, 1.0);
    double exact = 0.0;
    for (const Edge& e : sc.graph().edges()) exact += measure(sc, e.id, 0.0, e.length, -1.0, 1.0);
    const Discretization d = assemble(sc, GridOptions{5, 5});
    EXPECT_NEAR(d.total_mass(), exact, 1e-12 * exact);
}

TEST(Distance, VerticalHyperbolicSegment) {
    const StripComplex sc = treebolic(2, 0.0, 1.0, 0, 2, 1.0);
    const EdgeId e = edge_at_level(sc, 1);
    const StripPoint a{e, 0.0, 0.0}, b{e, 1.0, 0.0};
    EXPECT_NEAR(segment_length(sc, e, 0.0, 0.0, 1.0, 0.0), std::log(2.0), 1e-12);
    EXPECT_DOUBLE_EQ(distance(sc, a, a), 0.0);
    DistanceOptions fine;
    fine.grid = GridOptions{33, 33};
    const double dist = distance(sc, a, b, fine);
    EXPECT_GE(dist, std::log(2.0) - 1e-12);
    EXPECT_LE(dist, 1.02 * std::log(2.0));
}

TEST(Distance, CrossingTheBifurcationManifold) {
    const StripComplex sc = treebolic(2, 0.0, 1.0, -1, 1, 1.0);
    const MetricGraph& g = sc.graph();
    const VertexId o = tree_origin(g);
    const auto children = tree_child_edges(g, o);
    // sigma = sqrt(2) is a node of the geometric 17-node grid on [1, 2]
    const double s = std::sqrt(2.0) - 1.0;
    const StripPoint a{children[0], s, 0.0}, b{children[1], s, 0.0};
    DistanceOptions res;
    res.grid = GridOptions{17, 17};
    const double via = distance(sc, a, ManifoldPoint{o, 0.0}, res) + distance(sc, ManifoldPoint{o, 0.0}, b, res);
    const double direct = distance(sc, a, b, res);
    EXPECT_GE(direct, std::log(2.0) - 1e-9);
    EXPECT_LE(direct, via + 1e-9);
}

TEST(BallVolume, MonotoneAndPlanarNearInteriorPoint) {
    const StripComplex sc = treebolic(2, 2.0, 1.0, 0, 1, 2.0);
    const StripPoint xi{edge_at_level(sc, 1), 0.5, 0.0};
    DistanceOptions res;
    res.grid = GridOptions{65, 65};
    DistanceOptions finer;
    finer.grid = GridOptions{129, 129};
    const double v0 = ball_volume(sc, xi, 1e-9, res);
    EXPECT_LT(ball_volume(sc, xi, 1e-9, finer), 0.3 * v0);
    const double v1 = ball_volume(sc, xi, 0.2, res);
    const double v2 = ball_volume(sc, xi, 0.4, res);
    EXPECT_LE(v1, v2);
    const double exponent = std::log(v2 / v1) / std::log(2.0);
    EXPECT_GE(exponent, 1.8);
    EXPECT_LE(exponent, 2.2);
}

TEST(Points, ValidationAndHalfPlane) {
    const StripComplex sc = treebolic(2, 0.0, 1.0, -1, 1, 1.0);
    EXPECT_THROW(check_point(sc, StripPoint{0, 0.0, 5.0}), DomainError);
    EXPECT_THROW(check_point(sc, StripPoint{99, 0.0, 0.0}), DomainError);
    EXPECT_NO_THROW(check_point(sc, ManifoldPoint{0, 0.5}));
    const StripPoint p{edge_at_level(sc, 1), 0.25, 0.3};
    const HalfPlanePoint z = to_half_plane(sc, p);
    EXPECT_DOUBLE_EQ(z.y, 1.25);
    EXPECT_DOUBLE_EQ(z.x, 0.3);
    const StripPoint back = from_half_plane(sc, z);
    EXPECT_EQ(back.edge, p.edge);
    EXPECT_DOUBLE_EQ(back.s, p.s);
}

TEST(Exhaustion, OriginValueIsLogThree) {
    const StripComplex sc = treebolic(2, 0.0, 1.0, -2, 2, 1.0);
    const TreebolicExhaustion rho(sc);
    EXPECT_NEAR(rho(ManifoldPoint{tree_origin(sc.graph()), 0.0}), std::log(3.0), 1e-14);
    EXPECT_NEAR(TreebolicExhaustion::delta(0.0, 1.0), std::log(3.0), 1e-15);
}

TEST(Exhaustion, KappaVanishesOnReferenceGeodesic) {
    const StripComplex sc = treebolic(2, 0.0, 1.0, -2, 3, 1.0);
    const TreebolicExhaustion rho(sc);
    const MetricGraph& g = sc.graph();
    // the reference geodesic: root, then first children all the way up
    VertexId v = 0;
    while (g.vertex(v).level != g.vertex(0).level) ++v;
    for (;;) {
        const auto kids = tree_child_edges(g, v);
        if (kids.empty()) break;
        EXPECT_FALSE(rho.branch_level(kids[0]).has_value());
        EXPECT_DOUBLE_EQ(rho.kappa(StripPoint{kids[0], 0.5 * g.edge(kids[0]).length, 0.2}), 0.0);
        v = g.edge(kids[0]).head;
    }
}

TEST(Exhaustion, DeeperBranchGivesLargerKappa) {
    const StripComplex sc = treebolic(2, 0.0, 1.0, -2, 3, 1.0);
    const TreebolicExhaustion rho(sc);
    const MetricGraph& g = sc.graph();
    // two top-level edges with different branch levels
    std::optional<EdgeId> shallow, deep;
    for (const Edge& e : g.edges()) {
        if (e.level != 3) continue;
        const auto b = rho.branch_level(e.id);
        if (!b) continue;
        if (!deep || *b < *rho.branch_level(*deep)) deep = e.id;
        if (!shallow || *b > *rho.branch_level(*shallow)) shallow = e.id;
    }
    ASSERT_TRUE(shallow && deep);
    ASSERT_LT(*rho.branch_level(*deep), *rho.branch_level(*shallow));
    const double s = 0.5 * g.edge(*deep).length;
    EXPECT_GT(rho.kappa(StripPoint{*deep, s, 0.1}), rho.kappa(StripPoint{*shallow, s, 0.1}));
}

TEST(Exhaustion, HorocycleBumpScaling) {
    const HorocycleBump eta(2.0);
    for (double y : {0.3, 0.9, 1.0, 1.2, 1.7}) {
        EXPECT_NEAR(eta(2.0 * y), 2.0 * eta(y), 1e-12);
        EXPECT_NEAR(eta.derivative(2.0 * y), eta.derivative(y), 1e-10);
    }
    EXPECT_DOUBLE_EQ(eta(1.0), 1.0);
    EXPECT_DOUBLE_EQ(eta(1.0 - 1.0 / 17.0), 1.0);
    EXPECT_DOUBLE_EQ(eta(1.2), 1.0);
}

TEST(ApproxUnity, ConvergesToOneAndHalvesGradient) {
    const auto sc = build_uniform_complex(build_path(std::vector<double>(20, 1.0)), Fiber::point(),
                                          Profile::constant(1.0), Profile::constant(1.0));
    const Discretization d = assemble(sc, GridOptions{33, 1});
    const Field rho = sample_exhaustion(d, edge_exhaustion(sc.graph(), 0.1, 0));
    const Field far = approx_unity(d, rho, 1000);
    EXPECT_NEAR(far.minCoeff(), 1.0, 1e-12);
    const double g2 = gradient_sup(d, approx_unity(d, rho, 2));
    const double g4 = gradient_sup(d, approx_unity(d, rho, 4));
    EXPECT_LE(g4, 0.5 * g2 + 1e-3);
    // flat next to every vertex
    const Field u = approx_unity(d, rho, 3);
    for (const Edge& e : sc.graph().edges()) {
        const auto& s = d.grid.s_nodes(e.id);
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] > 0.1 + 1e-12) continue;
            EXPECT_DOUBLE_EQ(u[static_cast<Eigen::Index>(d.grid.node(e.id, i, 0))],
                             u[static_cast<Eigen::Index>(d.grid.vertex_node(e.tail, 0))]);
        }
    }
    EXPECT_THROW(approx_unity(d, Field(), 2), ConfigurationError);
}
