#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "stripflow/error.hpp"
#include "stripflow/metric_graph.hpp"
#include "stripflow/profile.hpp"

using namespace stripflow;

TEST(Tree, LevelLengthsForBinaryTree) {
    const MetricGraph g = build_tree(2, 2.0, -1, 1);
    std::set<double> lengths;
    for (const Edge& e : g.edges()) lengths.insert(e.length);
    EXPECT_EQ(lengths, (std::set<double>{0.5, 1.0}));
    for (const Edge& e : g.edges()) {
        ASSERT_TRUE(e.level.has_value());
        EXPECT_DOUBLE_EQ(e.length, std::pow(2.0, *e.level - 1));
    }
}

TEST(Tree, UnbranchedTreeIsAPath) {
    const MetricGraph g = build_tree(1, 2.0, -1, 1);
    EXPECT_EQ(g.edge_count(), 2u);
    EXPECT_EQ(g.vertex_count(), 3u);
    for (const Vertex& v : g.vertices()) EXPECT_LE(g.degree(v.id), 2u);
}

TEST(Tree, CountsAndDegrees) {
    const MetricGraph g = build_tree(2, 2.0, 0, 2);
    EXPECT_EQ(g.vertex_count(), 7u);
    EXPECT_EQ(g.edge_count(), 6u);
    int interior_level1 = 0;
    for (const Vertex& v : g.vertices()) {
        if (v.level == 1) {
            EXPECT_EQ(g.degree(v.id), 3u);
            ++interior_level1;
        }
        EXPECT_EQ(v.truncation_boundary, v.level == 0 || v.level == 2);
    }
    EXPECT_EQ(interior_level1, 2);
}

TEST(Tree, OriginAndChildren) {
    const MetricGraph g = build_tree(2, 2.0, -2, 2);
    const VertexId o = tree_origin(g);
    EXPECT_EQ(g.vertex(o).level, 0);
    EXPECT_EQ(tree_child_edges(g, o).size(), 2u);
    ASSERT_TRUE(tree_parent_edge(g, o).has_value());
    EXPECT_EQ(g.edge(*tree_parent_edge(g, o)).head, o);
}

TEST(Tree, RejectsBadParameters) {
    EXPECT_THROW(build_tree(0, 2.0, 0, 1), ParameterError);
    EXPECT_THROW(build_tree(2, 1.0, 0, 1), ParameterError);
    EXPECT_THROW(build_tree(2, 2.0, 1, 1), ParameterError);
}

TEST(Distance, Basics) {
    const MetricGraph star = build_star({1.0, 1.0, 1.0});
    const GraphPoint a{0, 0.3};
    EXPECT_DOUBLE_EQ(graph_distance(star, a, a), 0.0);
    EXPECT_DOUBLE_EQ(graph_distance(star, GraphPoint{0, 0.0}, GraphPoint{0, 1.0}), 1.0);
    EXPECT_DOUBLE_EQ(graph_distance(star, GraphPoint::at_vertex(star, 1), GraphPoint::at_vertex(star, 2)), 2.0);
    EXPECT_DOUBLE_EQ(graph_distance(star, GraphPoint{0, 0.25}, GraphPoint{1, 0.5}), 0.75);
    EXPECT_THROW(graph_distance(star, GraphPoint{7, 0.0}, a), DomainError);
    EXPECT_THROW(graph_distance(star, GraphPoint{0, 1.5}, a), DomainError);
}

TEST(Distance, VertexDistancesOnPath) {
    const MetricGraph g = build_path({1.0, 2.0, 0.5});
    const auto d = vertex_distances(g, GraphPoint{1, 0.5});
    ASSERT_EQ(d.size(), 4u);
    EXPECT_DOUBLE_EQ(d[0], 1.5);
    EXPECT_DOUBLE_EQ(d[1], 0.5);
    EXPECT_DOUBLE_EQ(d[2], 1.5);
    EXPECT_DOUBLE_EQ(d[3], 2.0);
}

namespace {
std::vector<EdgeCoefficients> uniform(const MetricGraph& g, const Profile& phi) {
    return std::vector<EdgeCoefficients>(g.edge_count(),
                                         EdgeCoefficients::from_geometry(phi, Profile::constant(1.0), 0));
}
}  // namespace

TEST(Completeness, HyperbolicProfileIsComplete) {
    const MetricGraph g = build_tree(2, 2.0, -2, 2);
    std::vector<EdgeCoefficients> c;
    for (const Edge& e : g.edges())
        c.push_back(EdgeCoefficients::from_geometry(Profile::power(1.0, -2.0, *e.global_offset),
                                                    Profile::constant(1.0), 0));
    const CompletenessReport r = completeness_indicator(g, c);
    EXPECT_TRUE(r.all_complete());
    for (const auto& ray : r.rays)
        for (double term : ray.leading_terms) EXPECT_NEAR(term, std::log(2.0), 1e-9);
}

TEST(Completeness, GeometricLengthsAreIncomplete) {
    const MetricGraph g = build_path({1.0, 0.5, 0.25, 0.125});
    const CompletenessReport r = completeness_indicator(g, uniform(g, Profile::constant(1.0)));
    EXPECT_FALSE(r.all_complete());
    bool saw_incomplete = false;
    for (const auto& ray : r.rays)
        if (ray.verdict == Completeness::Incomplete) {
            saw_incomplete = true;
            EXPECT_EQ(ray.boundary_vertex, 4u);
            EXPECT_NEAR(ray.total, 0.125, 1e-9);
        }
    EXPECT_TRUE(saw_incomplete);
}

TEST(Completeness, UnitLengthsAreComplete) {
    const MetricGraph g = build_path({1.0, 1.0, 1.0});
    EXPECT_TRUE(completeness_indicator(g, uniform(g, Profile::constant(1.0))).all_complete());
}

TEST(EdgeExhaustionTest, PathOfUnitEdges) {
    const MetricGraph g = build_path({1.0, 1.0, 1.0});
    const double eps = 0.1;
    const EdgeExhaustion rho(g, eps, 0);
    EXPECT_DOUBLE_EQ(rho.vertex_value(0), 0.0);
    EXPECT_GE(rho.vertex_value(3), 3.0 - 12.0 * eps);
    EXPECT_LE(rho.vertex_value(3), 3.0);
    for (const Edge& e : g.edges()) {
        for (double s : {0.0, 0.05, 0.1}) {
            EXPECT_DOUBLE_EQ(rho.value(e.id, s), rho.vertex_value(e.tail));
            EXPECT_DOUBLE_EQ(rho.value(e.id, e.length - s), rho.vertex_value(e.head));
        }
        for (int i = 0; i <= 100; ++i) EXPECT_LE(std::abs(rho.derivative(e.id, i / 100.0)), 1.0 + 1e-12);
    }
}

TEST(EdgeExhaustionTest, EdgeBetweenEqualValuesIsFlat) {
    // a triangle seen from one corner: the opposite edge joins two vertices at
    // the same distance
    const MetricGraph g({{0, false, {}}, {1, false, {}}, {2, false, {}}},
                        {{0, 0, 1, 1.0, {}, {}}, {1, 0, 2, 1.0, {}, {}}, {2, 1, 2, 1.0, {}, {}}});
    const EdgeExhaustion rho(g, 0.1, 0);
    EXPECT_DOUBLE_EQ(rho.vertex_value(1), rho.vertex_value(2));
    for (int i = 0; i <= 20; ++i) EXPECT_DOUBLE_EQ(rho.value(2, i / 20.0), rho.vertex_value(1));
    EXPECT_DOUBLE_EQ(rho.edge_scale(2), 0.0);
}

TEST(EdgeExhaustionTest, NondecreasingAlongTree) {
    const MetricGraph g = build_tree(2, 2.0, -1, 3);
    const EdgeExhaustion rho(g, 0.05, tree_origin(g));
    const auto dist = vertex_distances(g, GraphPoint::at_vertex(g, tree_origin(g)));
    for (const Vertex& a : g.vertices())
        for (const Vertex& b : g.vertices())
            if (dist[a.id] < dist[b.id])
                EXPECT_LE(rho.vertex_value(a.id), rho.vertex_value(b.id) + g.max_edge_length());
    EXPECT_THROW(EdgeExhaustion(g, 0.1, 0), ParameterError);
}
