#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "stripflow/error.hpp"
#include "stripflow/grid_metric.hpp"
#include "stripflow/quotients.hpp"

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

QuotientMap identity_map(const StripComplex& sc) {
    QuotientMap m;
    m.source_id = m.target_id = "self";
    m.vertex_map.resize(sc.graph().vertex_count());
    std::iota(m.vertex_map.begin(), m.vertex_map.end(), VertexId{0});
    m.edge_map.resize(sc.graph().edge_count());
    std::iota(m.edge_map.begin(), m.edge_map.end(), EdgeId{0});
    finalize_map(m, sc.graph(), sc.graph());
    return m;
}

}  // namespace

TEST(Collapse, TreeCoefficients) {
    const StripComplex sc = treebolic(2, 0.0, 1.0, -1, 2, 1.0);
    const Quotient q = collapse_fiber(sc);
    EXPECT_EQ(q.target.fiber().kind, Fiber::Kind::Point);
    EXPECT_FALSE(q.no_op);
    for (const Edge& e : q.target.graph().edges())
        for (double s : {0.0, 0.5 * e.length, e.length}) {
            const double sigma = *e.global_offset + s;
            EXPECT_NEAR(q.target.coefficients(e.id).a(s), 1.0, 1e-14);
            EXPECT_NEAR(q.target.coefficients(e.id).m(s), 1.0 / (sigma * sigma), 1e-14);
        }
    for (double A : q.map.A) EXPECT_NEAR(A, 2.0, 1e-12);
    const Quotient again = collapse_fiber(q.target);
    EXPECT_TRUE(again.no_op);
    EXPECT_EQ(again.map.edge_map, identity_map(q.target).edge_map);
}

TEST(Collapse, EnergyFactorizes) {
    const StripComplex sc = treebolic(2, 1.0, 0.5, -1, 2, 1.5);
    const Quotient q = collapse_fiber(sc);
    const Discretization ds = assemble(sc, GridOptions{9, 7});
    const Discretization dt = assemble(q.target, GridOptions{9, 1});
    const Aggregation agg = aggregation_table(ds, dt, q.map);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Field ft(static_cast<Eigen::Index>(dt.dof_count()));
        for (Eigen::Index k = 0; k < ft.size(); ++k) ft[k] = u(gen);
        Field fs(static_cast<Eigen::Index>(ds.dof_count()));
        for (std::size_t k = 0; k < ds.dof_count(); ++k)
            fs[static_cast<Eigen::Index>(k)] = ft[static_cast<Eigen::Index>(agg.target_of[k])];
        const double es = energy(ds, fs), et = energy(dt, ft);
        EXPECT_NEAR(es / (3.0 * et), 1.0, 1e-10);
    }
}

TEST(Collapse, ProjectionIsExactOnMatchingGrids) {
    const StripComplex sc = treebolic(2, 0.0, 1.0, -1, 1, 1.0);
    const Quotient q = collapse_fiber(sc);
    const Discretization ds = assemble(sc, GridOptions{5, 5});
    const Discretization dt = assemble(q.target, GridOptions{5, 1});
    const ProjectionReport r = compare_projected_heat(ds, dt, q.map, ds.grid.vertex_node(tree_origin(sc.graph()), 2), 0.5);
    EXPECT_LT(r.relative_l1, 1e-8);
    EXPECT_NEAR(r.aggregated.sum(), 1.0, 1e-10);
}

TEST(Collapse, IdentityCompareHasNoError) {
    const StripComplex sc = treebolic(2, 0.0, 0.5, -1, 1, 1.0);
    const Discretization d = assemble(sc, GridOptions{5, 5});
    const ProjectionReport r = compare_projected_heat(d, d, identity_map(sc), 7, 0.3);
    EXPECT_LT(r.relative_l1, 1e-8);
    const CompatibilityCertificate c = check_weight_compatibility(sc, sc, identity_map(sc));
    EXPECT_TRUE(c.ok);
    for (double A : c.A) EXPECT_NEAR(A, 1.0, 1e-12);
}

TEST(SlicePlane, ParameterMap) {
    const Quotient q = slice_plane(treebolic(2, 0.0, 1.0, -1, 2, 1.0));
    ASSERT_TRUE(q.target.treebolic().has_value());
    const TreebolicParams& t = *q.target.treebolic();
    EXPECT_EQ(t.p, 1);
    EXPECT_DOUBLE_EQ(t.q, 2.0);
    EXPECT_DOUBLE_EQ(t.alpha, 0.0);
    EXPECT_DOUBLE_EQ(t.beta, 2.0);
    const Quotient same = slice_plane(treebolic(1, 0.5, 0.7, -1, 2, 1.0));
    EXPECT_DOUBLE_EQ(same.target.treebolic()->beta, 0.7);
    EXPECT_EQ(same.map.edge_map, identity_map(same.target).edge_map);
}

TEST(SlicePlane, PooledMassCountsBranches) {
    const int p = 3, kmin = -1;
    const double beta = 0.5;
    const StripComplex sc = treebolic(p, 0.0, beta, kmin, 2, 1.0);
    const Quotient q = slice_plane(sc);
    std::vector<double> pooled(q.target.graph().edge_count(), 0.0);
    for (const Edge& e : sc.graph().edges())
        pooled[q.map.edge_map[e.id]] += measure(sc, e.id, 0.0, e.length, -1.0, 1.0);
    for (const Edge& e : q.target.graph().edges()) {
        const double target = measure(q.target, e.id, 0.0, e.length, -1.0, 1.0);
        // (beta p)^k on the target against p^(k - kmin) copies of beta^k
        EXPECT_NEAR(target / pooled[e.id], std::pow(p, kmin), 1e-12);
    }
}

TEST(Horocyclic, UnitWeightsGiveConstantTarget) {
    const auto b = [](int) { return 1.0; };
    const StripComplex tree = build_weighted_tree(2, -1, 2, b);
    for (const Edge& e : tree.graph().edges())
        EXPECT_NEAR(tree.coefficients(e.id).psi(0.5), std::pow(2.0, -*e.level), 1e-14);
    const Quotient q = horocyclic_collapse(tree, b);
    for (const Edge& e : q.target.graph().edges()) EXPECT_NEAR(q.target.coefficients(e.id).psi(0.5), 1.0, 1e-14);
    const CompatibilityCertificate c = check_weight_compatibility(tree, q.target, q.map);
    EXPECT_TRUE(c.ok);
    // children sum to the parent
    for (const Vertex& v : tree.graph().vertices()) {
        const auto parent = tree_parent_edge(tree.graph(), v.id);
        const auto kids = tree_child_edges(tree.graph(), v.id);
        if (!parent || kids.empty()) continue;
        double sum = 0.0;
        for (EdgeId k : kids) sum += c.A[k];
        EXPECT_NEAR(sum, c.A[*parent] * 1.0, 1e-12 * sum);
    }
}

TEST(Horocyclic, PerturbationIsDetectedAtTheTail) {
    const auto b = [](int k) { return 1.0 + 0.1 * k * k; };
    const StripComplex tree = build_weighted_tree(2, -1, 2, b);
    EXPECT_NO_THROW(horocyclic_collapse(tree, b));
    // scale psi on one edge
    EdgeId bad = 0;
    for (const Edge& e : tree.graph().edges())
        if (e.level == 1) bad = e.id;
    std::vector<EdgeCoefficients> coeffs = tree.coefficients();
    const auto& c0 = coeffs[bad];
    coeffs[bad] = EdgeCoefficients::from_geometry(c0.phi, c0.psi.scaled(1.3), c0.fiber_dimension);
    const StripComplex perturbed(tree.graph(), tree.fiber(), coeffs);
    const Edge& be = tree.graph().edge(bad);
    try {
        horocyclic_collapse(perturbed, b);
        FAIL() << "no incompatibility reported";
    } catch (const IncompatibilityError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("vertex " + std::to_string(be.tail) + " "), std::string::npos) << msg;
    }
    const CompatibilityCertificate c = check_weight_compatibility(perturbed, horocyclic_collapse(tree, b).target,
                                                                  horocyclic_collapse(tree, b).map);
    ASSERT_EQ(c.violations.size(), 2u);
    for (const auto& v : c.violations) {
        EXPECT_EQ(v.kind, CompatibilityCertificate::Violation::Kind::VertexSum);
        EXPECT_TRUE(v.id == be.tail || v.id == be.head);
    }
}

TEST(Compatibility, PeriodTwoWeightOnTheLineIsIncompatible) {
    // Z with unit edges, psi = Q^(k-1) on (2k, 2k+2), folded by even
    // translations onto two edges e, f between a (even) and b (odd)
    const double Q = 3.0;
    const int n = 8;
    std::vector<double> lengths(n, 1.0);
    const MetricGraph line = build_path(lengths);
    std::vector<EdgeCoefficients> coeffs;
    for (int i = 0; i < n; ++i)
        coeffs.push_back(EdgeCoefficients::from_geometry(Profile::constant(1.0),
                                                         Profile::constant(std::pow(Q, i / 2 - 1)), 0));
    const StripComplex source(line, Fiber::point(), coeffs);

    const MetricGraph folded({{0, false, {}}, {1, false, {}}}, {{0, 0, 1, 1.0, {}, {}}, {1, 0, 1, 1.0, {}, {}}});
    const StripComplex target = build_uniform_complex(folded, Fiber::point(), Profile::constant(1.0), Profile::constant(1.0));
    QuotientMap map;
    map.source_id = "line";
    map.target_id = "folded";
    for (int v = 0; v <= n; ++v) map.vertex_map.push_back(static_cast<VertexId>(v % 2));
    for (int e = 0; e < n; ++e) map.edge_map.push_back(static_cast<EdgeId>(e % 2));
    finalize_map(map, line, folded);

    const CompatibilityCertificate c = check_weight_compatibility(source, target, map);
    EXPECT_FALSE(c.ok);
    ASSERT_FALSE(c.violations.empty());
    for (const auto& v : c.violations) {
        EXPECT_EQ(v.kind, CompatibilityCertificate::Violation::Kind::VertexSum);
        EXPECT_EQ(map.vertex_map[v.id], 0u) << "violation at vertex " << v.id;
        EXPECT_NEAR(v.spread, (Q - 1.0) / Q, 1e-12);
    }
    // every interior even vertex conflicts, no odd one does
    EXPECT_EQ(c.violations.size(), static_cast<std::size_t>(n / 2 - 1));
}

TEST(BinMeasure, SumsToTotalMass) {
    const StripComplex sc = treebolic(2, 0.0, 1.0, -1, 1, 1.0);
    const Discretization d = assemble(sc, GridOptions{5, 9});
    std::vector<EdgeId> bins(sc.graph().edge_count());
    std::iota(bins.begin(), bins.end(), EdgeId{0});
    const Field ones = Field::Ones(static_cast<Eigen::Index>(d.dof_count()));
    const auto cells = bin_measure(d, ones, bins, bins.size(), {-0.5, 0.0, 0.5});
    EXPECT_EQ(cells.size(), bins.size() * 4);
    EXPECT_NEAR(std::accumulate(cells.begin(), cells.end(), 0.0), d.total_mass(), 1e-12);
    EXPECT_NEAR(relative_l1(cells, cells), 0.0, 0.0);
}
