#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "stripflow/brownian.hpp"
#include "stripflow/heat_engine.hpp"

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

StripComplex unit_complex(MetricGraph g, Fiber f) {
    return build_uniform_complex(std::move(g), f, Profile::constant(1.0), Profile::constant(1.0));
}

}  // namespace

TEST(Rng, StreamsAreReproducible) {
    WalkerRng a(42, 7), b(42, 7), c(42, 8);
    for (int i = 0; i < 10; ++i) {
        const double x = a.uniform();
        EXPECT_EQ(x, b.uniform());
        EXPECT_NE(x, c.uniform());
    }
    EXPECT_NE(splitmix64(1), splitmix64(2));
    WalkerRng n(1, 0);
    double s = 0.0, s2 = 0.0, e = 0.0;
    const int m = 200000;
    for (int i = 0; i < m; ++i) {
        const double z = n.normal();
        s += z;
        s2 += z * z;
        e += n.exponential();
    }
    EXPECT_NEAR(s / m, 0.0, 0.01);
    EXPECT_NEAR(s2 / m, 1.0, 0.01);
    EXPECT_NEAR(e / m, 1.0, 0.01);
}

TEST(Ctmc, ZeroTimeStaysAtSource) {
    const Discretization d = assemble(unit_complex(build_path({1.0, 1.0}), Fiber::point()), GridOptions{3, 1});
    const EmpiricalMeasure em = sample_ctmc(d, 2, 0.0, 1000);
    EXPECT_EQ(em.counts[2], 1000u);
}

TEST(Ctmc, MatchesExpmOnPathWithinThreeSigma) {
    const Discretization d = assemble(unit_complex(build_path({1.0, 1.0}), Fiber::point()), GridOptions{3, 1});
    const std::size_t src = 0, n = 100000;
    const double t = 0.3;
    const Field ref = stripflow::testing::expm_apply(d, stripflow::testing::delta(d, src), t);
    const EmpiricalMeasure em = sample_ctmc(d, src, t, n, McOptions{2024, 1});
    EXPECT_EQ(em.surviving(), n);
    for (std::size_t k = 0; k < d.dof_count(); ++k) {
        const double p = ref[static_cast<Eigen::Index>(k)] * d.mass[static_cast<Eigen::Index>(k)];
        const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
        EXPECT_LE(std::abs(static_cast<double>(em.counts[k]) / static_cast<double>(n) - p), 3.0 * sigma) << "node " << k;
    }
}

TEST(Ctmc, IndependentOfThreadCount) {
    const Discretization d = assemble(treebolic(2, 0.0, 1.0, -1, 1, 1.0), GridOptions{5, 5}, BoundaryPolicy::absorbing());
    const std::size_t src = d.grid.vertex_node(tree_origin(d.complex.graph()), 2);
    const EmpiricalMeasure a = sample_ctmc(d, src, 0.5, 20000, McOptions{99, 1});
    const EmpiricalMeasure b = sample_ctmc(d, src, 0.5, 20000, McOptions{99, 3});
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_EQ(a.absorbed, b.absorbed);
    EXPECT_GT(a.absorbed, 0u);
    const EmpiricalMeasure c = sample_ctmc(d, src, 0.5, 20000, McOptions{100, 1});
    EXPECT_NE(a.counts, c.counts);
}

TEST(Sde, EdgeIncrementMoments) {
    // alpha = 0, beta = 1: a = 1, m = sigma^-2, so ds has no drift and
    // variance 2 sigma^2 dt
    const StripComplex sc = treebolic(2, 0.0, 1.0, -1, 2, 1.0);
    EdgeId e = 0;
    for (const Edge& ed : sc.graph().edges())
        if (ed.level == 2) e = ed.id;
    const double dt = 1e-5;
    const SdeStepper step(sc, dt);
    const double s0 = 0.5;
    const double sigma = *sc.graph().edge(e).global_offset + s0;
    double sum = 0.0, sum2 = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        WalkerRng rng(5, static_cast<std::uint64_t>(i));
        SdeState st{e, s0, 0.0};
        step.step(st, rng);
        ASSERT_EQ(st.edge, e);
        sum += st.s - s0;
        sum2 += (st.s - s0) * (st.s - s0);
    }
    const double var = 2.0 * sigma * sigma * dt;
    EXPECT_NEAR(sum / n, 0.0, 4.0 * std::sqrt(var / n));
    EXPECT_NEAR(sum2 / n / var, 1.0, 0.05);
}

TEST(Sde, BranchWeightsFollowBeta) {
    for (double beta : {1.0, 0.5, 0.1}) {
        const StripComplex sc = treebolic(2, 0.0, beta, -1, 1, 1.0);
        const SdeStepper step(sc, 1e-3);
        const VertexId o = tree_origin(sc.graph());
        const EdgeId down = *tree_parent_edge(sc.graph(), o);
        const auto w = step.branch_weights(o);
        const auto& inc = sc.graph().incident(o);
        double total = 0.0, wdown = 0.0;
        for (std::size_t i = 0; i < inc.size(); ++i) {
            total += w[i];
            if (inc[i] == down) wdown = w[i];
        }
        EXPECT_NEAR(wdown / total, 1.0 / (1.0 + 2.0 * beta), 1e-12);

        int downs = 0;
        const int n = 60000;
        WalkerRng rng(3, 0);
        for (int i = 0; i < n; ++i) downs += step.choose_edge(o, rng) == down;
        const double p = 1.0 / (1.0 + 2.0 * beta);
        EXPECT_NEAR(static_cast<double>(downs) / n, p, 4.0 * std::sqrt(p * (1 - p) / n));
    }
}

TEST(Sde, UpwardCrossingsVanishWithBeta) {
    double prev = 1.0;
    for (double beta : {1.0, 0.3, 0.1, 0.01}) {
        const StripComplex sc = treebolic(2, 0.0, beta, -1, 1, 1.0);
        const SdeStepper step(sc, 1e-3);
        const VertexId o = tree_origin(sc.graph());
        const EdgeId down = *tree_parent_edge(sc.graph(), o);
        WalkerRng rng(8, 1);
        int up = 0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) up += step.choose_edge(o, rng) != down;
        const double frac = static_cast<double>(up) / n;
        EXPECT_LE(frac, prev);
        prev = frac;
    }
    EXPECT_LT(prev, 0.03);
}

TEST(Sde, ConservesWalkersOnReflectingComplex) {
    const StripComplex sc = treebolic(2, 0.0, 0.5, -1, 1, 1.0);
    const Discretization ref = assemble(sc, GridOptions{5, 5});
    const EmpiricalMeasure em = sample_sde(sc, ManifoldPoint{tree_origin(sc.graph()), 0.0}, 0.2, 1e-3, 2000, ref,
                                           McOptions{4, 2});
    EXPECT_EQ(em.surviving(), 2000u);
    std::uint64_t total = 0;
    for (auto c : em.counts) total += c;
    EXPECT_EQ(total, 2000u);
}

TEST(Exit, SingleNodeRegionIsOneJump) {
    const Discretization d = assemble(unit_complex(build_path({1.0, 3.0}), Fiber::point()), GridOptions{2, 1});
    // vertex 1 jumps to 0 at rate 1/1 and to 2 at rate 1/3
    const std::size_t mid = d.grid.vertex_node(1, 0);
    const ExitLaw law = exit_distribution(d, {mid}, mid, 200000, McOptions{6, 1});
    const double p0 = 0.75;
    const double got = law.probability[d.grid.vertex_node(0, 0)];
    EXPECT_NEAR(got, p0, 4.0 * std::sqrt(p0 * (1 - p0) / 200000));
    EXPECT_NEAR(got + law.probability[d.grid.vertex_node(2, 0)], 1.0, 1e-12);
    EXPECT_EQ(law.capped, 0.0);
}

TEST(Exit, StarHarmonicMeasure) {
    const Discretization d = assemble(unit_complex(build_star({1.0, 1.0, 1.0}), Fiber::point()), GridOptions{5, 1});
    std::vector<std::size_t> region;
    for (std::size_t k = 0; k < d.dof_count(); ++k) {
        const NodeInfo& n = d.grid.info(k);
        if (n.kind == NodeInfo::Kind::Vertex && n.vertex != 0) continue;
        region.push_back(k);
    }
    const std::size_t n = 30000;
    const ExitLaw law = exit_distribution(d, region, d.grid.vertex_node(0, 0), n, McOptions{12, 2});
    for (VertexId leaf : {1, 2, 3}) {
        // oracle: harmonic function equal to 1 on this leaf and 0 on the others
        std::map<std::size_t, double> bc;
        for (VertexId o : {1, 2, 3}) bc[d.grid.vertex_node(o, 0)] = o == leaf ? 1.0 : 0.0;
        const double p = solve_harmonic(d, bc)[static_cast<Eigen::Index>(d.grid.vertex_node(0, 0))];
        EXPECT_NEAR(p, 1.0 / 3.0, 1e-12);
        EXPECT_NEAR(law.probability[d.grid.vertex_node(leaf, 0)], p, 3.0 * std::sqrt(p * (1 - p) / n));
    }
}

TEST(Exit, PairingWithHarmonicExtension) {
    const Discretization d = assemble(treebolic(2, 0.0, 0.5, -1, 1, 1.0), GridOptions{5, 3});
    std::map<std::size_t, double> bc;
    std::vector<std::size_t> region;
    const std::vector<double> values = {0.2, 1.0, 0.6, 0.0, 0.9, 0.4, 0.3, 0.8, 0.1};
    std::size_t next = 0;
    for (std::size_t k = 0; k < d.dof_count(); ++k) {
        const NodeInfo& n = d.grid.info(k);
        if (n.kind == NodeInfo::Kind::Vertex && d.complex.graph().vertex(n.vertex).truncation_boundary)
            bc[k] = values[next++ % values.size()];
        else
            region.push_back(k);
    }
    const Field u = solve_harmonic(d, bc);
    const std::size_t src = d.grid.vertex_node(tree_origin(d.complex.graph()), 1);
    const std::size_t n = 40000;
    const ExitLaw law = exit_distribution(d, region, src, n, McOptions{21, 2});
    double pairing = 0.0, second = 0.0;
    for (const auto& [k, v] : bc) {
        pairing += law.probability[k] * v;
        second += law.probability[k] * v * v;
    }
    const double sigma = std::sqrt((second - pairing * pairing) / static_cast<double>(n));
    EXPECT_LT(std::abs(pairing - u[static_cast<Eigen::Index>(src)]), 3.0 * sigma);
}

TEST(Green, ShortHorizonAndRecurrentGrowth) {
    const Discretization d = assemble(unit_complex(build_path({1.0, 1.0}), Fiber::point()), GridOptions{5, 1});
    const std::size_t xi = d.grid.vertex_node(0, 0), zeta = d.grid.vertex_node(2, 0);
    const GreenCurve tiny = green_estimate(d, xi, zeta, {1e-4}, 2000, McOptions{1, 1});
    EXPECT_LT(tiny.estimate[0], 1e-6);
    const GreenCurve g = green_estimate(d, xi, zeta, {20.0, 40.0}, 4000, McOptions{2, 2});
    const double slope = (g.estimate[1] - g.estimate[0]) / 20.0;
    EXPECT_NEAR(slope * d.total_mass(), 1.0, 0.05);
}
