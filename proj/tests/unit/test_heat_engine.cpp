#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "stripflow/error.hpp"
#include "stripflow/grid_metric.hpp"
#include "stripflow/heat_engine.hpp"
#include "stripflow/spectrum.hpp"

using namespace stripflow;
using stripflow::testing::expm_apply;

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

Field random_field(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Field f(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < f.size(); ++k) f[k] = u(gen);
    return f;
}

}  // namespace

TEST(Heat, ConservesConstants) {
    const Discretization d = assemble(treebolic(2, 1.0, 0.5, -1, 2, 1.0), GridOptions{9, 9});
    const Field ones = Field::Ones(static_cast<Eigen::Index>(d.dof_count()));
    for (Scheme s : {Scheme::CrankNicolson, Scheme::ImplicitEuler})
        EXPECT_LT((step_heat(d, ones, 1.0, 1.0 / 32, s) - ones).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Heat, CrankNicolsonMatchesMatrixExponentialOnPath) {
    const Discretization d = assemble(unit_complex(build_path({1.0, 1.0}), Fiber::point()), GridOptions{3, 1});
    ASSERT_EQ(d.dof_count(), 5u);
    const Field f0 = random_field(5, 7);
    const double t = 0.5;
    EXPECT_LT((step_heat(d, f0, t, t / 2048) - expm_apply(d, f0, t)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Heat, CrankNicolsonIsSecondOrder) {
    const Discretization d = assemble(unit_complex(build_star({1.0, 2.0, 0.5}), Fiber::interval(1.0)),
                                      GridOptions{5, 5}, BoundaryPolicy::absorbing());
    const Field f0 = random_field(d.dof_count(), 11);
    const double t = 0.5;
    const Field ref = expm_apply(d, f0, t);
    const double e1 = (step_heat(d, f0, t, t / 64) - ref).cwiseAbs().maxCoeff();
    const double e2 = (step_heat(d, f0, t, t / 128) - ref).cwiseAbs().maxCoeff();
    EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.1);
    const double i1 = (step_heat(d, f0, t, t / 64, Scheme::ImplicitEuler) - ref).cwiseAbs().maxCoeff();
    const double i2 = (step_heat(d, f0, t, t / 128, Scheme::ImplicitEuler) - ref).cwiseAbs().maxCoeff();
    EXPECT_NEAR(std::log2(i1 / i2), 1.0, 0.1);
}

TEST(Heat, ErgodicLimit) {
    const Discretization d = assemble(unit_complex(build_star({1.0, 1.0, 0.5}), Fiber::circle(1.0)), GridOptions{5, 4});
    const Field f0 = random_field(d.dof_count(), 3);
    const double mean = f0.dot(d.mass) / d.total_mass();
    const Field f = step_heat(d, f0, 40.0, 0.05, Scheme::ImplicitEuler);
    EXPECT_LT((f.array() - mean).abs().maxCoeff() / mean, 1e-6);
}

TEST(Heat, ImplicitEulerMaximumPrinciple) {
    const Discretization d = assemble(treebolic(2, 0.0, 2.0, -1, 1, 1.0), GridOptions{7, 7});
    const Field f0 = random_field(d.dof_count(), 5);
    const Field f = step_heat(d, f0, 0.3, 0.01, Scheme::ImplicitEuler);
    EXPECT_GE(f.minCoeff(), f0.minCoeff() - 1e-12);
    EXPECT_LE(f.maxCoeff(), f0.maxCoeff() + 1e-12);
}

TEST(HeatKernel, SymmetricAndConservative) {
    const Discretization d = assemble(treebolic(2, 1.0, 0.5, -1, 1, 1.0), GridOptions{7, 7});
    const double t = 0.5;
    std::mt19937_64 gen(1);
    std::uniform_int_distribution<std::size_t> pick(0, d.dof_count() - 1);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t i = pick(gen), j = pick(gen);
        const HeatKernelSlice hi = heat_kernel(d, i, t, t / 256);
        const HeatKernelSlice hj = heat_kernel(d, j, t, t / 256);
        const double a = hi.values[static_cast<Eigen::Index>(j)], b = hj.values[static_cast<Eigen::Index>(i)];
        EXPECT_LE(std::abs(a - b), 1e-8 * std::max(std::abs(a), std::abs(b)));
        EXPECT_NEAR(hi.retained_mass(d), 1.0, 1e-8);
    }
}

TEST(HeatKernel, ShortTimeLocalization) {
    const Discretization d = assemble(unit_complex(build_path({1.0, 1.0}), Fiber::point()), GridOptions{9, 1});
    const std::size_t src = d.grid.node(0, 4, 0);
    const double h = 0.125;
    const double t = 0.001 * h * h;
    const HeatKernelSlice k = heat_kernel(d, src, t, t / 64);
    const double at_source = k.values[static_cast<Eigen::Index>(src)] * d.mass[static_cast<Eigen::Index>(src)];
    EXPECT_GT(at_source, 0.99);
    // leaves at rate 2 / h^2
    EXPECT_NEAR(at_source, std::exp(-2.0 * t / (h * h)), 1e-5);
}

TEST(HeatKernel, MatchesExpmOracle) {
    const Discretization d = assemble(treebolic(2, 0.0, 1.0, -1, 1, 1.0), GridOptions{5, 5}, BoundaryPolicy::absorbing());
    const std::size_t src = d.grid.vertex_node(tree_origin(d.complex.graph()), 2);
    const double t = 0.25;
    const Field ref = expm_apply(d, stripflow::testing::delta(d, src), t);
    const Field h = heat_kernel(d, src, t, t / 4096).values;
    EXPECT_LT((h - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff(), 1e-7);
    EXPECT_THROW(heat_kernel(d, d.dof_count(), t, t / 8), DomainError);
}

TEST(Spectrum, ReflectingBottomIsZero) {
    const Discretization d = assemble(treebolic(2, 0.0, 1.0, -1, 1, 1.0), GridOptions{5, 5});
    const SpectralBottom sb = spectral_bottom(d);
    EXPECT_NEAR(sb.lambda, 0.0, 1e-10);
    const double spread = sb.eigenvector.maxCoeff() - sb.eigenvector.minCoeff();
    EXPECT_LT(spread, 1e-8 * sb.eigenvector.cwiseAbs().maxCoeff());
}

TEST(Spectrum, DirichletIntervalOracle) {
    // -u'' = lambda u on [0, 3] with u(0) = u(3) = 0: pi^2 / 9, approached from
    // above by the lumped second-order scheme
    const Discretization d = assemble(unit_complex(build_path({1.0, 1.0, 1.0}), Fiber::point()), GridOptions{65, 1},
                                      BoundaryPolicy::absorbing());
    const double lambda = spectral_bottom(d).lambda;
    const double h = 1.0 / 64;
    const double discrete = 4.0 / (h * h) * std::pow(std::sin(std::numbers::pi * h / 6.0), 2);
    EXPECT_NEAR(lambda, discrete, 1e-9);
}

TEST(Spectrum, LanczosAgreesWithDense) {
    const Discretization d = assemble(treebolic(2, 1.0, 0.5, -1, 1, 1.0), GridOptions{9, 9}, BoundaryPolicy::absorbing());
    SpectrumOptions dense;
    dense.dense_limit = 100000;
    SpectrumOptions krylov;
    krylov.dense_limit = 0;
    krylov.tolerance = 1e-10;
    const double a = spectral_bottom(d, dense).lambda;
    const double b = spectral_bottom(d, krylov).lambda;
    EXPECT_NEAR(a, b, 1e-8 * a);
}

TEST(Spectrum, CriticalBottomShrinksWithTheDomain) {
    double prev = 1e300;
    for (int m : {1, 2, 3}) {
        const Discretization d = assemble(treebolic(2, 1.0, 0.5, -m, m, 2.0 * std::pow(2.0, m)), GridOptions{5, 5},
                                          BoundaryPolicy::absorbing());
        const double lambda = spectral_bottom(d).lambda;
        EXPECT_LT(lambda, prev);
        prev = lambda;
    }
}

TEST(Harmonic, StarAndMaximumPrinciple) {
    const Discretization d = assemble(unit_complex(build_star({1.0, 1.0, 1.0}), Fiber::point()), GridOptions{5, 1});
    const Field u = solve_harmonic(d, {{d.grid.vertex_node(1, 0), 0.0}, {d.grid.vertex_node(2, 0), 0.0},
                                       {d.grid.vertex_node(3, 0), 1.0}});
    EXPECT_NEAR(u[static_cast<Eigen::Index>(d.grid.vertex_node(0, 0))], 1.0 / 3.0, 1e-12);

    const Field c = solve_harmonic(d, {{d.grid.vertex_node(1, 0), 2.5}, {d.grid.vertex_node(2, 0), 2.5}});
    EXPECT_LT((c.array() - 2.5).abs().maxCoeff(), 1e-12);

    const Discretization t = assemble(treebolic(2, 0.0, 0.5, -1, 1, 1.0), GridOptions{5, 5});
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::map<std::size_t, double> bc;
        for (const Vertex& v : t.complex.graph().vertices())
            if (v.truncation_boundary)
                for (std::size_t j = 0; j < 5; ++j) bc[t.grid.vertex_node(v.id, j)] = u01(gen);
        double lo = 1.0, hi = 0.0;
        for (const auto& [k, val] : bc) {
            lo = std::min(lo, val);
            hi = std::max(hi, val);
        }
        const Field f = solve_harmonic(t, bc);
        ASSERT_GE(f.minCoeff(), lo - 1e-12);
        ASSERT_LE(f.maxCoeff(), hi + 1e-12);
    }
    EXPECT_THROW(solve_harmonic(d, {}), ConfigurationError);
}

TEST(Kirchhoff, ConstantHasNoResidual) {
    const Discretization d = assemble(treebolic(2, 0.0, 0.5, -1, 1, 1.0), GridOptions{9, 5});
    const Field ones = Field::Ones(static_cast<Eigen::Index>(d.dof_count()));
    const KirchhoffResidual r = kirchhoff_residual(d, ones, tree_origin(d.complex.graph()));
    EXPECT_EQ(r.max_norm, 0.0);
}

TEST(Kirchhoff, ResidualWeightsUpEdgesByBeta) {
    // f = sigma on every edge has d/dsigma = 1 everywhere, so the residual is
    // a_below - p * a_above = a_below (1 - beta p) up to the sign convention
    const double beta = 0.25;
    const Discretization d = assemble(treebolic(2, 0.0, beta, -1, 1, 1.0), GridOptions{9, 3});
    const MetricGraph& g = d.complex.graph();
    const VertexId o = tree_origin(g);
    const Field f = sample_field(d, [&](EdgeId e, double s, double) { return *g.edge(e).global_offset + s; });
    const KirchhoffResidual r = kirchhoff_residual(d, f, o);
    const EdgeId down = *tree_parent_edge(g, o);
    const double a_below = d.complex.coefficients(down).a(g.edge(down).length);
    for (double v : r.residual) EXPECT_NEAR(std::abs(v), a_below * std::abs(1.0 - 2.0 * beta), 1e-10);
}

TEST(Gaussian, MonotoneInEpsilonAndUniformCase) {
    const StripComplex sc = treebolic(2, 0.0, 1.0, -1, 1, 1.0);
    const Discretization d = assemble(sc, GridOptions{9, 9});
    const std::size_t src = d.grid.vertex_node(tree_origin(sc.graph()), 4);
    const HeatKernelSlice h = heat_kernel(d, src, 0.5, 0.5 / 256, Scheme::ImplicitEuler);
    const auto dist = grid_distances(sc, d.grid, src);
    const double c_half = gaussian_bound_check(d, h, 0.5, dist).c_star;
    const double c_quarter = gaussian_bound_check(d, h, 0.25, dist).c_star;
    EXPECT_TRUE(std::isfinite(c_half));
    EXPECT_GE(c_quarter, c_half);

    HeatKernelSlice flat = h;
    flat.values.setConstant(1.0 / d.total_mass());
    const GaussianBoundReport r = gaussian_bound_check(d, flat, 0.5, dist);
    const double diam = *std::max_element(dist.begin(), dist.end());
    EXPECT_NEAR(r.c_star, std::log(1.0 / d.total_mass()) + diam * diam / (4.0 * 1.5 * 0.5), 1e-12);
    EXPECT_DOUBLE_EQ(dist[r.argmax], diam);
}

TEST(Probe, SymmetricStarHasMatchingOneSidedDerivatives) {
    const StripComplex sc = unit_complex(build_star({1.0, 1.0, 1.0}), Fiber::interval(1.0));
    std::vector<Discretization> ladder;
    for (std::size_t n : {5, 9, 17}) ladder.push_back(assemble(sc, GridOptions{n, 5}));
    std::vector<const Discretization*> ptrs;
    for (const auto& d : ladder) ptrs.push_back(&d);
    const auto solver = [](const Discretization& d) {
        std::map<std::size_t, double> bc;
        for (std::size_t j = 0; j < d.grid.fiber_count(); ++j) {
            const double x = d.grid.fiber_nodes()[j];
            bc[d.grid.vertex_node(1, j)] = 1.0 + x * x;
            bc[d.grid.vertex_node(2, j)] = 1.0 + x * x;
            bc[d.grid.vertex_node(3, j)] = 0.0;
        }
        return solve_harmonic(d, bc);
    };
    const ProbeReport r = smoothness_probe(ptrs, solver, 0, 0, 1);
    EXPECT_LT(r.ds_gap, 1e-10);
    EXPECT_LT(r.dx_gap, 1e-10);
}
