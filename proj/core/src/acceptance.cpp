#include "stripflow/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "stripflow/brownian.hpp"
#include "stripflow/error.hpp"
#include "stripflow/exhaustion.hpp"
#include "stripflow/grid_metric.hpp"
#include "stripflow/heat_engine.hpp"
#include "stripflow/quotients.hpp"
#include "stripflow/spectrum.hpp"
#include "stripflow/subordination.hpp"

namespace stripflow {

namespace {

using Index = Eigen::Index;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

StripComplex treebolic(int p, double alpha, double beta, int k_min, int k_max, double R) {
    TreebolicParams tp;
    tp.p = p;
    tp.q = 2.0;
    tp.alpha = alpha;
    tp.beta = beta;
    tp.k_min = k_min;
    tp.k_max = k_max;
    tp.R = R;
    return build_treebolic(tp);
}

std::size_t mid(const Grid& g) { return g.fiber_count() / 2; }

std::size_t origin_node(const Discretization& d) {
    return d.grid.vertex_node(tree_origin(d.complex.graph()), mid(d.grid));
}

Field unit_source(const Discretization& d, std::size_t src) {
    Field f = Field::Zero(static_cast<Index>(d.dof_count()));
    f[static_cast<Index>(src)] = 1.0 / d.mass[static_cast<Index>(src)];
    return f;
}

// e^{tL} delta_src / m_src through the eigendecomposition of M^-1/2 K M^-1/2
// on the free block.
Field dense_kernel(const Discretization& d, std::size_t src, double t) {
    const auto free = d.free_dofs();
    const auto idx = d.free_index();
    const Index n = static_cast<Index>(free.size());
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd isq(n);
    for (Index a = 0; a < n; ++a) isq[a] = 1.0 / std::sqrt(d.mass[static_cast<Index>(free[a])]);
    for (int k = 0; k < d.stiffness.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(d.stiffness, k); it; ++it) {
            const auto r = idx[static_cast<std::size_t>(it.row())];
            const auto c = idx[static_cast<std::size_t>(it.col())];
            if (r < 0 || c < 0) continue;
            B(r, c) = it.value() * isq[r] * isq[c];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    const Index s = idx[src];
    if (s < 0) throw DomainError("source is pinned");
    Eigen::VectorXd coeff = es.eigenvectors().row(s).transpose();
    for (Index k = 0; k < n; ++k) coeff[k] *= std::exp(-t * es.eigenvalues()[k]);
    const Eigen::VectorXd g = es.eigenvectors() * coeff;
    Field out = Field::Zero(static_cast<Index>(d.dof_count()));
    const double ms = d.mass[static_cast<Index>(src)];
    for (Index a = 0; a < n; ++a)
        out[static_cast<Index>(free[a])] = isq[a] * g[a] / std::sqrt(ms);
    return out;
}

// e^{tL} f0 through the same eigendecomposition.
Field dense_apply(const Discretization& d, const Field& f0, double t) {
    const auto free = d.free_dofs();
    const auto idx = d.free_index();
    const Index n = static_cast<Index>(free.size());
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd isq(n), g0(n);
    for (Index a = 0; a < n; ++a) {
        isq[a] = 1.0 / std::sqrt(d.mass[static_cast<Index>(free[a])]);
        g0[a] = f0[static_cast<Index>(free[a])] / isq[a];
    }
    for (int k = 0; k < d.stiffness.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(d.stiffness, k); it; ++it) {
            const auto r = idx[static_cast<std::size_t>(it.row())];
            const auto c = idx[static_cast<std::size_t>(it.col())];
            if (r >= 0 && c >= 0) B(r, c) = it.value() * isq[r] * isq[c];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    Eigen::VectorXd c = es.eigenvectors().transpose() * g0;
    for (Index k = 0; k < n; ++k) c[k] *= std::exp(-t * es.eigenvalues()[k]);
    const Eigen::VectorXd g = es.eigenvectors() * c;
    Field out = Field::Zero(static_cast<Index>(d.dof_count()));
    for (Index a = 0; a < n; ++a) out[static_cast<Index>(free[a])] = isq[a] * g[a];
    return out;
}

double max_abs(const Field& f) { return f.cwiseAbs().maxCoeff(); }

double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]), y = std::log(err[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> normalized(std::vector<double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    for (double& x : v) x /= s;
    return v;
}

std::vector<EdgeId> identity_bins(const MetricGraph& g) {
    std::vector<EdgeId> out(g.edge_count());
    for (EdgeId e = 0; e < out.size(); ++e) out[e] = e;
    return out;
}

// ---------------------------------------------------------------------------

CriterionResult conservation(const AcceptanceOptions&) {
    CriterionResult r;
    double worst = 0.0;
    std::size_t dofs = 0;
    for (double alpha : {0.0, 1.0}) {
        for (double beta : {0.5, 1.0, 2.0}) {
            const Discretization d = assemble(treebolic(2, alpha, beta, -1, 3, 2.0), GridOptions{9, 17});
            dofs = d.dof_count();
            const Field one = Field::Ones(static_cast<Index>(d.dof_count()));
            for (double t : {0.1, 1.0}) {
                const Field f = step_heat(d, one, t, t / 64.0);
                worst = std::max(worst, std::abs(f.dot(d.mass) - d.total_mass()) / d.total_mass());
            }
        }
    }
    r.pass = worst <= 1e-10;
    r.detail = "max relative mass drift " + num(worst) + " over 12 runs, " + std::to_string(dofs) +
               " DOFs (bound 1e-10)";
    return r;
}

CriterionResult symmetry(const AcceptanceOptions& o) {
    CriterionResult r;
    const Discretization d = assemble(treebolic(2, 1.0, 0.5, -1, 1, 1.0), GridOptions{9, 9},
                                      BoundaryPolicy{Boundary::Absorbing, Boundary::Reflecting});
    const auto free = d.free_dofs();
    const double t = 0.5;
    const std::size_t steps = 128;
    HeatPropagator prop(d, t / steps, Scheme::CrankNicolson);
    std::mt19937_64 gen(o.seed);
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    std::map<std::size_t, Field> cache;
    auto kernel = [&](std::size_t s) -> const Field& {
        auto it = cache.find(s);
        if (it == cache.end()) it = cache.emplace(s, prop.advance(unit_source(d, s), steps)).first;
        return it->second;
    };
    double diff = 0.0, scale = 0.0;
    for (int k = 0; k < 100; ++k) {
        const std::size_t i = free[pick(gen)], j = free[pick(gen)];
        const double hij = kernel(j)[static_cast<Index>(i)];
        const double hji = kernel(i)[static_cast<Index>(j)];
        diff = std::max(diff, std::abs(hij - hji));
        scale = std::max({scale, std::abs(hij), std::abs(hji)});
    }
    const double rel = diff / scale;
    r.pass = rel <= 1e-8;
    r.detail = "max |h(t,i,j) - h(t,j,i)| / max h = " + num(rel) + " over 100 pairs (bound 1e-8)";
    return r;
}

CriterionResult kirchhoff(const AcceptanceOptions&) {
    CriterionResult r;
    const StripComplex sc = treebolic(2, 0.0, 0.5, -2, 2, 1.0);
    const MetricGraph& g = sc.graph();
    const std::vector<std::size_t> ladder = {5, 9, 17};
    std::vector<double> h, res_harm, res_heat;
    double const_res = 0.0;
    for (std::size_t n : ladder) {
        const Discretization d = assemble(sc, GridOptions{n, 9});
        std::map<std::size_t, double> bc;
        std::size_t first_leaf = 0;
        bool have_leaf = false;
        for (const Vertex& v : g.vertices()) {
            if (!v.truncation_boundary) continue;
            const bool top = *v.level == 2;
            if (top && !have_leaf) first_leaf = v.id, have_leaf = true;
            for (std::size_t j = 0; j < d.grid.fiber_count(); ++j) {
                const double x = d.grid.fiber_nodes()[j];
                const double base = top ? 1.0 + 0.25 * static_cast<double>(v.id % 3) : 0.0;
                bc[d.grid.vertex_node(v.id, j)] = base * (1.0 + 0.3 * std::cos(std::numbers::pi * x));
            }
        }
        const Field u = solve_harmonic(d, bc);
        const std::size_t src = d.grid.vertex_node(first_leaf, mid(d.grid));
        const Field hk = heat_kernel(d, src, 0.5, 0.5 / 256).values;
        const Field one = Field::Ones(static_cast<Index>(d.dof_count()));
        double rh = 0.0, rk = 0.0;
        for (const Vertex& v : g.vertices()) {
            if (v.truncation_boundary) continue;
            rh = std::max(rh, kirchhoff_residual(d, u, v.id).max_norm);
            rk = std::max(rk, kirchhoff_residual(d, hk, v.id).max_norm);
            const_res = std::max(const_res, kirchhoff_residual(d, one, v.id).max_norm);
        }
        h.push_back(1.0 / static_cast<double>(n - 1));
        res_harm.push_back(rh);
        res_heat.push_back(rk);
    }
    const double oh = fitted_order(h, res_harm), ok = fitted_order(h, res_heat);
    r.pass = oh >= 0.9 && ok >= 0.9 && const_res == 0.0;
    r.detail = "harmonic residuals " + num(res_harm[0]) + " " + num(res_harm[1]) + " " +
               num(res_harm[2]) + " order " + num(oh) + "; heat kernel " + num(res_heat[0]) + " " +
               num(res_heat[1]) + " " + num(res_heat[2]) + " order " + num(ok) +
               "; constant field " + num(const_res);
    return r;
}

struct SmallCase {
    std::string name;
    Discretization d;
    std::size_t source;
};

std::vector<SmallCase> small_suite() {
    std::vector<SmallCase> out;
    auto add = [&](std::string name, Discretization d, std::size_t src) {
        if (d.dof_count() > 400) throw ParameterError(name + " exceeds 400 DOFs");
        out.push_back({std::move(name), std::move(d), src});
    };
    {
        auto sc = build_uniform_complex(build_path({1.0, 1.0}), Fiber::point(), Profile::constant(1.0),
                                        Profile::constant(1.0));
        add("path", assemble(sc, GridOptions{3, 1}), 0);
    }
    {
        auto sc = build_uniform_complex(build_star({1.0, 1.0, 1.0}), Fiber::interval(1.0),
                                        Profile::constant(1.0), Profile::constant(1.0));
        Discretization d = assemble(sc, GridOptions{5, 5}, BoundaryPolicy{Boundary::Absorbing, Boundary::Reflecting});
        const std::size_t src = d.grid.vertex_node(0, 2);
        add("star", std::move(d), src);
    }
    {
        Discretization d = assemble(treebolic(2, 0.0, 1.0, -1, 1, 1.0), GridOptions{5, 5});
        const std::size_t src = origin_node(d);
        add("treebolic", std::move(d), src);
    }
    {
        Discretization d = assemble(build_tree_complex(2, 2.0, 1.0, 0.5, -1, 2), GridOptions{9, 1},
                                    BoundaryPolicy::absorbing());
        const std::size_t src = origin_node(d);
        add("tree", std::move(d), src);
    }
    {
        auto sc = build_uniform_complex(build_path({1.0, 2.0}), Fiber::circle(2.0 * std::numbers::pi),
                                        Profile::constant(1.0), Profile::constant(1.0));
        Discretization d = assemble(sc, GridOptions{7, 8});
        const std::size_t src = d.grid.node(1, 3, 0);
        add("circle", std::move(d), src);
    }
    return out;
}

CriterionResult oracle(const AcceptanceOptions& o) {
    CriterionResult r;
    const double t = 0.5;
    double worst_cn = 0.0, worst_frac = 1.0, worst_delta = 0.0;
    std::mt19937_64 gen(o.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::ostringstream os;
    for (const SmallCase& c : small_suite()) {
        Field f0(static_cast<Index>(c.d.dof_count()));
        for (std::size_t k = 0; k < c.d.dof_count(); ++k)
            f0[static_cast<Index>(k)] = c.d.pinned[k] ? 0.0 : unif(gen);
        const double err = max_abs(step_heat(c.d, f0, t, t / 2048) - dense_apply(c.d, f0, t));
        worst_cn = std::max(worst_cn, err);

        const Field ref = dense_kernel(c.d, c.source, t);
        const Field cn = heat_kernel(c.d, c.source, t, t / 2048).values;
        worst_delta = std::max(worst_delta, max_abs(cn - ref) / max_abs(ref));

        const std::size_t n = 100000;
        const EmpiricalMeasure em = sample_ctmc(c.d, c.source, t, n, McOptions{o.seed, o.threads});
        std::size_t ok = 0, total = 0;
        for (std::size_t k = 0; k < c.d.dof_count(); ++k) {
            if (c.d.pinned[k]) continue;
            const double p = std::clamp(ref[static_cast<Index>(k)] * c.d.mass[static_cast<Index>(k)], 0.0, 1.0);
            const double phat = static_cast<double>(em.counts[k]) / static_cast<double>(n);
            const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
            ++total;
            if (std::abs(phat - p) <= 3.0 * sigma + 1e-15) ++ok;
        }
        const double frac = static_cast<double>(ok) / static_cast<double>(total);
        worst_frac = std::min(worst_frac, frac);
        os << c.name << "(" << c.d.dof_count() << ") cn " << num(err) << " mc " << num(frac) << "; ";
    }
    r.pass = worst_cn <= 1e-8 && worst_frac >= 0.95;
    r.detail = os.str() + "worst CN/expm on random data " + num(worst_cn) +
               " (1e-8), worst MC coverage " + num(worst_frac) + " (0.95); CN/expm on point-source kernels " +
               num(worst_delta) + " relative (not graded)";
    return r;
}

struct ProjectionRun {
    double coarse = 0.0, fine = 0.0, negative = 0.0;
};

// Kernel of the 2D source, pushed to the target bins, against a fine
// intrinsic reference on the target.
std::vector<double> source_bins(const StripComplex& sc, const QuotientMap& map, std::size_t target_edges,
                                GridOptions go, const std::vector<double>& x_breaks, double t) {
    const Discretization d = assemble(sc, go);
    const Field h = heat_kernel(d, origin_node(d), t, t / 512).values;
    return normalized(bin_measure(d, h, map.edge_map, target_edges, x_breaks));
}

std::vector<double> reference_bins(const StripComplex& target, GridOptions go,
                                   const std::vector<double>& x_breaks, double t) {
    const Discretization d = assemble(target, go);
    const Field h = heat_kernel(d, origin_node(d), t, t / 1024).values;
    return normalized(bin_measure(d, h, identity_bins(target.graph()), target.graph().edge_count(), x_breaks));
}

CriterionResult projection_tree(const AcceptanceOptions&) {
    CriterionResult r;
    const double t = 0.5;
    const StripComplex sc = treebolic(2, 0.0, 1.0, -1, 2, 1.0);
    const Quotient q = collapse_fiber(sc);
    const StripComplex intrinsic = build_tree_complex(2, 2.0, 0.0, 1.0, -1, 2);
    const auto ref = reference_bins(intrinsic, GridOptions{257, 1}, {}, t);
    const std::size_t ne = intrinsic.graph().edge_count();
    const double coarse = relative_l1(source_bins(sc, q.map, ne, GridOptions{9, 9}, {}, t), ref);
    const double fine = relative_l1(source_bins(sc, q.map, ne, GridOptions{17, 9}, {}, t), ref);
    r.pass = coarse <= 0.02 && fine < coarse;
    r.detail = "relative L1 vs intrinsic tree: " + num(coarse) + " at 9 nodes/edge, " + num(fine) +
               " at 17 (bound 0.02, must decrease)";
    return r;
}

CriterionResult projection_plane(const AcceptanceOptions&) {
    CriterionResult r;
    const double t = 0.5, R = 1.0;
    const StripComplex sc = treebolic(2, 0.0, 1.0, -1, 2, R);
    const Quotient q = slice_plane(sc);
    const std::vector<double> xb = {-0.5 * R, 0.0, 0.5 * R};
    const StripComplex plane = treebolic(1, 0.0, 2.0, -1, 2, R);
    const StripComplex wrong = treebolic(1, 0.0, 1.0, -1, 2, R);
    const std::size_t ne = plane.graph().edge_count();
    const GridOptions ref_grid{65, 33};
    const auto ref = reference_bins(plane, ref_grid, xb, t);
    const auto ref_wrong = reference_bins(wrong, ref_grid, xb, t);
    const auto coarse_bins = source_bins(sc, q.map, ne, GridOptions{9, 9}, xb, t);
    const double coarse = relative_l1(coarse_bins, ref);
    const double fine = relative_l1(source_bins(sc, q.map, ne, GridOptions{17, 17}, xb, t), ref);
    const double negative = relative_l1(coarse_bins, ref_wrong);
    r.pass = coarse <= 0.02 && fine < coarse && negative > 0.10;
    r.detail = "relative L1 vs plane(beta p = 2): " + num(coarse) + " coarse, " + num(fine) +
               " refined (bound 0.02, must decrease); vs plane(beta = 1): " + num(negative) +
               " (must exceed 0.10)";
    return r;
}

CriterionResult spectral(const AcceptanceOptions&) {
    CriterionResult r;
    const std::vector<double> betas = {0.125, 0.25, 0.5, 1.0, 2.0};
    const std::vector<int> depths = {4, 5, 6};  // levels [-m, m], |x| <= 8 q^m
    std::ostringstream os;
    std::map<double, std::vector<double>> lam;
    for (double beta : betas) {
        os << "beta " << num(beta) << ":";
        for (int m : depths) {
            const double R = 8.0 * std::pow(2.0, m);
            const Discretization d =
                assemble(treebolic(2, 1.0, beta, -m, m, R), GridOptions{5, 9}, BoundaryPolicy::absorbing());
            const double l = spectral_bottom(d).lambda;
            lam[beta].push_back(l);
            os << " " << num(l);
        }
        os << "; ";
    }
    const auto& c = lam[0.5];
    const double crit_drop = 1.0 - c.back() / c.front();
    auto last_drop = [&](double b) {
        const auto& v = lam[b];
        return 1.0 - v[v.size() - 1] / v[v.size() - 2];
    };
    const double lo = last_drop(0.125), hi = last_drop(2.0);
    r.pass = crit_drop >= 0.5 && lo <= 0.10 && hi <= 0.10;
    r.detail = os.str() + "critical drop " + num(crit_drop) + " (>= 0.5), last-step drop at 1/8 " +
               num(lo) + ", at 2 " + num(hi) + " (<= 0.1)";
    return r;
}

CriterionResult transience(const AcceptanceOptions& o) {
    CriterionResult r;
    const Discretization d = assemble(treebolic(2, 0.0, 1.0, -1, 1, 1.0), GridOptions{5, 5},
                                      BoundaryPolicy::absorbing());
    const std::size_t xi = origin_node(d);
    const std::size_t zeta = d.grid.vertex_node(tree_origin(d.complex.graph()), mid(d.grid) + 1);
    const std::vector<double> T = {0.25, 0.5, 1, 2, 4, 8, 16};
    const GreenCurve gc = green_estimate(d, xi, zeta, T, 100000, McOptions{o.seed, o.threads});
    const double ratio = gc.estimate.back() / gc.estimate[gc.estimate.size() - 2];
    std::ostringstream os;
    os << "curve";
    for (std::size_t i = 0; i < T.size(); ++i) os << " " << num(gc.estimate[i]);
    r.pass = ratio >= 1.0 && ratio <= 1.1;
    r.detail = os.str() + "; ratio G(16)/G(8) = " + num(ratio) + " (in [1, 1.1])";
    return r;
}

CriterionResult gaussian(const AcceptanceOptions&) {
    CriterionResult r;
    const StripComplex sc = treebolic(2, 0.0, 1.0, -1, 1, 1.0);
    std::ostringstream os;
    bool ok = true;
    for (double t : {0.25, 1.0}) {
        double c[2];
        int i = 0;
        for (std::size_t n : {9, 17}) {
            const Discretization d = assemble(sc, GridOptions{n, n});
            const std::size_t src = origin_node(d);
            const HeatKernelSlice h = heat_kernel(d, src, t, t / 256, Scheme::ImplicitEuler);
            const auto dist = grid_distances(sc, d.grid, src);
            const GaussianBoundReport rep = gaussian_bound_check(d, h, 0.5, dist);
            ok = ok && rep.non_finite == 0 && std::isfinite(rep.c_star);
            c[i++] = rep.c_star;
        }
        const double drift = std::abs(std::exp(c[1] - c[0]) - 1.0);
        ok = ok && drift <= 0.2;
        os << "t=" << num(t) << ": C* " << num(c[0]) << " / " << num(c[1]) << ", e^dC - 1 = " << num(drift)
           << "; ";
    }
    r.pass = ok;
    r.detail = os.str() + "(finite, stability bound 0.2)";
    return r;
}

CriterionResult exhaustion(const AcceptanceOptions&) {
    CriterionResult r;
    std::ostringstream os;
    bool ok = true;

    // edge-adapted exhaustion
    {
        const MetricGraph g = build_tree(2, 2.0, -1, 3);
        const double eps = 0.05;
        const EdgeExhaustion rho(g, eps, tree_origin(g));
        double slope = 0.0, flat = 0.0;
        for (const Edge& e : g.edges()) {
            const int n = 400;
            for (int i = 0; i <= n; ++i) {
                const double s = e.length * i / n;
                slope = std::max(slope, std::abs(rho.derivative(e.id, s)));
                if (i < n) {
                    const double s1 = e.length * (i + 1) / n;
                    slope = std::max(slope, std::abs(rho.value(e.id, s1) - rho.value(e.id, s)) / (s1 - s));
                }
                if (s <= eps) flat = std::max(flat, std::abs(rho.value(e.id, s) - rho.vertex_value(e.tail)));
                if (e.length - s <= eps)
                    flat = std::max(flat, std::abs(rho.value(e.id, s) - rho.vertex_value(e.head)));
            }
        }
        ok = ok && slope <= 1.0 + 1e-8 && flat <= 1e-12;
        os << "edge: max slope " << num(slope) << ", vertex flatness " << num(flat) << "; ";
    }
    // approximation of unity
    {
        const auto sc = build_uniform_complex(build_path(std::vector<double>(40, 1.0)), Fiber::point(),
                                              Profile::constant(1.0), Profile::constant(1.0));
        const Discretization d = assemble(sc, GridOptions{9, 1});
        const Field rho = sample_exhaustion(d, edge_exhaustion(sc.graph(), 0.1, 0));
        const double g4 = gradient_sup(d, approx_unity(d, rho, 4));
        const double g8 = gradient_sup(d, approx_unity(d, rho, 8));
        ok = ok && g8 <= 0.6 * g4;
        os << "unity: sup grad n=4 " << num(g4) << ", n=8 " << num(g8) << " (ratio " << num(g8 / g4)
           << " <= 0.6); ";
    }
    // strip-adapted exhaustion of treebolic space
    {
        std::vector<double> grads, laps;
        for (int depth : {2, 3, 4, 5}) {
            const StripComplex sc = treebolic(2, 0.0, 1.0, -1, depth, 2.0);
            const Discretization d = assemble(sc, GridOptions{9, 9});
            const Field rho = sample_exhaustion(d, TreebolicExhaustion(sc));
            grads.push_back(gradient_sup(d, rho));
            laps.push_back(laplacian_sup(d, rho));
        }
        // bounded in depth: growth must die out geometrically
        auto contraction = [](const std::vector<double>& v) {
            double worst = 0.0;
            for (std::size_t i = 2; i < v.size(); ++i) {
                const double prev = std::abs(v[i - 1] - v[i - 2]);
                const double cur = std::abs(v[i] - v[i - 1]);
                worst = std::max(worst, prev > 0.0 ? cur / prev : (cur > 0.0 ? 1e300 : 0.0));
            }
            return worst;
        };
        const double gc = contraction(grads), lc = contraction(laps);
        ok = ok && gc <= 0.75 && lc <= 0.75;
        os << "treebolic depths 2-5: sup grad";
        for (double g : grads) os << " " << num(g);
        os << ", sup lap";
        for (double l : laps) os << " " << num(l);
        os << " (increment contraction " << num(gc) << ", " << num(lc) << " <= 0.75)";
    }
    r.pass = ok;
    r.detail = os.str();
    return r;
}

CriterionResult subordination(const AcceptanceOptions&) {
    CriterionResult r;
    double mode_err = 0.0;
    for (int k = 0; k <= 8; ++k)
        mode_err = std::max(mode_err, std::abs(subordinated_multiplier(k * k) - 1.0 / (1 + k)));
    const CircleResolventMoments m = circle_resolvent_moments(2.0 * std::numbers::pi, 8);
    double coef_err = 0.0;
    for (int k = 0; k <= 8; ++k) coef_err = std::max(coef_err, std::abs(m.fourier[k] - 1.0 / (1 + k)));
    const double line_mass = line_resolvent_mass();
    r.pass = mode_err <= 1e-6 && coef_err <= 1e-6 && m.mass <= 1 + 1e-8 && line_mass <= 1 + 1e-8;
    r.detail = "mode identity err " + num(mode_err) + ", Fourier coefficient err " + num(coef_err) +
               " (1e-6); int G dy circle " + std::to_string(m.mass) + ", line " +
               std::to_string(line_mass) + " (<= 1 + 1e-8)";
    return r;
}

CriterionResult smoothness(const AcceptanceOptions&) {
    CriterionResult r;
    const StripComplex sc = treebolic(2, 0.0, 0.5, -1, 2, 1.0);
    const MetricGraph& g = sc.graph();
    const VertexId v = tree_origin(g);
    const EdgeId parent = *tree_parent_edge(g, v);
    const EdgeId child = tree_child_edges(g, v).front();
    const VertexId src_vertex = g.edge(child).head;
    std::vector<Discretization> ds;
    for (std::size_t n : {5, 9, 17}) ds.push_back(assemble(sc, GridOptions{n, 2 * n - 1}));
    std::vector<const Discretization*> ladder;
    for (const auto& d : ds) ladder.push_back(&d);
    const double t = 0.5;
    auto solver = [&](const Discretization& d) {
        return heat_kernel(d, d.grid.vertex_node(src_vertex, mid(d.grid)), t, t / 1024).values;
    };
    const ProbeReport rep = smoothness_probe(ladder, solver, v, parent, child);
    r.pass = rep.ds_gap > 5.0 * rep.ds_cauchy && rep.dx_gap <= rep.dx_cauchy;
    r.detail = "d/ds gap " + num(rep.ds_gap) + " vs Cauchy tolerance " + num(rep.ds_cauchy) +
               " (gap > 5x); d/dx gap " + num(rep.dx_gap) + " vs tolerance " + num(rep.dx_cauchy) +
               (rep.converging ? "" : " [ladder not contracting]");
    return r;
}

struct Entry {
    const char* name;
    CriterionResult (*fn)(const AcceptanceOptions&);
};

const Entry kCriteria[] = {
    {"conservation", conservation},
    {"kernel-symmetry", symmetry},
    {"kirchhoff-residual", kirchhoff},
    {"oracle-equivalence", oracle},
    {"projection-tree", projection_tree},
    {"projection-plane", projection_plane},
    {"spectral-bottom", spectral},
    {"transience", transience},
    {"gaussian-bound", gaussian},
    {"exhaustion", exhaustion},
    {"subordination", subordination},
    {"smoothness-probe", smoothness},
};

}  // namespace

int criterion_count() { return static_cast<int>(std::size(kCriteria)); }

std::string criterion_name(int id) {
    if (id < 1 || id > criterion_count()) throw ParameterError("no criterion " + std::to_string(id));
    return kCriteria[id - 1].name;
}

std::string CriterionResult::line() const {
    char head[64];
    std::snprintf(head, sizeof head, "%s %2d %-20s ", pass ? "PASS" : "FAIL", id, name.c_str());
    return head + detail;
}

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
    const std::string name = criterion_name(id);
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
        r = kCriteria[id - 1].fn(options);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("error: ") + e.what();
    }
    r.id = id;
    r.name = name;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
    std::vector<int> ids = options.only;
    if (ids.empty())
        for (int i = 1; i <= criterion_count(); ++i) ids.push_back(i);
    std::vector<CriterionResult> out;
    for (int id : ids) {
        out.push_back(run_criterion(id, options));
        if (options.on_result) options.on_result(out.back());
    }
    return out;
}

}  // namespace stripflow
