#include "stripflow/heat_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "stripflow/error.hpp"

namespace stripflow {

namespace {

void check_size(const Discretization& d, const Field& f) {
    if (static_cast<std::size_t>(f.size()) != d.dof_count()) {
        throw ShapeError("field has " + std::to_string(f.size()) + " entries, expected " +
                         std::to_string(d.dof_count()));
    }
}

SparseMatrix free_block(const Discretization& d, const std::vector<std::ptrdiff_t>& idx,
                        std::size_t nfree) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(d.stiffness.nonZeros()));
    for (Eigen::Index c = 0; c < d.stiffness.outerSize(); ++c) {
        const auto jc = idx[static_cast<std::size_t>(c)];
        if (jc < 0) continue;
        for (SparseMatrix::InnerIterator it(d.stiffness, c); it; ++it) {
            const auto ir = idx[static_cast<std::size_t>(it.row())];
            if (ir < 0) continue;
            trips.emplace_back(ir, jc, it.value());
        }
    }
    const auto n = static_cast<Eigen::Index>(nfree);
    SparseMatrix out(n, n);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

}  // namespace

struct HeatPropagator::Impl {
    std::vector<std::size_t> free;
    SparseMatrix lhs;
    SparseMatrix rhs;
    Eigen::SimplicialLDLT<SparseMatrix> solver;
};

HeatPropagator::HeatPropagator(const Discretization& d, double dt, Scheme scheme)
    : d_(&d), dt_(dt), scheme_(scheme), impl_(std::make_unique<Impl>()) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("time step must be positive");
    impl_->free = d.free_dofs();
    const auto idx = d.free_index();
    const SparseMatrix kf = free_block(d, idx, impl_->free.size());
    const auto n = static_cast<Eigen::Index>(impl_->free.size());
    SparseMatrix m(n, n);
    std::vector<Eigen::Triplet<double>> diag;
    for (Eigen::Index k = 0; k < n; ++k) {
        diag.emplace_back(k, k, d.mass[static_cast<Eigen::Index>(impl_->free[static_cast<std::size_t>(k)])]);
    }
    m.setFromTriplets(diag.begin(), diag.end());
    const double theta = scheme == Scheme::ImplicitEuler ? 1.0 : 0.5;
    impl_->lhs = m + (theta * dt) * kf;
    impl_->rhs = m - ((1.0 - theta) * dt) * kf;
    impl_->solver.compute(impl_->lhs);
    if (impl_->solver.info() != Eigen::Success) {
        throw NumericalError("factorization of the heat step matrix failed");
    }
}

HeatPropagator::~HeatPropagator() = default;
HeatPropagator::HeatPropagator(HeatPropagator&&) noexcept = default;
HeatPropagator& HeatPropagator::operator=(HeatPropagator&&) noexcept = default;

Field HeatPropagator::advance(const Field& f, std::size_t steps) const {
    check_size(*d_, f);
    const auto& free = impl_->free;
    Eigen::VectorXd u(static_cast<Eigen::Index>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k) {
        u[static_cast<Eigen::Index>(k)] = f[static_cast<Eigen::Index>(free[k])];
    }
    for (std::size_t step = 0; step < steps; ++step) {
        const Eigen::VectorXd b = impl_->rhs * u;
        u = impl_->solver.solve(b);
        if (step == 0) {
            const double res = (impl_->lhs * u - b).norm();
            const double scale = std::max(b.norm(), std::numeric_limits<double>::min());
            if (!(res <= 1e-9 * scale)) {
                std::ostringstream os;
                os << "heat step solve did not converge, relative residual " << res / scale;
                throw NumericalError(os.str());
            }
        }
    }
    Field out = Field::Zero(f.size());
    for (std::size_t k = 0; k < free.size(); ++k) {
        out[static_cast<Eigen::Index>(free[k])] = u[static_cast<Eigen::Index>(k)];
    }
    return out;
}

Field step_heat(const Discretization& d, const Field& f0, double t, double dt, Scheme scheme) {
    check_size(d, f0);
    if (!(t > 0.0)) throw ParameterError("time must be positive");
    if (!(dt > 0.0) || dt > t * (1.0 + 1e-12)) throw ParameterError("need 0 < dt <= t");
    const auto steps = static_cast<std::size_t>(std::ceil(t / dt - 1e-9));
    HeatPropagator prop(d, t / static_cast<double>(steps), scheme);
    return prop.advance(f0, steps);
}

HeatKernelSlice heat_kernel(const Discretization& d, std::size_t source, double t, double dt,
                            Scheme scheme) {
    if (source >= d.dof_count()) throw DomainError("source DOF out of range");
    if (d.pinned[source]) throw DomainError("source DOF is pinned");
    Field delta = Field::Zero(static_cast<Eigen::Index>(d.dof_count()));
    delta[static_cast<Eigen::Index>(source)] = 1.0 / d.mass[static_cast<Eigen::Index>(source)];
    return {t, source, step_heat(d, delta, t, dt, scheme)};
}

Field solve_harmonic(const Discretization& d, const std::map<std::size_t, double>& boundary) {
    const std::size_t n = d.dof_count();
    std::vector<bool> is_b(n, false);
    Field ub = Field::Zero(static_cast<Eigen::Index>(n));
    for (const auto& [k, val] : boundary) {
        if (k >= n) throw DomainError("boundary DOF out of range");
        is_b[k] = true;
        ub[static_cast<Eigen::Index>(k)] = d.pinned[k] ? 0.0 : val;
    }
    for (std::size_t k = 0; k < n; ++k) is_b[k] = is_b[k] || d.pinned[k];
    if (std::none_of(is_b.begin(), is_b.end(), [](bool b) { return b; })) {
        throw ConfigurationError("harmonic problem without boundary is singular");
    }
    std::vector<std::ptrdiff_t> idx(n, -1);
    std::vector<std::size_t> interior;
    for (std::size_t k = 0; k < n; ++k) {
        if (!is_b[k]) {
            idx[k] = static_cast<std::ptrdiff_t>(interior.size());
            interior.push_back(k);
        }
    }
    Field out = ub;
    if (interior.empty()) return out;
    const SparseMatrix kii = free_block(d, idx, interior.size());
    const Field rhs_full = -(d.stiffness * ub);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(interior.size()));
    for (std::size_t k = 0; k < interior.size(); ++k) {
        rhs[static_cast<Eigen::Index>(k)] = rhs_full[static_cast<Eigen::Index>(interior[k])];
    }
    Eigen::SimplicialLDLT<SparseMatrix> solver(kii);
    if (solver.info() != Eigen::Success) {
        throw ConfigurationError("interior block is singular (a component has no boundary)");
    }
    const Eigen::VectorXd ui = solver.solve(rhs);
    const double res = (kii * ui - rhs).norm();
    if (!(res <= 1e-8 * std::max(1.0, rhs.norm()))) {
        throw ConfigurationError("interior block is singular (a component has no boundary)");
    }
    for (std::size_t k = 0; k < interior.size(); ++k) {
        out[static_cast<Eigen::Index>(interior[k])] = ui[static_cast<Eigen::Index>(k)];
    }
    return out;
}

double one_sided_derivative(const Discretization& d, const Field& f, EdgeId e, VertexId v,
                            std::size_t j) {
    check_size(d, f);
    const Edge& edge = d.complex.graph().edge(e);
    const auto& s = d.grid.s_nodes(e);
    const std::size_t ns = s.size();
    if (ns < 3) throw ParameterError("one-sided derivative needs 3 s-nodes per edge");
    std::size_t i0, i1, i2;
    if (edge.tail == v) {
        i0 = 0, i1 = 1, i2 = 2;
    } else if (edge.head == v) {
        i0 = ns - 1, i1 = ns - 2, i2 = ns - 3;
    } else {
        throw DomainError("edge is not incident to the vertex");
    }
    const double h1 = std::abs(s[i1] - s[i0]);
    const double h2 = std::abs(s[i2] - s[i0]);
    const double f0 = f[static_cast<Eigen::Index>(d.grid.node(e, i0, j))];
    const double d1 = f[static_cast<Eigen::Index>(d.grid.node(e, i1, j))] - f0;
    const double d2 = f[static_cast<Eigen::Index>(d.grid.node(e, i2, j))] - f0;
    return (h2 * h2 * d1 - h1 * h1 * d2) / (h1 * h2 * (h2 - h1));
}

KirchhoffResidual kirchhoff_residual(const Discretization& d, const Field& f, VertexId v) {
    check_size(d, f);
    const MetricGraph& g = d.complex.graph();
    if (g.vertex(v).truncation_boundary) throw DomainError("vertex lies on the truncation boundary");
    KirchhoffResidual out;
    out.residual.assign(d.grid.fiber_count(), 0.0);
    for (EdgeId e : g.incident(v)) {
        const Edge& edge = g.edge(e);
        const double av = d.complex.coefficients(e).a(edge.tail == v ? 0.0 : edge.length);
        for (std::size_t j = 0; j < d.grid.fiber_count(); ++j) {
            out.residual[j] += av * one_sided_derivative(d, f, e, v, j);
        }
    }
    for (double r : out.residual) out.max_norm = std::max(out.max_norm, std::abs(r));
    return out;
}

GaussianBoundReport gaussian_bound_check(const Discretization& d, const HeatKernelSlice& slice,
                                         double epsilon, const std::vector<double>& distances) {
    check_size(d, slice.values);
    if (distances.size() != d.dof_count()) throw ShapeError("distance vector size");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0, 1)");
    GaussianBoundReport rep;
    rep.c_star = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < d.dof_count(); ++k) {
        if (d.pinned[k]) continue;
        const double h = slice.values[static_cast<Eigen::Index>(k)];
        const double dist = distances[k];
        if (!(h > 0.0) || !std::isfinite(h) || !std::isfinite(dist)) {
            ++rep.non_finite;
            continue;
        }
        const double c = std::log(h) + dist * dist / (4.0 * (1.0 + epsilon) * slice.t);
        if (c > rep.c_star) {
            rep.c_star = c;
            rep.argmax = k;
        }
    }
    return rep;
}

namespace {

// Indices of the s-nodes at distance rank 0, 1, 2, 3 from v on edge e.
std::array<std::size_t, 4> layers_from(const Discretization& d, EdgeId e, VertexId v) {
    const Edge& edge = d.complex.graph().edge(e);
    const std::size_t ns = d.grid.nodes_per_edge();
    if (ns < 4) throw ParameterError("smoothness probe needs 4 s-nodes per edge");
    if (edge.tail == v) return {0, 1, 2, 3};
    if (edge.head == v) return {ns - 1, ns - 2, ns - 3, ns - 4};
    throw DomainError("edge is not incident to the vertex");
}

std::size_t match_x(const Grid& g, double x) {
    const auto& xs = g.fiber_nodes();
    for (std::size_t j = 0; j < xs.size(); ++j) {
        if (std::abs(xs[j] - x) <= 1e-12 * std::max(1.0, std::abs(x))) return j;
    }
    throw ConfigurationError("refinement ladder is not nested in the fiber");
}

double dx_at(const Discretization& d, const Field& f, EdgeId e, std::size_t i, std::size_t j) {
    const auto& xs = d.grid.fiber_nodes();
    const double fp = f[static_cast<Eigen::Index>(d.grid.node(e, i, j + 1))];
    const double fm = f[static_cast<Eigen::Index>(d.grid.node(e, i, j - 1))];
    return (fp - fm) / (xs[j + 1] - xs[j - 1]);
}

// Quadratic extrapolation of d/dx from the first three interior layers.
double dx_extrapolated(const Discretization& d, const Field& f, EdgeId e, VertexId v,
                       std::size_t j) {
    const auto l = layers_from(d, e, v);
    const auto& s = d.grid.s_nodes(e);
    double r[3], g[3];
    for (int k = 0; k < 3; ++k) {
        r[k] = std::abs(s[l[k + 1]] - s[l[0]]);
        g[k] = dx_at(d, f, e, l[k + 1], j);
    }
    double out = 0.0;
    for (int a = 0; a < 3; ++a) {
        double w = 1.0;
        for (int b = 0; b < 3; ++b) {
            if (b != a) w *= (0.0 - r[b]) / (r[a] - r[b]);
        }
        out += w * g[a];
    }
    return out;
}

double ds_oriented(const Discretization& d, const Field& f, EdgeId e, VertexId v, std::size_t j) {
    const double into = one_sided_derivative(d, f, e, v, j);
    return d.complex.graph().edge(e).tail == v ? into : -into;
}

}  // namespace

ProbeReport smoothness_probe(const std::vector<const Discretization*>& ladder,
                             const std::function<Field(const Discretization&)>& solver,
                             VertexId v, EdgeId e1, EdgeId e2) {
    if (ladder.size() < 3) throw ParameterError("smoothness probe needs at least 3 levels");
    const Grid& coarse = ladder.front()->grid;
    if (coarse.fiber_count() < 3) throw ParameterError("smoothness probe needs 3 fiber nodes");

    std::vector<double> xs;
    for (std::size_t j = 1; j + 1 < coarse.fiber_count(); ++j) xs.push_back(coarse.fiber_nodes()[j]);

    // values[level][sample] = {ds1, ds2, dx1, dx2}
    std::vector<std::vector<std::array<double, 4>>> values;
    for (const Discretization* d : ladder) {
        const Field f = solver(*d);
        check_size(*d, f);
        std::vector<std::array<double, 4>> row;
        for (double x : xs) {
            const std::size_t j = match_x(d->grid, x);
            row.push_back({ds_oriented(*d, f, e1, v, j), ds_oriented(*d, f, e2, v, j),
                           dx_extrapolated(*d, f, e1, v, j), dx_extrapolated(*d, f, e2, v, j)});
        }
        values.push_back(std::move(row));
    }

    ProbeReport rep;
    const std::size_t L = values.size();
    for (std::size_t k = 0; k < xs.size(); ++k) {
        ProbeSample s;
        s.x = xs[k];
        const auto& fine = values[L - 1][k];
        const auto& prev = values[L - 2][k];
        const auto& prev2 = values[L - 3][k];
        s.ds_first = fine[0];
        s.ds_second = fine[1];
        s.dx_first = fine[2];
        s.dx_second = fine[3];
        s.ds_cauchy = std::max(std::abs(fine[0] - prev[0]), std::abs(fine[1] - prev[1]));
        s.dx_cauchy = std::max(std::abs(fine[2] - prev[2]), std::abs(fine[3] - prev[3]));
        const double older = std::max(std::abs(prev[0] - prev2[0]), std::abs(prev[1] - prev2[1]));
        if (s.ds_cauchy > older) rep.converging = false;
        rep.ds_gap = std::max(rep.ds_gap, std::abs(s.ds_first - s.ds_second));
        rep.dx_gap = std::max(rep.dx_gap, std::abs(s.dx_first - s.dx_second));
        rep.ds_cauchy = std::max(rep.ds_cauchy, s.ds_cauchy);
        rep.dx_cauchy = std::max(rep.dx_cauchy, s.dx_cauchy);
        rep.samples.push_back(s);
    }
    return rep;
}

}  // namespace stripflow
