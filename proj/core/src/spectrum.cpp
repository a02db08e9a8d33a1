#include "stripflow/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "stripflow/error.hpp"

namespace stripflow {

namespace {

struct FreeProblem {
    std::vector<std::size_t> free;
    SparseMatrix k;
    Eigen::VectorXd m;
};

FreeProblem restrict_free(const Discretization& d) {
    FreeProblem p;
    p.free = d.free_dofs();
    const auto idx = d.free_index();
    std::vector<Eigen::Triplet<double>> trips;
    for (Eigen::Index c = 0; c < d.stiffness.outerSize(); ++c) {
        const auto jc = idx[static_cast<std::size_t>(c)];
        if (jc < 0) continue;
        for (SparseMatrix::InnerIterator it(d.stiffness, c); it; ++it) {
            const auto ir = idx[static_cast<std::size_t>(it.row())];
            if (ir >= 0) trips.emplace_back(ir, jc, it.value());
        }
    }
    const auto n = static_cast<Eigen::Index>(p.free.size());
    p.k.resize(n, n);
    p.k.setFromTriplets(trips.begin(), trips.end());
    p.m.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) p.m[i] = d.mass[static_cast<Eigen::Index>(p.free[static_cast<std::size_t>(i)])];
    return p;
}

Field expand(const Discretization& d, const FreeProblem& p, const Eigen::VectorXd& v) {
    Field out = Field::Zero(static_cast<Eigen::Index>(d.dof_count()));
    for (std::size_t i = 0; i < p.free.size(); ++i) {
        out[static_cast<Eigen::Index>(p.free[i])] = v[static_cast<Eigen::Index>(i)];
    }
    return out;
}

double m_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& m) {
    return std::sqrt(v.cwiseProduct(v).dot(m));
}

double residual_of(const FreeProblem& p, const Eigen::VectorXd& v, double lambda) {
    const Eigen::VectorXd r = p.k * v - lambda * p.m.cwiseProduct(v);
    return std::sqrt(r.cwiseProduct(r).cwiseQuotient(p.m).sum());
}

}  // namespace

SpectralBottom spectral_bottom(const Discretization& d, const SpectrumOptions& opt) {
    const FreeProblem p = restrict_free(d);
    const auto n = static_cast<Eigen::Index>(p.free.size());
    const Eigen::VectorXd sq = p.m.cwiseSqrt();
    SpectralBottom out;

    if (static_cast<std::size_t>(n) <= opt.dense_limit) {
        Eigen::MatrixXd s = Eigen::MatrixXd(p.k);
        s = sq.cwiseInverse().asDiagonal() * s * sq.cwiseInverse().asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
        if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
        out.lambda = std::max(0.0, es.eigenvalues()[0]);
        Eigen::VectorXd v = es.eigenvectors().col(0).cwiseQuotient(sq);
        if (v.sum() < 0) v = -v;
        v /= m_norm(v, p.m);
        out.residual = residual_of(p, v, out.lambda);
        out.eigenvector = expand(d, p, v);
        return out;
    }

    double diag_scale = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) diag_scale = std::max(diag_scale, p.k.coeff(i, i) / p.m[i]);
    const double sigma = -1e-8 * diag_scale;
    SparseMatrix shifted = p.k;
    for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma * p.m[i];
    Eigen::SimplicialLDLT<SparseMatrix> solver(shifted);
    if (solver.info() != Eigen::Success) throw NumericalError("shift-invert factorization failed");

    // y = M^{1/2} v; Op y = M^{1/2} (K - sigma M)^{-1} M^{1/2} y.
    auto op = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
        const Eigen::VectorXd b = sq.cwiseProduct(y);
        return sq.cwiseProduct(solver.solve(b));
    };

    const std::size_t m = std::min<std::size_t>(opt.krylov_dim, static_cast<std::size_t>(n));
    Eigen::VectorXd start(n);
    for (Eigen::Index i = 0; i < n; ++i) start[i] = sq[i] * (1.0 + 0.1 * std::sin(1.0 + static_cast<double>(i)));
    start.normalize();

    double last_resid = INFINITY;
    for (std::size_t restart = 0; restart <= opt.max_restarts; ++restart) {
        Eigen::MatrixXd V(n, static_cast<Eigen::Index>(m) + 1);
        Eigen::VectorXd alpha(static_cast<Eigen::Index>(m)), beta(static_cast<Eigen::Index>(m));
        V.col(0) = start;
        std::size_t steps = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            Eigen::VectorXd w = op(V.col(jj));
            alpha[jj] = V.col(jj).dot(w);
            for (int pass = 0; pass < 2; ++pass) {
                const Eigen::VectorXd c = V.leftCols(jj + 1).transpose() * w;
                w -= V.leftCols(jj + 1) * c;
            }
            beta[jj] = w.norm();
            ++steps;
            ++out.iterations;
            if (beta[jj] <= 1e-14 * std::abs(alpha[jj])) break;
            V.col(jj + 1) = w / beta[jj];
        }
        const auto k = static_cast<Eigen::Index>(steps);
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        const double theta = es.eigenvalues()[k - 1];
        Eigen::VectorXd y = V.leftCols(k) * es.eigenvectors().col(k - 1);
        Eigen::VectorXd v = y.cwiseQuotient(sq);
        if (v.sum() < 0) v = -v;
        v /= m_norm(v, p.m);
        const double lambda = sigma + 1.0 / theta;
        const double resid = residual_of(p, v, lambda);
        const double scale = lambda - sigma;
        bool done = resid <= opt.tolerance * scale;
        if (!done && k >= 2) {
            // Eigenvalue error bound resid^2 / gap with the next Ritz value.
            const double lambda2 = sigma + 1.0 / es.eigenvalues()[k - 2];
            const double gap = lambda2 - lambda;
            if (gap > 0 && resid * resid / gap <= opt.tolerance * scale) done = true;
        }
        out.lambda = std::max(0.0, lambda);
        out.residual = resid;
        out.eigenvector = expand(d, p, v);
        if (done) return out;
        last_resid = resid;
        start = y.normalized();
    }
    std::ostringstream os;
    os << "spectral bottom did not converge after " << out.iterations
       << " Lanczos steps, residual " << last_resid;
    throw NumericalError(os.str());
}

}  // namespace stripflow
