#include "stripflow/exhaustion.hpp"

#include <algorithm>
#include <cmath>

#include "stripflow/error.hpp"
#include "stripflow/grid_metric.hpp"

namespace stripflow {

double Theta::operator()(double r) const {
    if (r <= inner) return 1.0;
    if (r >= outer) return 0.0;
    const double t = (r - inner) / (outer - inner);
    return 1.0 - t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double Theta::derivative(double r) const {
    if (r <= inner || r >= outer) return 0.0;
    const double t = (r - inner) / (outer - inner);
    return -30.0 * t * t * (t - 1.0) * (t - 1.0) / (outer - inner);
}

Field sample_exhaustion(const Discretization& d, const EdgeExhaustion& rho) {
    return sample_field(d, [&](EdgeId e, double s, double) { return rho.value(e, s); });
}

Field sample_exhaustion(const Discretization& d, const TreebolicExhaustion& rho) {
    return sample_field(d, [&](EdgeId e, double s, double x) {
        return rho(PointOnComplex{StripPoint{e, s, x}});
    });
}

Field approx_unity(const Discretization& d, const Field& rho0, int n, const Theta& theta) {
    if (rho0.size() == 0) throw ConfigurationError("approx_unity needs an exhaustion");
    if (static_cast<std::size_t>(rho0.size()) != d.dof_count()) {
        throw ShapeError("exhaustion does not match the grid");
    }
    if (n < 1) throw ParameterError("scale n must be positive");
    if (!(theta.inner > 0.0 && theta.outer > theta.inner)) throw ParameterError("bad cutoff");
    Field out(rho0.size());
    for (Eigen::Index k = 0; k < rho0.size(); ++k) out[k] = theta(rho0[k] / n);
    return out;
}

double gradient_sup(const Discretization& d, const Field& f) {
    if (static_cast<std::size_t>(f.size()) != d.dof_count()) throw ShapeError("field size");
    const Grid& grid = d.grid;
    const StripComplex& sc = d.complex;
    const auto& xs = grid.fiber_nodes();
    double best = 0.0;
    for (EdgeId e = 0; e < grid.edge_count(); ++e) {
        const auto& s = grid.s_nodes(e);
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (std::size_t j = 0; j < grid.fiber_count(); ++j) {
                const double fa = f[static_cast<Eigen::Index>(grid.node(e, i, j))];
                if (i + 1 < s.size()) {
                    const double fb = f[static_cast<Eigen::Index>(grid.node(e, i + 1, j))];
                    const double len = segment_length(sc, e, s[i], xs[j], s[i + 1], xs[j]);
                    best = std::max(best, std::abs(fb - fa) / len);
                }
            }
            for (const auto& l : grid.fiber_links()) {
                const double fa = f[static_cast<Eigen::Index>(grid.node(e, i, l.a))];
                const double fb = f[static_cast<Eigen::Index>(grid.node(e, i, l.b))];
                const double len = std::sqrt(sc.coefficients(e).phi(s[i])) * l.dx;
                best = std::max(best, std::abs(fb - fa) / len);
            }
        }
    }
    return best;
}

double laplacian_sup(const Discretization& d, const Field& f) {
    if (static_cast<std::size_t>(f.size()) != d.dof_count()) throw ShapeError("field size");
    // Reflecting generator regardless of the pinning of d.
    const Field lf = -(d.stiffness * f).cwiseQuotient(d.mass);
    const MetricGraph& g = d.complex.graph();
    double best = 0.0;
    for (std::size_t k = 0; k < d.dof_count(); ++k) {
        const NodeInfo& n = d.grid.info(k);
        if (d.grid.is_fiber_end(n.x_index)) continue;
        if (n.kind == NodeInfo::Kind::Vertex && g.vertex(n.vertex).truncation_boundary) continue;
        best = std::max(best, std::abs(lf[static_cast<Eigen::Index>(k)]));
    }
    return best;
}

}  // namespace stripflow
