#include "stripflow/brownian.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <thread>

#include "stripflow/error.hpp"

namespace stripflow {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

WalkerRng::WalkerRng(std::uint64_t seed, std::uint64_t index)
    : gen_(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL))) {}

double WalkerRng::uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

double WalkerRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
}

double WalkerRng::exponential() { return -std::log1p(-uniform()); }

Field EmpiricalMeasure::density() const {
    Field out(masses.size());
    for (Eigen::Index k = 0; k < masses.size(); ++k) {
        out[k] = total == 0 ? 0.0
                            : static_cast<double>(counts[static_cast<std::size_t>(k)]) /
                                  (static_cast<double>(total) * masses[k]);
    }
    return out;
}

std::vector<double> EmpiricalMeasure::fractions() const {
    std::vector<double> out(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        out[k] = total == 0 ? 0.0 : static_cast<double>(counts[k]) / static_cast<double>(total);
    }
    return out;
}

namespace {

// Splits [0, n) into contiguous chunks, one per thread.
void parallel_chunks(std::size_t n, unsigned threads,
                     const std::function<void(unsigned, std::size_t, std::size_t)>& work) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        work(0, 0, n);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = n * t / threads;
        const std::size_t hi = n * (t + 1) / threads;
        pool.emplace_back(work, t, lo, hi);
    }
    for (auto& th : pool) th.join();
}

struct JumpChain {
    std::vector<double> rate;
    std::vector<std::size_t> start;
    std::vector<std::size_t> target;
    std::vector<double> cumulative;

    explicit JumpChain(const Discretization& d) {
        const std::size_t n = d.dof_count();
        rate.assign(n, 0.0);
        start.assign(n + 1, 0);
        for (std::size_t c = 0; c < n; ++c) {
            start[c] = target.size();
            double sum = 0.0;
            const std::size_t first = target.size();
            for (SparseMatrix::InnerIterator it(d.stiffness, static_cast<Eigen::Index>(c)); it; ++it) {
                if (static_cast<std::size_t>(it.row()) == c || !(it.value() < 0.0)) continue;
                sum += -it.value();
                target.push_back(static_cast<std::size_t>(it.row()));
                cumulative.push_back(sum);
            }
            for (std::size_t k = first; k < target.size(); ++k) cumulative[k] /= sum;
            if (target.size() > first) cumulative.back() = 1.0;
            rate[c] = sum / d.mass[static_cast<Eigen::Index>(c)];
        }
        start[n] = target.size();
    }

    std::size_t jump(std::size_t i, double u) const {
        const auto b = cumulative.begin() + static_cast<std::ptrdiff_t>(start[i]);
        const auto e = cumulative.begin() + static_cast<std::ptrdiff_t>(start[i + 1]);
        auto it = std::upper_bound(b, e, u);
        if (it == e) --it;
        return target[static_cast<std::size_t>(it - cumulative.begin())];
    }
};

void check_source(const Discretization& d, std::size_t source) {
    if (source >= d.dof_count()) throw DomainError("source DOF out of range");
    if (d.pinned[source]) throw DomainError("source DOF is pinned");
}

}  // namespace

EmpiricalMeasure sample_ctmc(const Discretization& d, std::size_t source, double t,
                             std::size_t n_paths, const McOptions& options) {
    check_source(d, source);
    if (!(t >= 0.0)) throw ParameterError("time must be nonnegative");
    if (n_paths == 0) throw ParameterError("need at least one path");
    const JumpChain chain(d);
    const std::size_t n = d.dof_count();
    const unsigned threads = std::max(1u, options.threads);
    std::vector<std::vector<std::uint64_t>> local(threads, std::vector<std::uint64_t>(n + 1, 0));
    parallel_chunks(n_paths, threads, [&](unsigned tid, std::size_t lo, std::size_t hi) {
        auto& cnt = local[tid];
        for (std::size_t w = lo; w < hi; ++w) {
            WalkerRng rng(options.seed, w);
            std::size_t i = source;
            double clock = 0.0;
            bool dead = false;
            while (true) {
                if (chain.rate[i] <= 0.0) break;
                clock += rng.exponential() / chain.rate[i];
                if (clock > t) break;
                i = chain.jump(i, rng.uniform());
                if (d.pinned[i]) {
                    dead = true;
                    break;
                }
            }
            ++cnt[dead ? n : i];
        }
    });
    EmpiricalMeasure out;
    out.counts.assign(n, 0);
    for (const auto& cnt : local) {
        for (std::size_t k = 0; k < n; ++k) out.counts[k] += cnt[k];
        out.absorbed += cnt[n];
    }
    out.total = n_paths;
    out.masses = d.mass;
    return out;
}

SdeStepper::SdeStepper(const StripComplex& sc, double dt) : sc_(&sc), dt_(dt) {
    if (!(dt > 0.0)) throw ParameterError("time step must be positive");
    const MetricGraph& g = sc.graph();
    cumulative_.resize(g.vertex_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        auto w = branch_weights(v);
        double sum = 0.0;
        for (double& x : w) {
            sum += x;
            x = sum;
        }
        for (double& x : w) x /= sum;
        cumulative_[v] = std::move(w);
    }
}

std::vector<double> SdeStepper::branch_weights(VertexId v) const {
    const MetricGraph& g = sc_->graph();
    std::vector<double> w;
    for (EdgeId e : g.incident(v)) {
        const Edge& edge = g.edge(e);
        const double s = edge.tail == v ? 0.0 : edge.length;
        const auto& co = sc_->coefficients(e);
        w.push_back(std::sqrt(co.a(s) * co.m(s)));
    }
    return w;
}

EdgeId SdeStepper::choose_edge(VertexId v, WalkerRng& rng) const {
    const auto& cum = cumulative_.at(v);
    const double u = rng.uniform();
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    if (it == cum.end()) --it;
    return sc_->graph().incident(v)[static_cast<std::size_t>(it - cum.begin())];
}

void SdeStepper::reflect_fiber(double& x) const {
    const Fiber& f = sc_->fiber();
    if (f.kind == Fiber::Kind::Circle) {
        x = std::fmod(x, f.length);
        if (x < 0) x += f.length;
        if (x >= f.length) x = 0.0;
    } else if (f.kind == Fiber::Kind::Interval) {
        const double h = 0.5 * f.length;
        // Fold onto [-h, h] (period 2L reflection).
        double y = std::fmod(x + h, 2.0 * f.length);
        if (y < 0) y += 2.0 * f.length;
        if (y > f.length) y = 2.0 * f.length - y;
        x = y - h;
    } else {
        x = 0.0;
    }
}

void SdeStepper::enter_from_vertex(SdeState& st, VertexId v, double overshoot, double diff_old,
                                   WalkerRng& rng) const {
    const MetricGraph& g = sc_->graph();
    EdgeId e = st.edge;
    double o = overshoot;
    if (!g.vertex(v).truncation_boundary) {
        e = choose_edge(v, rng);
        const Edge& ne = g.edge(e);
        const double sv = ne.tail == v ? 0.0 : ne.length;
        const auto& co = sc_->coefficients(e);
        o *= std::sqrt(co.a(sv) / co.m(sv) / diff_old);
    }
    const Edge& ne = g.edge(e);
    if (o > ne.length) throw NumericalError("SDE step crosses two vertices; reduce dt");
    st.edge = e;
    st.s = ne.tail == v ? o : ne.length - o;
}

void SdeStepper::step(SdeState& st, WalkerRng& rng) const {
    const MetricGraph& g = sc_->graph();
    const Edge& edge = g.edge(st.edge);
    const auto& co = sc_->coefficients(st.edge);
    const double a = co.a(st.s);
    const double m = co.m(st.s);
    const double diff = a / m;
    const double sd = std::sqrt(2.0 * diff * dt_);
    const double s_new = st.s + co.a.derivative(st.s) / m * dt_ + sd * rng.normal();
    if (sc_->fiber().kind != Fiber::Kind::Point) {
        st.x += sd * rng.normal();
        reflect_fiber(st.x);
    }
    if (s_new < 0.0) {
        enter_from_vertex(st, edge.tail, -s_new, diff, rng);
        return;
    }
    if (s_new > edge.length) {
        enter_from_vertex(st, edge.head, s_new - edge.length, diff, rng);
        return;
    }
    // Brownian-bridge test for an excursion through the nearer vertex.
    const bool tail_near = st.s + s_new < 2.0 * edge.length - st.s - s_new;
    const VertexId v = tail_near ? edge.tail : edge.head;
    const double d0 = tail_near ? st.s : edge.length - st.s;
    const double d1 = tail_near ? s_new : edge.length - s_new;
    const double p_cross = std::exp(-2.0 * d0 * d1 / (sd * sd));
    const double u = rng.uniform();
    if (!g.vertex(v).truncation_boundary && u < p_cross) {
        enter_from_vertex(st, v, d1, diff, rng);
        return;
    }
    st.s = s_new;
}

EmpiricalMeasure sample_sde(const StripComplex& sc, const PointOnComplex& source, double t,
                            double dt, std::size_t n_paths, const Discretization& reference,
                            const McOptions& options) {
    if (reference.complex.graph().edge_count() != sc.graph().edge_count()) {
        throw ConfigurationError("reference grid belongs to a different complex");
    }
    if (!(t > 0.0) || !(dt > 0.0)) throw ParameterError("need t > 0 and dt > 0");
    if (n_paths == 0) throw ParameterError("need at least one path");
    const StripPoint start = to_strip_point(sc, source);
    const auto steps = static_cast<std::size_t>(std::ceil(t / dt - 1e-9));
    const SdeStepper stepper(sc, t / static_cast<double>(steps));
    const std::size_t n = reference.dof_count();
    const unsigned threads = std::max(1u, options.threads);
    std::vector<std::vector<std::uint64_t>> local(threads, std::vector<std::uint64_t>(n, 0));
    std::vector<std::exception_ptr> errors(threads);
    parallel_chunks(n_paths, threads, [&](unsigned tid, std::size_t lo, std::size_t hi) {
        try {
            for (std::size_t w = lo; w < hi; ++w) {
                WalkerRng rng(options.seed, w);
                SdeState st{start.edge, start.s, start.x};
                for (std::size_t k = 0; k < steps; ++k) stepper.step(st, rng);
                if (sc.fiber().kind == Fiber::Kind::Point) st.x = 0.0;
                ++local[tid][reference.grid.nearest_node(sc, StripPoint{st.edge, st.s, st.x})];
            }
        } catch (...) {
            errors[tid] = std::current_exception();
        }
    });
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    EmpiricalMeasure out;
    out.counts.assign(n, 0);
    for (const auto& c : local) {
        for (std::size_t k = 0; k < n; ++k) out.counts[k] += c[k];
    }
    out.total = n_paths;
    out.masses = reference.mass;
    return out;
}

ExitLaw exit_distribution(const Discretization& d, const std::vector<std::size_t>& region,
                          std::size_t source, std::size_t n_paths, const McOptions& options,
                          std::size_t max_jumps) {
    const std::size_t n = d.dof_count();
    std::vector<bool> inside(n, false);
    for (std::size_t k : region) {
        if (k >= n) throw DomainError("region DOF out of range");
        inside[k] = !d.pinned[k];
    }
    if (source >= n || !inside[source]) throw DomainError("source must lie in the region");
    if (n_paths == 0) throw ParameterError("need at least one path");
    const JumpChain chain(d);
    const unsigned threads = std::max(1u, options.threads);
    std::vector<std::vector<std::uint64_t>> local(threads, std::vector<std::uint64_t>(n + 1, 0));
    parallel_chunks(n_paths, threads, [&](unsigned tid, std::size_t lo, std::size_t hi) {
        auto& cnt = local[tid];
        for (std::size_t w = lo; w < hi; ++w) {
            WalkerRng rng(options.seed, w);
            std::size_t i = source;
            std::size_t jumps = 0;
            while (inside[i] && jumps < max_jumps && chain.rate[i] > 0.0) {
                i = chain.jump(i, rng.uniform());
                ++jumps;
            }
            ++cnt[inside[i] ? n : i];
        }
    });
    ExitLaw out;
    out.n_paths = n_paths;
    out.probability.assign(n, 0.0);
    std::uint64_t capped = 0;
    std::vector<std::uint64_t> total(n, 0);
    for (const auto& c : local) {
        for (std::size_t k = 0; k < n; ++k) total[k] += c[k];
        capped += c[n];
    }
    for (std::size_t k = 0; k < n; ++k) {
        out.probability[k] = static_cast<double>(total[k]) / static_cast<double>(n_paths);
    }
    out.capped = static_cast<double>(capped) / static_cast<double>(n_paths);
    return out;
}

GreenCurve green_estimate(const Discretization& d, std::size_t xi, std::size_t zeta,
                          const std::vector<double>& horizons, std::size_t n_paths,
                          const McOptions& options) {
    check_source(d, xi);
    if (zeta >= d.dof_count()) throw DomainError("target DOF out of range");
    if (horizons.empty()) throw ParameterError("need at least one horizon");
    if (n_paths == 0) throw ParameterError("need at least one path");
    for (double h : horizons) {
        if (!(h >= 0.0)) throw ParameterError("horizons must be nonnegative");
    }
    const double t_max = *std::max_element(horizons.begin(), horizons.end());
    const std::size_t nh = horizons.size();
    const JumpChain chain(d);
    std::vector<double> occ(n_paths * nh, 0.0);
    parallel_chunks(n_paths, std::max(1u, options.threads),
                    [&](unsigned, std::size_t lo, std::size_t hi) {
        for (std::size_t w = lo; w < hi; ++w) {
            WalkerRng rng(options.seed, w);
            std::size_t i = xi;
            double clock = 0.0;
            double* row = occ.data() + w * nh;
            while (clock < t_max) {
                const double hold = chain.rate[i] > 0.0 ? rng.exponential() / chain.rate[i] : INFINITY;
                if (i == zeta) {
                    for (std::size_t k = 0; k < nh; ++k) {
                        row[k] += std::max(0.0, std::min(clock + hold, horizons[k]) - clock);
                    }
                }
                clock += hold;
                if (clock >= t_max) break;
                i = chain.jump(i, rng.uniform());
                if (d.pinned[i]) break;
            }
        }
    });
    GreenCurve out;
    out.horizons = horizons;
    const double mz = d.mass[static_cast<Eigen::Index>(zeta)];
    for (std::size_t k = 0; k < nh; ++k) {
        double sum = 0.0, sq = 0.0;
        for (std::size_t w = 0; w < n_paths; ++w) {
            const double v = occ[w * nh + k] / mz;
            sum += v;
            sq += v * v;
        }
        const double mean = sum / static_cast<double>(n_paths);
        const double var = std::max(0.0, sq / static_cast<double>(n_paths) - mean * mean);
        out.estimate.push_back(mean);
        out.std_error.push_back(std::sqrt(var / static_cast<double>(n_paths)));
    }
    return out;
}

}  // namespace stripflow
