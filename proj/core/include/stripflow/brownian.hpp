#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "stripflow/assembly.hpp"

namespace stripflow {

/// Per-walker random stream: mt19937_64 seeded from (run seed, walker index)
/// by splitmix64, with portable uniform/normal/exponential transforms so the
/// draws do not depend on the standard library implementation.
class WalkerRng {
public:
    WalkerRng(std::uint64_t seed, std::uint64_t index);

    double uniform();  // in [0, 1)
    double normal();
    double exponential();  // rate 1

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Occupation counts per DOF after Monte Carlo.
struct EmpiricalMeasure {
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;     // walkers launched
    std::uint64_t absorbed = 0;  // walkers that hit a pinned DOF
    Field masses;

    std::uint64_t surviving() const noexcept { return total - absorbed; }
    /// counts_j / (total * mass_j): estimator of h(t, source, j).
    Field density() const;
    /// counts_j / total.
    std::vector<double> fractions() const;
};

struct McOptions {
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

/// Exact simulation of the jump chain of L = -M^-1 K. Jumps into pinned DOFs
/// absorb the walker.
EmpiricalMeasure sample_ctmc(const Discretization& d, std::size_t source, double t,
                             std::size_t n_paths, const McOptions& options = {});

/// Continuous strip position of the SDE sampler.
struct SdeState {
    EdgeId edge = 0;
    double s = 0.0;
    double x = 0.0;
};

/// Euler-Maruyama for ds = (a'/m) dt + sqrt(2a/m) dW, dx = sqrt(2a/m) dW'.
/// A step that crosses a vertex (detected by overshoot or a Brownian-bridge
/// test) continues into an incident edge drawn with weight sqrt(a_e m_e)(v),
/// the unused displacement rescaled to the new edge's diffusivity.
class SdeStepper {
public:
    SdeStepper(const StripComplex& sc, double dt);

    double dt() const noexcept { return dt_; }
    void step(SdeState& st, WalkerRng& rng) const;
    /// Continuation edge at v drawn from the branch weights.
    EdgeId choose_edge(VertexId v, WalkerRng& rng) const;
    /// Branch weights of the edges incident to v, in incident order.
    std::vector<double> branch_weights(VertexId v) const;

private:
    void enter_from_vertex(SdeState& st, VertexId v, double overshoot, double diff_old,
                           WalkerRng& rng) const;
    void reflect_fiber(double& x) const;

    const StripComplex* sc_;
    double dt_;
    std::vector<std::vector<double>> cumulative_;  // per vertex
};

/// Binned law of the SDE at time t on the nodes of `reference` (nearest node).
EmpiricalMeasure sample_sde(const StripComplex& sc, const PointOnComplex& source, double t,
                            double dt, std::size_t n_paths, const Discretization& reference,
                            const McOptions& options = {});

struct ExitLaw {
    std::vector<double> probability;  // per DOF, nonzero only on exit sites
    double capped = 0.0;              // fraction of walkers stopped by the jump cap
    std::size_t n_paths = 0;
};

/// Exit law of the jump chain started at `source` from the DOF set `region`.
/// Walkers are capped at `max_jumps` jumps.
ExitLaw exit_distribution(const Discretization& d, const std::vector<std::size_t>& region,
                          std::size_t source, std::size_t n_paths, const McOptions& options = {},
                          std::size_t max_jumps = 1000000);

struct GreenCurve {
    std::vector<double> horizons;
    std::vector<double> estimate;  // int_0^T h(t, xi, zeta) dt
    std::vector<double> std_error;
};

/// Occupation time of zeta's cell up to each horizon divided by its mass.
GreenCurve green_estimate(const Discretization& d, std::size_t xi, std::size_t zeta,
                          const std::vector<double>& horizons, std::size_t n_paths,
                          const McOptions& options = {});

}  // namespace stripflow
