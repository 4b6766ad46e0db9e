#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dendrite/cone_order.hpp"
#include "dendrite/function_spec.hpp"
#include "dendrite/meanfield.hpp"
#include "dendrite/model_config.hpp"
#include "dendrite/rate_curve.hpp"
#include "dendrite/rng.hpp"

namespace dendrite {

struct Edge {
    std::int64_t target = 0;
    double x = 0.0;
};

/// Random connectivity. Nothing of size n^2 is stored: neuron i draws its out-degree d_i
/// (Binomial over the allowed targets), the sorted positions of its d_i edges as order
/// statistics of iid H draws, and assigns them to targets through a seeded permutation.
/// Every draw is a hash of (seed, i, rank), so edges are reproduced on demand in
/// increasing position, which is the order their impulses reach the dendrites.
class NetworkTopology {
public:
    NetworkTopology(std::int64_t n, double p_n, const FunctionSpec& H, double L, std::uint64_t seed,
                    bool self_edges = true);

    std::int64_t n() const { return n_; }
    double p_n() const { return p_n_; }
    double L() const { return L_; }
    bool self_edges() const { return self_edges_; }
    std::uint64_t seed() const { return seed_; }

    std::int64_t out_degree(std::int64_t i) const { return degree_.at(static_cast<std::size_t>(i)); }
    std::int64_t edge_count() const { return edge_count_; }

    /// Walks the edges of one neuron by increasing position.
    class Cursor {
    public:
        bool done() const { return rank_ >= degree_; }
        std::int64_t target() const { return target_; }
        double x() const { return x_; }
        void next();

    private:
        friend class NetworkTopology;
        const NetworkTopology* topo_ = nullptr;
        std::int64_t source_ = 0;
        std::int64_t rank_ = 0;
        std::int64_t degree_ = 0;
        double log_tail_ = 0.0;
        std::int64_t target_ = 0;
        double x_ = 0.0;
        void load();
    };

    Cursor edges_from(std::int64_t i) const;
    std::vector<Edge> out_edges(std::int64_t i) const;
    /// Position of the edge i -> j when present. O(out-degree of i).
    std::optional<double> position(std::int64_t i, std::int64_t j) const;

private:
    std::int64_t target_of(std::int64_t i, std::int64_t rank) const;

    std::int64_t n_ = 0;
    double p_n_ = 1.0;
    double L_ = 1.0;
    std::uint64_t seed_ = 0;
    bool self_edges_ = true;
    LawSampler H_;
    std::vector<std::int64_t> degree_;
    std::vector<SquarePermutation> perm_;
    /// closed-form quantile when H is affine
    bool affine_H_ = false;
    double h0_ = 0.0, h1_ = 0.0;
    double quantile(double u) const;
    std::int64_t edge_count_ = 0;
};

NetworkTopology sample_topology(const NetworkParams& net, const FunctionSpec& H, double L);

/// How each dendrite turns arriving impulses into soma hits.
enum class DendriteSolver {
    /// Patience piles in psi coordinates, fed in soma-arrival order.
    piles,
    /// One streaming front engine per dendrite.
    fronts,
};

struct NetworkOptions {
    /// Uniform sample grid t0 + k dt, k < samples, inside [0, T].
    double sample_t0 = 0.0;
    double sample_dt = 0.01;
    std::size_t samples = 201;
    bool record_potentials = true;
    /// Thinning window.
    double bound_window = 0.05;
    /// RK4 step for a drift that is not affine.
    double dt_ode = 1e-3;
    std::uint64_t max_events = 4'000'000'000ull;
    DendriteSolver solver = DendriteSolver::piles;
    /// Keep the impulse stream of these dendrites (for replay checks).
    std::vector<std::int64_t> record_dendrites;
};

struct NetworkTrace {
    std::int64_t n = 0;
    double T = 0.0;
    double v_min = 0.0;
    double w_n = 0.0;
    std::vector<std::vector<double>> spikes;
    /// Soma-hit times per neuron.
    std::vector<std::vector<double>> excitations;
    double sample_t0 = 0.0;
    double sample_dt = 0.0;
    std::size_t samples = 0;
    /// potentials[k * n + i] = V_i at sample k, after the events at that time.
    std::vector<double> potentials;
    /// excitation_counts[k * n + i] = soma hits on neuron i up to sample k.
    std::vector<std::uint32_t> excitation_counts;
    /// Dendrites listed in NetworkOptions::record_dendrites, with their impulses (birth, x).
    std::vector<std::int64_t> recorded_dendrites;
    std::vector<std::vector<Impulse>> recorded_impulses;
    std::uint64_t events = 0;
    std::uint64_t impulses = 0;
    std::uint64_t soma_hits = 0;
    std::vector<std::string> warnings;

    double sample_time(std::size_t k) const { return sample_t0 + sample_dt * static_cast<double>(k); }
    /// Index of the sample at time t; throws std::out_of_range when t is not on the grid.
    std::size_t sample_index(double t) const;
    double V(std::size_t k, std::int64_t i) const
    {
        return potentials.at(k * static_cast<std::size_t>(n) + static_cast<std::size_t>(i));
    }
};

NetworkTrace simulate_soft_network(const SoftParams& p, const NetworkParams& net, const NetworkTopology& topo,
                                   const NetworkOptions& opt, std::uint64_t seed);

/// A neuron's drift crossing of v_max and a kick can be simultaneous: a kick-reset neuron and its
/// kicker drift in lockstep, so the next impulse of the kicker lands on the crossing. Rounding then
/// decides the order. A kick within this window after or before the pending crossing is applied after it.
inline constexpr double kHardTieWindow = 1e-12;

/// Initial potentials of the hard network are drawn from f0, or set to `V0` when given.
NetworkTrace simulate_hard_network(const HardParams& p, const NetworkParams& net, const NetworkTopology& topo,
                                   const NetworkOptions& opt, std::uint64_t seed,
                                   std::optional<double> V0 = std::nullopt);

/// n^{-1} sum_i lambda(V_i(t)) on the sample grid. Needs recorded potentials.
RateCurve empirical_rate(const NetworkTrace& trace, const FunctionSpec& lambda);

/// Histogram of the potentials at a sample time over `bins` cells of [v_lo, v_hi],
/// normalized to total mass 1. v_hi <= v_lo means [v_min, max V + 1e-9].
DensityGrid empirical_density(const NetworkTrace& trace, double t, std::size_t bins, double v_lo = 0.0,
                              double v_hi = 0.0);

/// Soma hits per unit time and neuron, from the excitation counts, differenced on the sample grid.
RateCurve empirical_excitation_rate(const NetworkTrace& trace);

/// CSV `neuron,time`.
void write_spikes_csv(std::ostream& out, const NetworkTrace& trace);

}  // namespace dendrite
