#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dendrite/model_config.hpp"
#include "dendrite/rate_curve.hpp"
#include "dendrite/rng.hpp"

namespace dendrite {

/// Cumulative excitation kappa and its derivative on a common grid.
struct KappaPath {
    RateCurve kappa;
    RateCurve kappa_prime;
    /// Hard model only: period a of kappa' and the thresholds a_k (a_0 = 0).
    double period = 0.0;
    std::vector<double> thresholds;

    double value(double t) const { return kappa(t); }
    double derivative(double t) const { return kappa_prime(t); }
    double t_end() const { return kappa.t_end(); }

    static KappaPath zero(double t_end, std::size_t cells);
    /// Tabulates r and r' on a uniform grid.
    static KappaPath tabulate(const std::function<double(double)>& r, const std::function<double(double)>& r_prime,
                              double t_end, std::size_t cells);
};

/// CSV `t,kappa,kappa_prime`.
void write_kappa_csv(std::ostream& out, const KappaPath& k);

/// Solutions s of offset + I s + r(s) = k span for the integers k with a solution in [0, t_end],
/// by bisection to 1e-13. r must be nondecreasing.
std::vector<double> excitation_thresholds(const std::function<double(double)>& r, double I, double span,
                                          double t_end, double offset = 0.0);

// ---------------------------------------------------------------------------
// hard model

/// G0 = sigma f0 + sqrt(sigma^2 f0^2 + 2 sigma I f0).
double hard_G0(const HardParams& p, double v);

/// phi0(x) = int_x^{v_max} dv / (G0(v) + I), its inverse on [0, a], and the
/// explicit kappa built from it. Evaluations are exact up to quadrature and bisection.
class HardKappa {
public:
    explicit HardKappa(const HardParams& p);

    double period() const { return a_; }
    double phi0(double x) const;
    /// Monotone bisection to 1e-10 (tighter by default).
    double phi0_inverse(double s, double tol = 1e-13) const;
    double kappa(double t) const;
    double kappa_prime(double t) const;

private:
    HardParams p_;
    double a_ = 0.0;
    std::vector<double> nodes_;  // partition of [v_min, v_max]
    std::vector<double> tail_;   // phi0 at the nodes
};

/// kappa of the hard model tabulated on [0, t_end] from the explicit formula.
KappaPath hard_kappa_explicit(const HardParams& p, double t_end, std::size_t cells);

/// Same object from RK4 on kappa' = G0(v_max - I t - kappa) up to the first
/// threshold (found on the ODE solution itself), then extended periodically.
/// The RK4 step is (v_max - v_min) / (I * steps), an upper bound of the period over `steps`.
KappaPath hard_kappa_ode(const HardParams& p, double t_end, std::size_t cells, std::size_t steps = 20000);

struct HardNeuronPath {
    std::vector<double> times;
    std::vector<double> V;
    std::vector<long long> J;
};

/// Closed form V_t = v_min + span * frac((V0 + I t + r_t - v_min) / span), J_t = the integer part.
HardNeuronPath single_neuron_hard(const HardParams& p, const std::function<double(double)>& r, double V0,
                                  const std::vector<double>& times);

/// Step simulation of the same process: drift plus increments of r, one reset per crossing of v_max.
HardNeuronPath single_neuron_hard_stepped(const HardParams& p, const std::function<double(double)>& r, double V0,
                                          const std::vector<double>& times);

/// Spike times of the hard neuron started at V0 under excitation r, up to t_end.
std::vector<double> hard_spike_times(const HardParams& p, const std::function<double(double)>& r, double V0,
                                     double t_end);

/// Density of the spike-time measure of a single f0-distributed hard neuron under r.
double hard_gr_density(const HardParams& p, const KappaPath& r, double t);

// ---------------------------------------------------------------------------
// soft model

/// Cell masses over [v_lo, v_hi] at one instant.
struct DensityGrid {
    double v_lo = 0.0;
    double v_hi = 1.0;
    double time = 0.0;
    std::vector<double> mass;

    double cell_width() const { return (v_hi - v_lo) / static_cast<double>(mass.size()); }
    double total() const;
};

/// CSV `bin_left,bin_right,mass`.
void write_density_csv(std::ostream& out, const DensityGrid& g);

struct SoftSolverOptions {
    double T = 2.0;
    double dt = 1e-3;
    /// particles
    std::size_t K = 100000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    /// PDE and density snapshots; v_cap <= v_min means "from a pilot particle run".
    std::size_t v_cells = 400;
    double v_cap = 0.0;
    /// second-order limited reconstruction for the PDE fluxes; plain first-order upwind otherwise
    bool muscl = true;
    std::vector<double> snapshot_times;
};

struct SoftMeanField {
    KappaPath kappa;
    /// E[lambda(V_t)] on the time grid.
    RateCurve rate;
    /// Particles: iid standard error of each rate value (conservative under the stratified draws); empty for the PDE.
    RateCurve rate_se;
    std::vector<DensityGrid> snapshots;
    double v_cap = 0.0;
    /// PDE: worst |mass - 1| over the steps (never rescaled) and worst Courant number seen.
    double max_mass_error = 0.0;
    double max_cfl = 0.0;
    std::size_t steps = 0;
    std::vector<std::string> warnings;
};

struct SoftNeuronPath {
    std::vector<double> times;
    std::vector<double> V;
    std::vector<double> spikes;
};

/// One neuron driven by the excitation path r: Euler steps of V' = F(V) + r',
/// resets when the integrated hazard of lambda along the path crosses an Exp(1) level.
SoftNeuronPath single_neuron_soft(const SoftParams& p, const KappaPath& r, double V0, SplitMix& rng, double dt);

/// K coupled particles; the drift gains sqrt(gamma * mean lambda) delayed by theta.
/// Requires H maximal at 0.
SoftMeanField solve_soft_mf_particles(const SoftParams& p, const SoftSolverOptions& opt);

/// Finite-volume transport of the density with the reset flux entering at v_min, closed at v_cap.
/// Requires theta = 0 and H maximal at 0; throws std::runtime_error on a Courant number above 1.
SoftMeanField solve_soft_mf_pde(const SoftParams& p, const SoftSolverOptions& opt);

struct PicardResult {
    std::vector<KappaPath> iterates;
    /// sup |kappa^{m+1} - kappa^m| per iteration.
    std::vector<double> increments;
    bool non_contraction = false;
};

/// kappa^0 = 0, kappa^{m+1} = w Gamma(h_{kappa^m} delayed by theta), h estimated from K
/// independent neurons that reuse the same random streams every iteration.
PicardResult picard_kappa(const SoftParams& p, std::size_t iterations, const SoftSolverOptions& opt);

}  // namespace dendrite
