#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dendrite/cone_order.hpp"
#include "dendrite/config_file.hpp"
#include "dendrite/meanfield.hpp"
#include "dendrite/model_config.hpp"
#include "dendrite/particle_system.hpp"
#include "dendrite/rate_curve.hpp"
#include "dendrite/stationary.hpp"

namespace dendrite {

/// Worker count from DENDRITE_THREADS, else the hardware concurrency (at least 1).
unsigned worker_threads();

/// Calls body(i) for i in [0, count) on up to `threads` workers. The first exception is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

// ---------------------------------------------------------------------------
// isolated dendrite

struct IsolatedDendriteOptions {
    std::int64_t n = 10000;
    std::size_t replicates = 100;
    /// default: 0, 0.05, ..., 2
    std::vector<double> t_grid;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    FunctionSpec H = FunctionSpec::affine(2.0, -2.0);
    double rho = 1.0;
    double L = 1.0;
};

struct BiasRow {
    double t = 0.0;
    double mean_Y = 0.0;
    double limit = 0.0;
    double bias = 0.0;
    /// standard error of mean_Y over replicates
    double se = 0.0;
};

/// n impulses with birth time ~ U[0, 1] and position ~ H, drawn from `seed`.
PointCloud isolated_dendrite_cloud(std::int64_t n, const FunctionSpec& H, double rho, double L, std::uint64_t seed);

/// Replicate r uses derive_seed(seed, r). Y_t = n^{-1/2} lis_count_before; the limit is
/// sqrt(2 rho H(0)) min(t, 1), which needs H maximal at 0.
std::vector<BiasRow> isolated_dendrite_bias(const IsolatedDendriteOptions& opt);

/// CSV `t,mean_Y,limit,bias,se`.
void write_bias_csv(std::ostream& out, const std::vector<BiasRow>& rows);

// ---------------------------------------------------------------------------
// network against its mean-field limit

struct ShiftFit {
    double tau = 0.0;
    /// sup over the network grid (t >= tau) of |network(t) - limit(t - tau)|
    double distance = 0.0;
    double distance_unshifted = 0.0;
    double peak = 0.0;
    double relative() const { return peak > 0.0 ? distance / peak : 0.0; }
};

/// Shift tau in {0, step, 2 step, ...} <= max_shift minimizing the sup-distance; ties keep the smaller tau.
/// `peak` is the maximum of the limit curve.
ShiftFit best_shift(const RateCurve& network, const RateCurve& limit, double max_shift = 0.2, double step = 1e-3);

enum class MeanFieldScheme { automatic, pde, particles };

struct SoftCompareOptions {
    std::int64_t n = 2000;
    double p_n = 1.0;
    bool self_edges = true;
    double T = 2.0;
    double sample_dt = 0.01;
    /// mean field
    std::size_t K = 100000;
    double dt = 1e-3;
    std::size_t v_cells = 400;
    MeanFieldScheme scheme = MeanFieldScheme::automatic;
    double max_shift = 0.2;
    double shift_step = 1e-3;
    /// density snapshots of both sides; must lie on the network sample grid
    std::vector<double> snapshot_times;
    std::size_t density_bins = 60;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct SoftCompareResult {
    NetworkTrace trace;
    RateCurve network_rate;
    /// sd over neurons of lambda(V_i) / sqrt(n)
    RateCurve network_se;
    RateCurve limit_rate;
    /// zero for the PDE
    RateCurve limit_se;
    ShiftFit fit;
    std::string scheme;
    std::vector<DensityGrid> network_density;
    std::vector<DensityGrid> limit_density;
    std::vector<std::string> warnings;
};

/// Network seeds: topology derive_seed(seed, 1), dynamics derive_seed(seed, 2), mean field derive_seed(seed, 3).
/// The automatic scheme is the PDE for theta = 0 and particles otherwise.
SoftCompareResult soft_compare(const SoftParams& p, const SoftCompareOptions& opt);

/// CSV `t,network_rate,network_se,meanfield_rate,meanfield_se` on the network grid.
void write_soft_compare_csv(std::ostream& out, const SoftCompareResult& r);

// ---------------------------------------------------------------------------
// hard model against a steep soft surrogate

struct HardCompareOptions {
    double T = 6.0;
    std::size_t cells = 6000;
    /// surrogate lambda = (v - alpha)_+^power
    double surrogate_alpha = 0.2;
    int surrogate_power = 300;
    std::size_t K = 20000;
    double dt = 1e-3;
    /// hard network size; 0 skips the network
    std::int64_t n = 0;
    double sample_dt = 0.01;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct HardCompareResult {
    /// explicit mean-field kappa on [0, T]
    KappaPath explicit_kappa;
    /// 2 sqrt(E lambda) scaled as w sqrt(2 rho H(0) E lambda), with its standard error
    RateCurve surrogate_kappa_prime;
    RateCurve surrogate_se;
    /// w_n times the soma-hit rate per neuron, when a network was run
    std::optional<RateCurve> network_kappa_prime;
    double period = 0.0;
    /// max |kappa'(t + a) - kappa'(t)| over the explicit grid
    double periodicity_error = 0.0;
    /// correlation of kappa'(t) and kappa'(t + a) over [0, T - a]
    double period_autocorrelation = 0.0;
    /// sup |explicit - surrogate| on [0, T] and the peak of the explicit kappa'
    double sup_difference = 0.0;
    double peak = 0.0;
    std::vector<std::string> warnings;
};

SoftParams hard_surrogate(const HardParams& p, double alpha, int power);
HardCompareResult hard_compare(const HardParams& p, const HardCompareOptions& opt);

/// CSV `t,kappa_prime_explicit,kappa_prime_surrogate,surrogate_se[,kappa_prime_network]`
/// on the explicit grid; the network column is interpolated from its sample grid.
void write_hard_compare_csv(std::ostream& out, const HardCompareResult& r);

// ---------------------------------------------------------------------------
// stationary scans

struct StationaryScanOptions {
    double alpha = 0.0;
    int p = 2;
    std::vector<double> gammas{1.0, 5.0, 20.0};
    std::vector<double> Is{0.1, 0.5, 1.0, 2.0, 5.0};
    double a_lo = 0.0;
    /// <= 0 means alpha + 20
    double a_hi = 0.0;
    std::size_t resolution = 4000;
    bool critical = true;
    double gamma_lo = 0.05;
    double gamma_hi = 50.0;
    double gamma_tol = 1e-3;
};

struct StationaryScanResult {
    KaGrid grid;
    std::vector<BifurcationRow> rows;
    CriticalGammas critical;
};

/// Rate functions of the stationary analysis: shifted_power(alpha, p) or power(p).
bool stationary_shape(const FunctionSpec& lambda, double& alpha, int& p);

StationaryScanResult stationary_scan(const StationaryScanOptions& opt);

// ---------------------------------------------------------------------------
// validation suite

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

/// Desk-scale run of the invariant checks. Exact checks do not depend on the seed.
std::vector<CheckResult> run_validation_suite(std::uint64_t seed, unsigned threads);

// ---------------------------------------------------------------------------
// command surface

struct ExperimentConfig {
    std::string command;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = "out";
    std::optional<std::size_t> replicates;
    std::optional<std::int64_t> n;
    std::optional<std::size_t> K;
    unsigned threads = 1;
    /// `key=value` overrides applied after the config file
    std::vector<std::pair<std::string, std::string>> overrides;
};

/// Raised for configurations that fail parameter validation (exit code 1).
class ValidationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Subcommands: isolated-dendrite, soft-compare, hard-compare, stationary-scan, validate.
std::vector<std::string> experiment_commands();

/// Runs one subcommand: CSV artifacts plus the sidecar `run.conf` in cfg.out, a summary on `log`.
/// Running again with `--config <out>/run.conf` reproduces the CSVs byte for byte.
/// Returns 0 on success and 1 when validation fails; other errors throw.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace dendrite
