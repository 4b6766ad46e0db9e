#include "dendrite/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "dendrite/rng.hpp"

namespace dendrite {

unsigned worker_threads()
{
    if (const char* env = std::getenv("DENDRITE_THREADS"); env && *env) {
        unsigned v = 0;
        auto [end, ec] = std::from_chars(env, env + std::char_traits<char>::length(env), v);
        if (ec != std::errc() || *end != '\0' || v == 0)
            throw std::invalid_argument("DENDRITE_THREADS must be a positive integer");
        return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body)
{
    unsigned used = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
    if (used <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex m;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!error) error = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < used; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

namespace {

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double mean_of(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

bool peak_at_soma(const FunctionSpec& H, double L) { return H(0.0) >= H.sup_on(0.0, L) * (1.0 - 1e-12); }

}  // namespace

// ---------------------------------------------------------------------------
// isolated dendrite

PointCloud isolated_dendrite_cloud(std::int64_t n, const FunctionSpec& H, double rho, double L, std::uint64_t seed)
{
    if (n < 0) throw std::invalid_argument("isolated_dendrite_cloud: n >= 0 required");
    LawSampler sampler(Law::density(H, 0.0, L));
    SplitMix rng(seed);
    std::vector<Impulse> pts(static_cast<std::size_t>(n));
    for (auto& q : pts) {
        q.t = rng.uniform();
        q.x = sampler(rng.uniform());
    }
    return PointCloud(std::move(pts), rho, L);
}

std::vector<BiasRow> isolated_dendrite_bias(const IsolatedDendriteOptions& opt)
{
    if (opt.n < 1 || opt.replicates < 1) throw std::invalid_argument("isolated_dendrite_bias: n, replicates >= 1");
    if (!peak_at_soma(opt.H, opt.L)) throw std::invalid_argument("isolated_dendrite_bias: H must be maximal at 0");
    std::vector<double> grid = opt.t_grid;
    if (grid.empty())
        for (int k = 0; k <= 40; ++k) grid.push_back(0.05 * k);
    if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("isolated_dendrite_bias: t_grid must increase");

    const std::size_t R = opt.replicates, G = grid.size();
    std::vector<double> Y(R * G);
    const double scale = 1.0 / std::sqrt(static_cast<double>(opt.n));
    parallel_for(R, opt.threads, [&](std::size_t r) {
        auto cloud = isolated_dendrite_cloud(opt.n, opt.H, opt.rho, opt.L, derive_seed(opt.seed, r));
        auto counts = lis_profile(cloud, grid);
        for (std::size_t k = 0; k < G; ++k) Y[r * G + k] = scale * static_cast<double>(counts[k]);
    });

    const double c = std::sqrt(2.0 * opt.rho * opt.H(0.0));
    std::vector<BiasRow> rows(G);
    for (std::size_t k = 0; k < G; ++k) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t r = 0; r < R; ++r) s += Y[r * G + k];
        double m = s / static_cast<double>(R);
        for (std::size_t r = 0; r < R; ++r) s2 += (Y[r * G + k] - m) * (Y[r * G + k] - m);
        auto& row = rows[k];
        row.t = grid[k];
        row.mean_Y = m;
        row.limit = c * std::clamp(grid[k], 0.0, 1.0);
        row.bias = m - row.limit;
        row.se = R > 1 ? std::sqrt(s2 / static_cast<double>(R - 1) / static_cast<double>(R)) : 0.0;
    }
    return rows;
}

void write_bias_csv(std::ostream& out, const std::vector<BiasRow>& rows)
{
    out << "t,mean_Y,limit,bias,se\n";
    for (const auto& r : rows)
        out << fmt(r.t) << ',' << fmt(r.mean_Y) << ',' << fmt(r.limit) << ',' << fmt(r.bias) << ',' << fmt(r.se) << '\n';
}

// ---------------------------------------------------------------------------
// soft comparison

ShiftFit best_shift(const RateCurve& network, const RateCurve& limit, double max_shift, double step)
{
    if (!(step > 0.0) || max_shift < 0.0) throw std::invalid_argument("best_shift: bad shift grid");
    auto distance = [&](double tau) {
        double d = 0.0;
        for (std::size_t i = 0; i < network.size(); ++i) {
            double s = network.time(i) - tau;
            if (s < limit.t0() || s > limit.t_end()) continue;
            d = std::max(d, std::abs(network.values()[i] - limit(s)));
        }
        return d;
    };
    ShiftFit fit;
    fit.peak = limit.max_value();
    fit.distance_unshifted = distance(0.0);
    fit.distance = fit.distance_unshifted;
    auto steps = static_cast<std::size_t>(std::floor(max_shift / step + 1e-9));
    for (std::size_t k = 1; k <= steps; ++k) {
        double tau = step * static_cast<double>(k);
        double d = distance(tau);
        if (d < fit.distance) {
            fit.distance = d;
            fit.tau = tau;
        }
    }
    return fit;
}

SoftCompareResult soft_compare(const SoftParams& p, const SoftCompareOptions& opt)
{
    SoftCompareResult res;
    NetworkParams net(opt.n, opt.p_n, p.w, opt.T, derive_seed(opt.seed, 1));
    net.self_edges = opt.self_edges;
    auto topo = sample_topology(net, p.H, p.L);
    NetworkOptions no;
    no.sample_dt = opt.sample_dt;
    double cells = opt.T / opt.sample_dt;
    no.samples = static_cast<std::size_t>(std::llround(cells)) + 1;
    if (std::abs(cells - std::round(cells)) > 1e-9 * cells) throw std::invalid_argument("soft_compare: T must be a multiple of sample_dt");
    res.trace = simulate_soft_network(p, net, topo, no, derive_seed(opt.seed, 2));
    const auto& tr = res.trace;
    res.network_rate = empirical_rate(tr, p.lambda);
    {
        const auto n = static_cast<std::size_t>(tr.n);
        std::vector<double> se(tr.samples, 0.0);
        for (std::size_t k = 0; k < tr.samples; ++k) {
            double m = res.network_rate.values()[k], s2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double d = p.lambda(tr.potentials[k * n + i]) - m;
                s2 += d * d;
            }
            se[k] = n > 1 ? std::sqrt(s2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
        }
        res.network_se = RateCurve(tr.sample_t0, tr.sample_dt, std::move(se));
    }

    SoftSolverOptions mo;
    mo.T = opt.T;
    mo.dt = opt.dt;
    mo.K = opt.K;
    mo.seed = derive_seed(opt.seed, 3);
    mo.threads = opt.threads;
    mo.v_cells = opt.v_cells;
    mo.snapshot_times = opt.snapshot_times;
    auto scheme = opt.scheme;
    if (scheme == MeanFieldScheme::automatic) scheme = p.theta == 0.0 ? MeanFieldScheme::pde : MeanFieldScheme::particles;
    auto mf = scheme == MeanFieldScheme::pde ? solve_soft_mf_pde(p, mo) : solve_soft_mf_particles(p, mo);
    res.scheme = scheme == MeanFieldScheme::pde ? "pde" : "particles";
    res.limit_rate = mf.rate;
    res.limit_se = mf.rate_se.size() == mf.rate.size() && scheme == MeanFieldScheme::particles
                       ? mf.rate_se
                       : RateCurve::constant(0.0, mf.rate.t_end(), mf.rate.size() - 1);
    res.fit = best_shift(res.network_rate, res.limit_rate, opt.max_shift, opt.shift_step);
    for (double t : opt.snapshot_times)
        res.network_density.push_back(empirical_density(tr, t, opt.density_bins, p.v_min, mf.v_cap));
    res.limit_density = mf.snapshots;
    res.warnings = tr.warnings;
    res.warnings.insert(res.warnings.end(), mf.warnings.begin(), mf.warnings.end());
    return res;
}

void write_soft_compare_csv(std::ostream& out, const SoftCompareResult& r)
{
    out << "t,network_rate,network_se,meanfield_rate,meanfield_se\n";
    for (std::size_t i = 0; i < r.network_rate.size(); ++i) {
        double t = r.network_rate.time(i);
        out << fmt(t) << ',' << fmt(r.network_rate.values()[i]) << ',' << fmt(r.network_se.values()[i]) << ','
            << fmt(r.limit_rate(t)) << ',' << fmt(r.limit_se(t)) << '\n';
    }
}

// ---------------------------------------------------------------------------
// hard comparison

SoftParams hard_surrogate(const HardParams& p, double alpha, int power)
{
    SoftParams s;
    s.v_min = p.v_min;
    s.L = p.L;
    s.rho = p.rho;
    s.theta = p.theta;
    s.w = p.w;
    s.lambda = FunctionSpec::shifted_power(alpha, power);
    s.F = FunctionSpec::constant(p.I);
    s.H = p.H;
    s.f0 = p.f0;
    return s;
}

HardCompareResult hard_compare(const HardParams& p, const HardCompareOptions& opt)
{
    HardCompareResult res;
    res.explicit_kappa = hard_kappa_explicit(p, opt.T, opt.cells);
    res.period = res.explicit_kappa.period;
    const auto& kp = res.explicit_kappa.kappa_prime;
    res.peak = kp.max_value();

    // period-a structure of the emitted curve, with kappa' evaluated exactly off the grid
    HardKappa hk(p);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < kp.size(); ++i) {
        double t = kp.time(i);
        if (t + res.period > kp.t_end()) break;
        x.push_back(kp.values()[i]);
        y.push_back(hk.kappa_prime(t + res.period));
        res.periodicity_error = std::max(res.periodicity_error, std::abs(y.back() - x.back()));
    }
    if (x.size() > 1) {
        double mx = mean_of(x), my = mean_of(y), sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
            syy += (y[i] - my) * (y[i] - my);
        }
        res.period_autocorrelation = sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 1.0;
    }

    auto s = hard_surrogate(p, opt.surrogate_alpha, opt.surrogate_power);
    SoftSolverOptions mo;
    mo.T = opt.T;
    mo.dt = opt.dt;
    mo.K = opt.K;
    mo.seed = derive_seed(opt.seed, 3);
    mo.threads = opt.threads;
    auto mf = solve_soft_mf_particles(s, mo);
    res.surrogate_kappa_prime = mf.kappa.kappa_prime;
    // delta method for c sqrt(h), written so that h near 0 stays finite
    const double c = p.w * std::sqrt(2.0 * p.rho * p.H(0.0));
    auto se_h = mf.rate_se.delayed(p.theta);
    auto h = mf.rate.delayed(p.theta);
    std::vector<double> se(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        double m = h.values()[i], e = se_h.values()[i];
        se[i] = 0.5 * c * (std::sqrt(m + e) - std::sqrt(std::max(m - e, 0.0)));
    }
    res.surrogate_se = RateCurve(h.t0(), h.dt(), std::move(se));
    for (std::size_t i = 0; i < kp.size(); ++i) {
        double t = kp.time(i);
        if (t > res.surrogate_kappa_prime.t_end()) break;
        res.sup_difference = std::max(res.sup_difference, std::abs(kp.values()[i] - res.surrogate_kappa_prime(t)));
    }
    res.warnings = mf.warnings;

    if (opt.n > 0) {
        NetworkParams net(opt.n, 1.0, p.w, opt.T, derive_seed(opt.seed, 1));
        auto topo = sample_topology(net, p.H, p.L);
        NetworkOptions no;
        no.sample_dt = opt.sample_dt;
        no.samples = static_cast<std::size_t>(std::llround(opt.T / opt.sample_dt)) + 1;
        no.record_potentials = false;
        auto tr = simulate_hard_network(p, net, topo, no, derive_seed(opt.seed, 2));
        auto rate = empirical_excitation_rate(tr);
        std::vector<double> v = rate.values();
        for (double& z : v) z *= tr.w_n;
        res.network_kappa_prime = RateCurve(rate.t0(), rate.dt(), std::move(v));
    }
    return res;
}

void write_hard_compare_csv(std::ostream& out, const HardCompareResult& r)
{
    const auto& kp = r.explicit_kappa.kappa_prime;
    const auto& net = r.network_kappa_prime;
    out << "t,kappa_prime_explicit,kappa_prime_surrogate,surrogate_se" << (net ? ",kappa_prime_network" : "") << '\n';
    for (std::size_t i = 0; i < kp.size(); ++i) {
        double t = kp.time(i);
        if (t > r.surrogate_kappa_prime.t_end()) break;
        out << fmt(t) << ',' << fmt(kp.values()[i]) << ',' << fmt(r.surrogate_kappa_prime(t)) << ','
            << fmt(r.surrogate_se(t));
        if (net) {
            out << ',';
            if (t >= net->t0() && t <= net->t_end()) out << fmt((*net)(t));
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// stationary

bool stationary_shape(const FunctionSpec& lambda, double& alpha, int& p)
{
    if (auto* s = std::get_if<ShiftedPower>(&lambda.kind())) {
        alpha = s->alpha;
        p = s->p;
        return true;
    }
    if (auto* s = std::get_if<Power>(&lambda.kind())) {
        alpha = 0.0;
        p = s->p;
        return true;
    }
    return false;
}

StationaryScanResult stationary_scan(const StationaryScanOptions& opt)
{
    StationaryScanResult res;
    double hi = opt.a_hi > 0.0 ? opt.a_hi : opt.alpha + 20.0;
    res.grid = ka_grid(opt.alpha, opt.p, opt.a_lo, hi, opt.resolution);
    for (double g : opt.gammas)
        for (double I : opt.Is) res.rows.push_back({g, I, res.grid.root_count(g, I)});
    if (opt.critical) res.critical = critical_gammas(res.grid, opt.gamma_lo, opt.gamma_hi, opt.gamma_tol);
    return res;
}

}  // namespace dendrite
