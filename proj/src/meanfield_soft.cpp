#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

#include <boost/random/sobol.hpp>

#include "dendrite/gamma_functional.hpp"
#include "dendrite/meanfield.hpp"
#include "dendrite/quadrature.hpp"

namespace dendrite {

double DensityGrid::total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

void write_density_csv(std::ostream& out, const DensityGrid& g)
{
    char buf[128];
    out << "bin_left,bin_right,mass\n";
    double dv = g.cell_width();
    for (std::size_t i = 0; i < g.mass.size(); ++i) {
        double lo = g.v_lo + dv * static_cast<double>(i);
        double hi = i + 1 == g.mass.size() ? g.v_hi : lo + dv;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", lo, hi, g.mass[i]);
        out << buf;
    }
}

namespace {

constexpr std::size_t kChunk = 4096;
constexpr int kMaxResetsPerStep = 10000;

std::size_t step_count(double T, double dt)
{
    if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("soft solver: T and dt must be positive");
    double n = T / dt;
    auto steps = static_cast<std::size_t>(std::llround(n));
    if (std::abs(n - static_cast<double>(steps)) > 1e-6 * n) throw std::invalid_argument("soft solver: T must be a multiple of dt");
    return steps;
}

std::size_t delay_steps(double theta, double dt)
{
    double n = theta / dt;
    auto d = static_cast<std::size_t>(std::llround(n));
    if (theta < 0.0 || std::abs(n - static_cast<double>(d)) > 1e-6 * std::max(1.0, n))
        throw std::invalid_argument("soft solver: theta must be a nonnegative multiple of dt");
    return d;
}

void require_peak_at_soma(const SoftParams& p, const char* who)
{
    double h0 = p.H(0.0);
    if (h0 < p.H.sup_on(0.0, p.L) * (1.0 - 1e-12))
        throw std::invalid_argument(std::string(who) + ": H must be maximal at 0 (use picard_kappa for general H)");
}

// One neuron between t and t + dt with constant extra drift d: transport along the flow,
// resets when the hazard (trapezoid in time, exact crossing on its quadratic
// interpolant) reaches the current Exp(1) level.
struct Neuron {
    double V = 0.0;
    double hazard = 0.0;
    double level = 1.0;
    SplitMix rng{0};
    std::uint64_t index = 0;
    std::uint64_t draws = 0;
};

// Draws across an ensemble of K neurons. The first kSobolDims draws of neuron i are the
// coordinates of point i of a digitally shifted Sobol sequence (top 32 bits; the neuron's own
// stream fills the rest), later draws are Latin-hypercube: draw k of neuron i is uniform on
// the cell perm_k(i) / K. Either way every neuron's draws are iid uniform.
struct Strata {
    static constexpr std::size_t kSobolDims = 8;
    std::uint64_t K = 1;
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> sobol;  // K x kSobolDims, empty for plain Latin-hypercube

    Strata(std::uint64_t k, std::uint64_t s, bool quasi = true) : K(k), seed(s)
    {
        if (!quasi || K < 2) return;
        boost::random::sobol gen(kSobolDims);
        SplitMix shifts(derive_seed(seed, 0x736f626f6cull));
        std::uint32_t shift[kSobolDims];
        for (auto& x : shift) x = static_cast<std::uint32_t>(shifts() >> 32);
        sobol.resize(K * kSobolDims);
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t d = 0; d < kSobolDims; ++d)
                sobol[i * kSobolDims + d] = static_cast<std::uint32_t>(gen() >> 32) ^ shift[d];
    }

    double uniform(Neuron& n) const
    {
        std::uint64_t k = n.draws++;
        if (k < kSobolDims && !sobol.empty())
            return (static_cast<double>(sobol[n.index * kSobolDims + k]) + n.rng.uniform()) * 0x1p-32;
        IndexPermutation perm(K, derive_seed(seed, k));
        return (static_cast<double>(perm(n.index)) + n.rng.uniform()) / static_cast<double>(K);
    }
    double exponential(Neuron& n) const { return -std::log1p(-uniform(n)); }
};

// Flow of V' = F(V) + d over a time s: closed form for affine F, one Heun step otherwise.
struct Flow {
    const SoftParams& p;
    bool affine = false;
    double c0 = 0.0, c1 = 0.0;

    explicit Flow(const SoftParams& params) : p(params) { affine = p.F.affine_coefficients(c0, c1); }

    double operator()(double V, double d, double s) const
    {
        if (affine) {
            double b = c0 + d;
            if (c1 == 0.0) return V + b * s;
            return (V + b / c1) * std::exp(c1 * s) - b / c1;
        }
        double k1 = p.F(V) + d;
        double k2 = p.F(V + s * k1) + d;
        return V + 0.5 * s * (k1 + k2);
    }
};

template <class OnSpike>
void advance(Neuron& n, const Flow& flow, const Strata& strata, double d, double t, double dt, OnSpike&& on_spike)
{
    const SoftParams& p = flow.p;
    double remaining = dt;
    for (int resets = 0;; ++resets) {
        if (resets > kMaxResetsPerStep) throw std::runtime_error("soft neuron: reset explosion within one step");
        double lam0 = p.lambda(n.V);
        double Vn = flow(n.V, d, remaining);
        if (Vn < p.v_min) Vn = p.v_min;
        double lam1 = p.lambda(Vn);
        double inc = 0.5 * (lam0 + lam1) * remaining;
        if (n.hazard + inc < n.level) {
            n.V = Vn;
            n.hazard += inc;
            return;
        }
        double need = n.level - n.hazard;
        double A = (lam1 - lam0) / (2.0 * remaining), B = lam0;
        double s;
        if (std::abs(A) * remaining < 1e-12 * std::max(B, 1e-300))
            s = need / B;
        else
            s = 2.0 * need / (B + std::sqrt(std::max(0.0, B * B + 4.0 * A * need)));
        s = std::clamp(s, 0.0, remaining);
        on_spike(t + (dt - remaining) + s);
        n.V = p.v_min;
        n.hazard = 0.0;
        n.level = strata.exponential(n);
        remaining -= s;
        if (remaining <= 0.0) return;
    }
}

std::vector<Neuron> init_neurons(const SoftParams& p, const Strata& strata)
{
    std::vector<Neuron> ns(strata.K);
    LawSampler sampler(p.f0);
    for (std::size_t i = 0; i < ns.size(); ++i) {
        ns[i].rng = SplitMix(derive_seed(strata.seed, i));
        ns[i].index = i;
        ns[i].V = std::max(p.v_min, sampler(strata.uniform(ns[i])));
        ns[i].level = strata.exponential(ns[i]);
    }
    return ns;
}

// Runs `body(begin, end, chunk)` over fixed chunks of [0, K) on `threads` workers.
template <class Body>
void for_chunks(std::size_t K, unsigned threads, Body&& body)
{
    std::size_t chunks = (K + kChunk - 1) / kChunk;
    auto run = [&](std::size_t c) { body(c * kChunk, std::min(K, (c + 1) * kChunk), c); };
    if (threads <= 1 || chunks <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) run(c);
        return;
    }
    std::vector<std::thread> pool;
    unsigned used = static_cast<unsigned>(std::min<std::size_t>(threads, chunks));
    for (unsigned w = 0; w < used; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t c = w; c < chunks; c += used) run(c);
        });
    for (auto& th : pool) th.join();
}

struct StepStats {
    double mean = 0.0;
    double se = 0.0;  // naive iid standard error of the mean
    double top = 0.0;
};

StepStats summarize(const std::vector<double>& sums, const std::vector<double>& squares, std::size_t K)
{
    double s = 0.0, q = 0.0;
    for (std::size_t c = 0; c < sums.size(); ++c) {
        s += sums[c];
        q += squares[c];
    }
    double n = static_cast<double>(K);
    double mean = s / n;
    double var = K > 1 ? std::max(0.0, (q - n * mean * mean) / (n - 1.0)) : 0.0;
    return {mean, std::sqrt(var / n), 0.0};
}

// Advances every neuron by one step with drift d; returns the lambda statistics at the new
// time and the largest potential. Sums run in chunk order for thread-count independence.
StepStats step_all(std::vector<Neuron>& ns, const SoftParams& p, const Strata& strata, double d,
                                   double t, double dt, unsigned threads)
{
    Flow flow(p);
    std::size_t chunks = (ns.size() + kChunk - 1) / kChunk;
    std::vector<double> sums(chunks, 0.0), squares(chunks, 0.0), tops(chunks, p.v_min);
    for_chunks(ns.size(), threads, [&](std::size_t b, std::size_t e, std::size_t c) {
        double s = 0.0, q = 0.0, top = p.v_min;
        for (std::size_t i = b; i < e; ++i) {
            advance(ns[i], flow, strata, d, t, dt, [](double) {});
            double l = p.lambda(ns[i].V);
            s += l;
            q += l * l;
            top = std::max(top, ns[i].V);
        }
        sums[c] = s;
        squares[c] = q;
        tops[c] = top;
    });
    StepStats st = summarize(sums, squares, ns.size());
    st.top = *std::max_element(tops.begin(), tops.end());
    return st;
}

StepStats lambda_stats(const std::vector<Neuron>& ns, const SoftParams& p)
{
    std::vector<double> sums, squares;
    for (std::size_t b = 0; b < ns.size(); b += kChunk) {
        double s = 0.0, q = 0.0;
        for (std::size_t i = b; i < std::min(ns.size(), b + kChunk); ++i) {
            double l = p.lambda(ns[i].V);
            s += l;
            q += l * l;
        }
        sums.push_back(s);
        squares.push_back(q);
    }
    return summarize(sums, squares, ns.size());
}

DensityGrid histogram(const std::vector<Neuron>& ns, double v_lo, double v_hi, std::size_t cells, double time)
{
    DensityGrid g{v_lo, v_hi, time, std::vector<double>(cells, 0.0)};
    double dv = g.cell_width();
    double w = 1.0 / static_cast<double>(ns.size());
    for (const auto& n : ns) {
        auto i = static_cast<std::size_t>(std::max(0.0, (n.V - v_lo) / dv));
        g.mass[std::min(i, cells - 1)] += w;
    }
    return g;
}

std::vector<std::size_t> snapshot_steps(const std::vector<double>& times, double dt, std::size_t steps)
{
    std::vector<std::size_t> out;
    for (double t : times) {
        auto k = static_cast<std::size_t>(std::llround(t / dt));
        if (t < 0.0 || k > steps) throw std::out_of_range("soft solver: snapshot time outside [0, T]");
        out.push_back(k);
    }
    return out;
}

// Extra drift over step k: sqrt(gamma m) at the step midpoint, m delayed by `delay` steps.
// With a delay the two neighbouring values are known; without one m is extrapolated.
double midpoint_drift(const std::vector<double>& rate, std::size_t k, std::size_t delay, double gamma)
{
    if (k < delay) return 0.0;
    std::size_t j = k - delay;
    double m;
    if (delay >= 1)
        m = 0.5 * (rate[j] + rate[j + 1]);
    else
        m = j >= 1 ? 1.5 * rate[j] - 0.5 * rate[j - 1] : rate[j];
    return std::sqrt(gamma * std::max(0.0, m));
}

KappaPath kappa_from_rate(const std::vector<double>& rate, double gamma, std::size_t delay, double dt)
{
    std::vector<double> kp(rate.size(), 0.0), k(rate.size(), 0.0);
    for (std::size_t i = 0; i < rate.size(); ++i) kp[i] = i >= delay ? std::sqrt(gamma * rate[i - delay]) : 0.0;
    // kappa' switches on at theta: steps ending at or before theta contribute nothing
    for (std::size_t i = 1; i < rate.size(); ++i) k[i] = k[i - 1] + (i > delay ? 0.5 * (kp[i - 1] + kp[i]) * dt : 0.0);
    KappaPath path;
    path.kappa = RateCurve(0.0, dt, std::move(k));
    path.kappa_prime = RateCurve(0.0, dt, std::move(kp));
    return path;
}

void dt_guard(double rate, double dt, std::vector<std::string>* warnings, bool& warned)
{
    if (rate * dt > 1.0) throw std::runtime_error("soft solver: mean rate * dt > 1, decrease dt");
    if (rate * dt > 0.1 && !warned) {
        warned = true;
        if (warnings) warnings->push_back("mean rate * dt exceeded 0.1");
    }
}

// Largest potential seen by a small particle run; the cap adds 10% of the range.
double pilot_cap(const SoftParams& p, const SoftSolverOptions& opt)
{
    SoftSolverOptions pilot = opt;
    pilot.K = std::min<std::size_t>(opt.K, 20000);
    pilot.v_cap = p.v_min + 1.0;  // any value: the pilot's snapshots are discarded
    pilot.snapshot_times.clear();
    Strata strata(pilot.K, derive_seed(opt.seed, 0x70696c6f74ull));
    auto ns = init_neurons(p, strata);
    std::size_t steps = step_count(opt.T, opt.dt);
    std::size_t delay = delay_steps(p.theta, opt.dt);
    double gamma = p.gamma();
    std::vector<double> rate{lambda_stats(ns, p).mean};
    double top = p.v_min;
    for (const auto& n : ns) top = std::max(top, n.V);
    for (std::size_t k = 0; k < steps; ++k) {
        double d = midpoint_drift(rate, k, delay, gamma);
        auto st = step_all(ns, p, strata, d, opt.dt * static_cast<double>(k), opt.dt, opt.threads);
        rate.push_back(st.mean);
        top = std::max(top, st.top);
    }
    return p.v_min + 1.1 * std::max(top - p.v_min, 1e-3);
}

}  // namespace

SoftNeuronPath single_neuron_soft(const SoftParams& p, const KappaPath& r, double V0, SplitMix& rng, double dt)
{
    if (V0 < p.v_min) throw std::invalid_argument("single_neuron_soft: V0 < v_min");
    std::size_t steps = step_count(r.t_end(), dt);
    Neuron n;
    n.V = V0;
    n.rng = SplitMix(rng());
    Strata strata(1, 0, false);
    n.level = strata.exponential(n);
    SoftNeuronPath out;
    out.times.push_back(0.0);
    out.V.push_back(V0);
    for (std::size_t k = 0; k < steps; ++k) {
        double t = dt * static_cast<double>(k);
        double t1 = k + 1 == steps ? r.t_end() : t + dt;
        double d = (r.value(t1) - r.value(t)) / dt;
        advance(n, Flow(p), strata, d, t, dt, [&](double s) { out.spikes.push_back(s); });
        if (!std::isfinite(n.V)) throw std::runtime_error("single_neuron_soft: potential exploded");
        out.times.push_back(t1);
        out.V.push_back(n.V);
    }
    return out;
}

SoftMeanField solve_soft_mf_particles(const SoftParams& p, const SoftSolverOptions& opt)
{
    require_peak_at_soma(p, "solve_soft_mf_particles");
    if (opt.K < 1000) throw std::invalid_argument("solve_soft_mf_particles: K >= 1000 required");
    std::size_t steps = step_count(opt.T, opt.dt);
    std::size_t delay = delay_steps(p.theta, opt.dt);
    auto snaps = snapshot_steps(opt.snapshot_times, opt.dt, steps);
    SoftMeanField out;
    out.v_cap = opt.v_cap > p.v_min ? opt.v_cap : pilot_cap(p, opt);
    double gamma = p.gamma();

    Strata strata(opt.K, opt.seed);
    auto ns = init_neurons(p, strata);
    StepStats st0 = lambda_stats(ns, p);
    std::vector<double> rate{st0.mean}, se{st0.se};
    bool warned = false;
    auto take = [&](std::size_t k) {
        for (std::size_t s = 0; s < snaps.size(); ++s)
            if (snaps[s] == k)
                out.snapshots.push_back(histogram(ns, p.v_min, out.v_cap, opt.v_cells, opt.snapshot_times[s]));
    };
    take(0);
    for (std::size_t k = 0; k < steps; ++k) {
        dt_guard(rate[k], opt.dt, &out.warnings, warned);
        double d = midpoint_drift(rate, k, delay, gamma);
        auto st = step_all(ns, p, strata, d, opt.dt * static_cast<double>(k), opt.dt, opt.threads);
        rate.push_back(st.mean);
        se.push_back(st.se);
        take(k + 1);
    }
    out.kappa = kappa_from_rate(rate, gamma, delay, opt.dt);
    out.rate = RateCurve(0.0, opt.dt, std::move(rate));
    out.rate_se = RateCurve(0.0, opt.dt, std::move(se));
    out.steps = steps;
    return out;
}

SoftMeanField solve_soft_mf_pde(const SoftParams& p, const SoftSolverOptions& opt)
{
    require_peak_at_soma(p, "solve_soft_mf_pde");
    if (p.theta != 0.0) throw std::invalid_argument("solve_soft_mf_pde: the PDE scheme requires theta = 0");
    if (opt.v_cells < 4) throw std::invalid_argument("solve_soft_mf_pde: need at least 4 cells");
    std::size_t steps = step_count(opt.T, opt.dt);
    auto snaps = snapshot_steps(opt.snapshot_times, opt.dt, steps);
    SoftMeanField out;
    out.v_cap = opt.v_cap > p.v_min ? opt.v_cap : pilot_cap(p, opt);
    const std::size_t N = opt.v_cells;
    const double dv = (out.v_cap - p.v_min) / static_cast<double>(N);
    const double dt = opt.dt;
    const double gamma = p.gamma();

    std::vector<double> lam(N), Fface(N + 1);
    for (std::size_t i = 0; i < N; ++i) lam[i] = p.lambda(p.v_min + dv * (static_cast<double>(i) + 0.5));
    for (std::size_t j = 0; j <= N; ++j) Fface[j] = p.F(p.v_min + dv * static_cast<double>(j));

    // initial cell masses
    std::vector<double> g(N, 0.0);  // densities
    if (p.f0.is_density()) {
        const auto& d = p.f0.as_density();
        auto bps = d.f.breakpoints();
        for (std::size_t i = 0; i < N; ++i) {
            double lo = std::max(d.lo, p.v_min + dv * static_cast<double>(i));
            double hi = std::min(d.hi, p.v_min + dv * static_cast<double>(i + 1));
            if (!(hi > lo)) continue;
            std::vector<double> cuts{lo};
            for (double b : bps)
                if (b > lo && b < hi) cuts.push_back(b);
            cuts.push_back(hi);
            std::sort(cuts.begin(), cuts.end());
            double m = 0.0;
            for (std::size_t c = 1; c < cuts.size(); ++c) m += integrate(d.f, cuts[c - 1], cuts[c], 1e-12).value;
            g[i] = m / dv;
        }
    } else {
        const auto& a = p.f0.as_atoms();
        for (std::size_t k = 0; k < a.values.size(); ++k) {
            auto i = static_cast<std::size_t>(std::max(0.0, (a.values[k] - p.v_min) / dv));
            g[std::min(i, N - 1)] += a.weights[k] / dv;
        }
    }
    auto mass_of = [&](const std::vector<double>& v) {
        double total = 0.0;
        for (double x : v) total += x * dv;
        return total;
    };
    {
        // projection of f0 onto the cells; stepping below never rescales
        double total = mass_of(g);
        if (!(total > 0.0)) throw std::runtime_error("solve_soft_mf_pde: f0 has no mass on the grid");
        for (auto& x : g) x /= total;
    }
    auto rate_of = [&](const std::vector<double>& v) {
        double m = 0.0;
        for (std::size_t i = 0; i < N; ++i) m += lam[i] * v[i] * dv;
        return m;
    };

    std::vector<double> slope(N, 0.0), flux(N + 1, 0.0);
    auto rhs = [&](const std::vector<double>& v, std::vector<double>& dvdt, bool check_cfl) {
        double m = rate_of(v);
        double d = std::sqrt(gamma * m);
        if (opt.muscl) {
            for (std::size_t i = 1; i + 1 < N; ++i) {
                double l = v[i] - v[i - 1], r = v[i + 1] - v[i];
                slope[i] = l * r > 0.0 ? 2.0 * l * r / (l + r) : 0.0;  // van Leer
            }
        }
        double umax = 0.0;
        flux[0] = m;  // reset mass re-enters at v_min
        for (std::size_t j = 1; j <= N; ++j) {
            double u = Fface[j] + d;
            umax = std::max(umax, std::abs(u));
            if (u >= 0.0)
                flux[j] = u * (v[j - 1] + 0.5 * slope[j - 1]);
            else
                flux[j] = j < N ? u * (v[j] - 0.5 * slope[j]) : 0.0;
        }
        flux[N] = 0.0;  // closed at v_cap
        umax = std::max(umax, std::abs(Fface[0] + d));
        if (check_cfl) {
            double cfl = umax * dt / dv;
            out.max_cfl = std::max(out.max_cfl, cfl);
            if (cfl > 1.0)
                throw std::runtime_error("solve_soft_mf_pde: Courant number " + std::to_string(cfl) +
                                         " above 1; lower dt or v_cells");
        }
        for (std::size_t i = 0; i < N; ++i) dvdt[i] = -(flux[i + 1] - flux[i]) / dv - lam[i] * v[i];
        return m;
    };

    auto snapshot = [&](double t) {
        DensityGrid s{p.v_min, out.v_cap, t, std::vector<double>(N)};
        for (std::size_t i = 0; i < N; ++i) s.mass[i] = g[i] * dv;
        out.snapshots.push_back(std::move(s));
    };
    auto take = [&](std::size_t k) {
        for (std::size_t s = 0; s < snaps.size(); ++s)
            if (snaps[s] == k) snapshot(opt.snapshot_times[s]);
    };

    std::vector<double> rate{rate_of(g)};
    std::vector<double> k1(N), g1(N), k2(N);
    double top = g[N - 1] * dv;
    bool warned = false;
    take(0);
    for (std::size_t k = 0; k < steps; ++k) {
        dt_guard(rate[k], dt, &out.warnings, warned);
        rhs(g, k1, true);
        for (std::size_t i = 0; i < N; ++i) g1[i] = g[i] + dt * k1[i];
        rhs(g1, k2, true);
        // rounding at the leading edge can leave values of order 1e-130 below zero
        for (std::size_t i = 0; i < N; ++i) g[i] = std::max(0.0, 0.5 * g[i] + 0.5 * (g1[i] + dt * k2[i]));
        out.max_mass_error = std::max(out.max_mass_error, std::abs(mass_of(g) - 1.0));
        top = std::max(top, g[N - 1] * dv);
        rate.push_back(rate_of(g));
        take(k + 1);
    }
    if (top > 1e-6)
        out.warnings.push_back("solve_soft_mf_pde: top cell held mass " + std::to_string(top) + "; raise v_cap");
    out.kappa = kappa_from_rate(rate, gamma, 0, dt);
    out.rate = RateCurve(0.0, dt, std::move(rate));
    out.steps = steps;
    return out;
}

PicardResult picard_kappa(const SoftParams& p, std::size_t iterations, const SoftSolverOptions& opt)
{
    std::size_t steps = step_count(opt.T, opt.dt);
    std::size_t delay = delay_steps(p.theta, opt.dt);
    const double dt = opt.dt;
    const double H0 = p.H(0.0);
    const double H_sup = p.H.sup_on(0.0, p.L);
    const bool closed = H0 >= H_sup * (1.0 - 1e-12);

    PicardResult res;
    res.iterates.push_back(KappaPath::zero(opt.T, steps));
    int growth = 0;
    for (std::size_t it = 0; it < iterations; ++it) {
        const KappaPath& cur = res.iterates.back();
        // common random numbers: every iteration restarts from the same streams
        Strata strata(opt.K, opt.seed);
        auto ns = init_neurons(p, strata);
        std::vector<double> h{lambda_stats(ns, p).mean};
        for (std::size_t k = 0; k < steps; ++k) {
            double t = dt * static_cast<double>(k);
            double d = (cur.value(std::min(t + dt, opt.T)) - cur.value(t)) / dt;
            h.push_back(step_all(ns, p, strata, d, t, dt, opt.threads).mean);
        }
        RateCurve hc = RateCurve(0.0, dt, h).delayed(p.theta);

        std::vector<double> kv(steps + 1, 0.0), kp(steps + 1, 0.0);
        if (closed) {
            double c = p.w * std::sqrt(2.0 * p.rho * H0);
            for (std::size_t k = 0; k <= steps; ++k) {
                kp[k] = c * std::sqrt(hc.values()[k]);
                if (k > delay) kv[k] = kv[k - 1] + c * integral_sqrt(hc, hc.time(k - 1), hc.time(k));
            }
        } else {
            PathLattice lat{std::min<std::size_t>(steps, 400), 200, 16};
            auto g = gamma_variational(hc, p.H, opt.T, p.rho, p.L, lat);
            RateCurve gv(0.0, opt.T / static_cast<double>(lat.M), g.values);
            for (std::size_t k = 0; k <= steps; ++k) kv[k] = p.w * gv(std::min(dt * static_cast<double>(k), opt.T));
            for (std::size_t k = 0; k < steps; ++k) kp[k] = std::max(0.0, (kv[k + 1] - kv[k]) / dt);
            kp[steps] = kp[steps - 1];
        }
        KappaPath next;
        next.kappa = RateCurve(0.0, dt, kv);
        next.kappa_prime = RateCurve(0.0, dt, kp);
        double inc = 0.0;
        for (std::size_t k = 0; k <= steps; ++k) inc = std::max(inc, std::abs(kv[k] - cur.kappa.values()[k]));
        if (!res.increments.empty() && inc > res.increments.back()) {
            if (++growth >= 3) res.non_contraction = true;
        } else {
            growth = 0;
        }
        res.increments.push_back(inc);
        res.iterates.push_back(std::move(next));
    }
    return res;
}

}  // namespace dendrite
