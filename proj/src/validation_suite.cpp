#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "dendrite/experiments.hpp"
#include "dendrite/front_engine.hpp"
#include "dendrite/gamma_functional.hpp"
#include "dendrite/quadrature.hpp"

namespace dendrite {

namespace {

std::string describe(const char* format, double a, double b = 0.0)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, format, a, b);
    return buf;
}

PointCloud uniform_cloud(SplitMix& rng, std::size_t n)
{
    std::vector<Impulse> pts(n);
    for (auto& q : pts) {
        q.t = rng.uniform();
        q.x = 1.0 - std::sqrt(1.0 - rng.uniform());
    }
    return PointCloud(std::move(pts), 1.0, 1.0);
}

CheckResult fronts_equal_lis(std::uint64_t seed)
{
    std::size_t clouds = 200, mismatches = 0;
    for (std::size_t c = 0; c < clouds; ++c) {
        SplitMix rng(derive_seed(seed, c));
        auto cloud = uniform_cloud(rng, 1 + static_cast<std::size_t>(rng.uniform() * 200));
        auto tr = simulate_fronts(cloud, 3.0);
        if (!tr.conserved()) ++mismatches;
        for (int q = 0; q < 10; ++q) {
            double t = 2.5 * rng.uniform();
            if (tr.hits_before(t) != lis_count_before(cloud, t)) ++mismatches;
        }
    }
    return {"fronts_equal_lis", mismatches == 0, describe("%.0f clouds, %.0f mismatches", double(clouds), double(mismatches))};
}

CheckResult lis_triple_oracle(std::uint64_t seed)
{
    std::size_t clouds = 200, mismatches = 0;
    for (std::size_t c = 0; c < clouds; ++c) {
        SplitMix rng(derive_seed(seed ^ 0x11, c));
        auto cloud = uniform_cloud(rng, 1 + static_cast<std::size_t>(rng.uniform() * 60));
        auto a = lis_count(cloud);
        if (a != lis_brute_force(cloud) || a != layer_decomposition(cloud).size()) ++mismatches;
    }
    return {"lis_triple_oracle", mismatches == 0, describe("%.0f clouds, %.0f mismatches", double(clouds), double(mismatches))};
}

CheckResult general_position_gate()
{
    bool ray = false, order = false;
    try {
        PointCloud({{0.25, 0.5}, {0.5, 0.75}}, 1.0, 1.0);
    } catch (const GeneralPositionError&) {
        ray = true;
    }
    try {
        PointCloud::from_sorted({{0.5, 0.1}, {0.25, 0.6}}, 1.0, 1.0);
    } catch (const std::invalid_argument&) {
        order = true;
    }
    return {"general_position_gate", ray && order,
            std::string("light-ray pair ") + (ray ? "rejected" : "accepted") + ", unsorted cloud " +
                (order ? "rejected" : "accepted")};
}

CheckResult network_replay(std::uint64_t seed)
{
    SoftParams p;
    NetworkParams net(150, 1.0, 1.0, 1.5, derive_seed(seed, 0x21));
    auto topo = sample_topology(net, p.H, p.L);
    NetworkOptions opt;
    opt.sample_dt = 0.05;
    opt.samples = 31;
    opt.record_dendrites = {0, 77, 149};
    auto tr = simulate_soft_network(p, net, topo, opt, derive_seed(seed, 0x22));
    std::size_t bad = 0, hits = 0;
    for (std::size_t k = 0; k < tr.recorded_dendrites.size(); ++k) {
        auto j = static_cast<std::size_t>(tr.recorded_dendrites[k]);
        PointCloud cloud(tr.recorded_impulses[k], p.rho, p.L);
        if (simulate_fronts(cloud, net.T).soma_hits != tr.excitations[j]) ++bad;
        if (lis_count_before(cloud, net.T) != tr.excitations[j].size()) ++bad;
        hits += tr.excitations[j].size();
    }
    return {"network_replay", bad == 0 && hits > 0, describe("%.0f replayed soma hits, %.0f mismatches", double(hits), double(bad))};
}

CheckResult solver_identity(std::uint64_t seed)
{
    SoftParams p;
    p.theta = 0.4;
    NetworkParams net(120, 0.5, 1.0, 2.0, derive_seed(seed, 0x31));
    auto topo = sample_topology(net, p.H, p.L);
    NetworkOptions opt;
    opt.sample_dt = 0.1;
    opt.samples = 21;
    auto a = simulate_soft_network(p, net, topo, opt, derive_seed(seed, 0x32));
    opt.solver = DendriteSolver::fronts;
    auto b = simulate_soft_network(p, net, topo, opt, derive_seed(seed, 0x32));
    bool soft = a.spikes == b.spikes && a.excitations == b.excitations;

    HardParams h;
    NetworkParams hn(100, 1.0, 1.0, 4.0, derive_seed(seed, 0x33));
    auto ht = sample_topology(hn, h.H, h.L);
    opt.solver = DendriteSolver::piles;
    auto c = simulate_hard_network(h, hn, ht, opt, derive_seed(seed, 0x34));
    opt.solver = DendriteSolver::fronts;
    auto d = simulate_hard_network(h, hn, ht, opt, derive_seed(seed, 0x34));
    bool hard = c.spikes == d.spikes && c.excitations == d.excitations;
    return {"solver_identity", soft && hard,
            std::string("soft ") + (soft ? "identical" : "differs") + ", hard " + (hard ? "identical" : "differs")};
}

CheckResult hard_crossings(std::uint64_t seed)
{
    HardParams p;
    NetworkParams net(120, 1.0, 1.0, 6.0, derive_seed(seed, 0x41));
    auto topo = sample_topology(net, p.H, p.L);
    NetworkOptions opt;
    opt.sample_dt = 0.1;
    opt.samples = 61;
    auto tr = simulate_hard_network(p, net, topo, opt, derive_seed(seed, 0x42));
    std::size_t bad = 0;
    for (double v : tr.potentials)
        if (!(v >= p.v_min && v < p.v_max)) ++bad;
    for (std::int64_t i = 0; i < net.n; ++i) {
        double V = tr.V(0, i), t = 0.0;
        std::size_t crossings = 0;
        auto drift_to = [&](double s) {
            while (t + (p.v_max - V) / p.I <= s + kHardTieWindow) {
                t = std::min(t + (p.v_max - V) / p.I, s);
                ++crossings;
                V = p.v_min;
            }
            V += p.I * (s - t);
            t = s;
        };
        for (double h : tr.excitations[static_cast<std::size_t>(i)]) {
            drift_to(h);
            V += tr.w_n;
            if (V >= p.v_max) {
                ++crossings;
                V = p.v_min;
            }
        }
        drift_to(net.T);
        if (crossings != tr.spikes[static_cast<std::size_t>(i)].size()) ++bad;
    }
    return {"hard_spikes_are_crossings", bad == 0, describe("%.0f neurons, %.0f mismatches", double(net.n), double(bad))};
}

CheckResult hard_closed_form(std::uint64_t seed)
{
    HardParams p;
    SplitMix rng(derive_seed(seed, 0x51));
    double worst = 0.0;
    std::size_t jumps = 0;
    std::vector<double> times;
    for (int i = 0; i <= 400; ++i) times.push_back(0.01 * i);
    for (int c = 0; c < 100; ++c) {
        std::vector<double> incr(41, 0.0);
        for (std::size_t i = 1; i < incr.size(); ++i) incr[i] = incr[i - 1] + 0.2 * rng.uniform();
        RateCurve r(0.0, 0.1, incr);
        double V0 = 1.2 * rng.uniform();
        auto fr = [&](double t) { return r(t); };
        auto a = single_neuron_hard(p, fr, V0, times);
        auto b = single_neuron_hard_stepped(p, fr, V0, times);
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (a.J[i] != b.J[i]) ++jumps;
            worst = std::max(worst, std::abs(a.V[i] - b.V[i]));
        }
    }
    return {"hard_closed_form_vs_steps", jumps == 0 && worst <= 1e-12,
            describe("max |V diff| %.3g, %.0f count mismatches", worst, double(jumps))};
}

CheckResult hard_kappa()
{
    HardParams p;
    HardKappa hk(p);
    double a = hk.period();
    auto ex = hard_kappa_explicit(p, 3 * a, 900);
    auto ode = hard_kappa_ode(p, 3 * a, 900);
    double worst = 0.0, per = 0.0, ak = 0.0;
    for (std::size_t i = 0; i < ex.kappa.size(); ++i)
        worst = std::max(worst, std::abs(ex.kappa.values()[i] - ode.kappa.values()[i]));
    for (int i = 0; i < 1000; ++i) {
        double t = 2 * a * i / 1000.0;
        per = std::max(per, std::abs(hk.kappa_prime(t + a) - hk.kappa_prime(t)));
    }
    for (std::size_t k = 0; k < ex.thresholds.size(); ++k) {
        double s = ex.thresholds[k];
        ak = std::max(ak, std::abs(p.I * s + hk.kappa(s) - (p.v_max - p.v_min) * static_cast<double>(k)));
    }
    bool ok = worst <= 1e-4 && per <= 1e-4 && ak <= 1e-8 && ex.thresholds.size() >= 3;
    char buf[160];
    std::snprintf(buf, sizeof buf, "ODE gap %.3g, periodicity %.3g, a_k identity %.3g", worst, per, ak);
    return {"hard_kappa_explicit", ok, buf};
}

CheckResult pde_mass()
{
    SoftParams p;
    SoftSolverOptions o;
    o.T = 0.5;
    o.dt = 1e-3;
    auto r = solve_soft_mf_pde(p, o);
    return {"pde_mass", r.max_mass_error <= 1e-12, describe("max |mass - 1| %.3g over %.0f steps", r.max_mass_error, double(r.steps))};
}

CheckResult gamma_dp()
{
    auto H = FunctionSpec::affine(2.0, -2.0);
    auto g = RateCurve::sample([](double s) { return 1.0 + 0.5 * std::sin(4.0 * s); }, 1.5, 300);
    auto r = gamma_variational(g, H, 1.5, 1.0, 1.0, PathLattice{100, 100, 16});
    double exact = gamma_closed_form(g, 1.5, 1.0, 2.0);
    double rel = std::abs(r.value - exact) / exact;
    return {"gamma_dp_closed_form", rel <= 1e-2 && r.value <= r.bound * (1 + 1e-12),
            describe("relative gap %.3g, value/bound %.6f", rel, r.value / r.bound)};
}

CheckResult stationary_identities()
{
    double alpha = 1.0;
    int p = 4;
    double a = alpha + 1.0;
    double e = compute_Ka(a, alpha, p, KaBranch::exponential).value;
    double u = compute_Ka(a, alpha, p, KaBranch::uniform).value;
    double splice = std::abs(e - u) / u;
    double a3 = 3.0, K = compute_Ka(a3, alpha, p).value;
    auto lam = [&](double v) { return v > alpha ? std::pow(v - alpha, p) : 0.0; };
    double mass = integrate([&](double v) { return g_a_value(v, a3, alpha, p, K); }, 0.0, a3, 1e-10).value;
    double flux = K * integrate([&](double v) { return lam(v) * g_a_value(v, a3, alpha, p, K); }, 0.0, a3, 1e-10).value;
    bool ok = splice <= 1e-6 && std::abs(mass - 1.0) <= 1e-3 && std::abs(flux - 1.0) <= 1e-3;
    char buf[160];
    std::snprintf(buf, sizeof buf, "splice %.3g, mass %.8f, K int lambda g %.8f", splice, mass, flux);
    return {"stationary_identities", ok, buf};
}

CheckResult determinism(std::uint64_t seed, unsigned threads)
{
    IsolatedDendriteOptions o;
    o.n = 500;
    o.replicates = 16;
    o.seed = seed;
    o.threads = 1;
    auto a = isolated_dendrite_bias(o);
    o.threads = std::max(2u, threads);
    auto b = isolated_dendrite_bias(o);
    bool same = a.size() == b.size();
    for (std::size_t k = 0; same && k < a.size(); ++k) same = a[k].mean_Y == b[k].mean_Y && a[k].se == b[k].se;
    bool zero = a.front().t == 0.0 && a.front().bias == 0.0;

    SoftParams p;
    NetworkParams net(80, 1.0, 1.0, 1.0, seed);
    auto topo = sample_topology(net, p.H, p.L);
    NetworkOptions opt;
    opt.sample_dt = 0.1;
    opt.samples = 11;
    auto x = simulate_soft_network(p, net, topo, opt, seed);
    auto y = simulate_soft_network(p, net, topo, opt, seed);
    bool net_same = x.spikes == y.spikes && x.potentials == y.potentials;
    return {"determinism", same && zero && net_same,
            std::string("replicates across thread counts ") + (same ? "identical" : "differ") + ", bias at t=0 " +
                (zero ? "0" : "nonzero") + ", network reruns " + (net_same ? "identical" : "differ")};
}

CheckResult kick_scaling()
{
    NetworkParams a(1000, 0.5, 1.3, 1.0, 1), b(2000, 0.5, 1.3, 1.0, 1);
    double ratio = (b.w_n() * b.w_n()) / (a.w_n() * a.w_n());
    return {"kick_scaling", std::abs(ratio - 0.5) <= 1e-15, describe("w_n^2 ratio after doubling N: %.17g", ratio)};
}

}  // namespace

std::vector<CheckResult> run_validation_suite(std::uint64_t seed, unsigned threads)
{
    std::vector<std::pair<const char*, std::function<CheckResult()>>> checks = {
        {"fronts_equal_lis", [&] { return fronts_equal_lis(seed); }},
        {"lis_triple_oracle", [&] { return lis_triple_oracle(seed); }},
        {"general_position_gate", [] { return general_position_gate(); }},
        {"network_replay", [&] { return network_replay(seed); }},
        {"solver_identity", [&] { return solver_identity(seed); }},
        {"hard_spikes_are_crossings", [&] { return hard_crossings(seed); }},
        {"hard_closed_form_vs_steps", [&] { return hard_closed_form(seed); }},
        {"hard_kappa_explicit", [] { return hard_kappa(); }},
        {"pde_mass", [] { return pde_mass(); }},
        {"gamma_dp_closed_form", [] { return gamma_dp(); }},
        {"stationary_identities", [] { return stationary_identities(); }},
        {"determinism", [&] { return determinism(seed, threads); }},
        {"kick_scaling", [] { return kick_scaling(); }},
    };
    std::vector<CheckResult> out;
    for (auto& [name, check] : checks) {
        auto t0 = std::chrono::steady_clock::now();
        CheckResult r;
        try {
            r = check();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("threw: ") + e.what();
        }
        r.name = name;
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace dendrite
