#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dendrite/experiments.hpp"

namespace dendrite {

namespace {

std::string short_number(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

struct Run {
    ConfigFile cfg;
    std::filesystem::path out;
    std::ostream& log;
    unsigned threads = 1;
    std::vector<std::string> notes;

    std::ofstream open(const std::string& name) const
    {
        std::ofstream f(out / name);
        if (!f) throw std::runtime_error("cannot write " + (out / name).string());
        return f;
    }

    void write_text(const std::string& name, const std::string& text) const { open(name) << text; }

    void check(const ValidationReport& rep)
    {
        for (const auto& w : rep.warnings) {
            log << "warning: " << w << '\n';
            notes.push_back("warning: " + w);
        }
        if (!rep.ok()) {
            std::string msg;
            for (const auto& e : rep.errors) msg += (msg.empty() ? "" : "; ") + e;
            throw ValidationFailure(msg);
        }
    }
};

MeanFieldScheme scheme_of(const std::string& s)
{
    if (s == "automatic") return MeanFieldScheme::automatic;
    if (s == "pde") return MeanFieldScheme::pde;
    if (s == "particles") return MeanFieldScheme::particles;
    throw ValidationFailure("scheme must be automatic, pde or particles");
}

std::size_t positive_count(ConfigFile& cfg, const std::string& key, std::int64_t fallback)
{
    auto v = cfg.get_int(key, fallback);
    if (v < 1) throw ValidationFailure(key + " must be >= 1");
    return static_cast<std::size_t>(v);
}

void isolated_dendrite_command(Run& run)
{
    auto& cfg = run.cfg;
    IsolatedDendriteOptions opt;
    opt.n = cfg.get_int("n", 10000);
    if (opt.n < 100) throw ValidationFailure("isolated-dendrite needs n >= 100");
    opt.replicates = positive_count(cfg, "replicates", 100);
    opt.seed = cfg.get_u64("seed", 1);
    opt.H = cfg.get_function("H", "affine(c0=2, c1=-2)");
    opt.rho = cfg.get_double("rho", 1.0);
    opt.L = cfg.get_double("L", 1.0);
    double t_max = cfg.get_double("t_max", 2.0), t_step = cfg.get_double("t_step", 0.05);
    if (!(t_step > 0.0) || !(t_max >= 0.0)) throw ValidationFailure("t_step > 0 and t_max >= 0 required");
    for (std::size_t k = 0; t_step * static_cast<double>(k) <= t_max * (1.0 + 1e-12); ++k)
        opt.t_grid.push_back(t_step * static_cast<double>(k));
    opt.threads = run.threads;
    auto rows = isolated_dendrite_bias(opt);
    auto f = run.open("bias.csv");
    write_bias_csv(f, rows);
    for (const auto& r : rows)
        if (std::abs(r.t - 1.0) < 1e-12)
            run.log << "bias at t=1: " << r.bias << " (se " << r.se << ", limit " << r.limit << ")\n";
}

void soft_compare_command(Run& run)
{
    auto& cfg = run.cfg;
    auto p = read_soft_params(cfg);
    run.check(validate_soft(p));
    SoftCompareOptions opt;
    opt.n = cfg.get_int("n", 2000);
    opt.p_n = cfg.get_double("p_n", 1.0);
    opt.self_edges = cfg.get_bool("self_edges", true);
    opt.T = cfg.get_double("T", 2.0);
    opt.sample_dt = cfg.get_double("sample_dt", 0.01);
    opt.K = positive_count(cfg, "K", 100000);
    opt.dt = cfg.get_double("dt", 1e-3);
    opt.v_cells = positive_count(cfg, "v_cells", 400);
    opt.scheme = scheme_of(cfg.get_string("scheme", "automatic"));
    opt.max_shift = cfg.get_double("max_shift", 0.2);
    opt.shift_step = cfg.get_double("shift_step", 1e-3);
    opt.snapshot_times = cfg.get_list("snapshot_times", "0.5, 1");
    opt.density_bins = positive_count(cfg, "density_bins", 60);
    opt.seed = cfg.get_u64("seed", 1);
    opt.threads = run.threads;
    NetworkParams np(opt.n, opt.p_n, p.w, opt.T, opt.seed);
    run.check(validate_network(np));
    run.log << "self_edges = " << (opt.self_edges ? "true" : "false") << '\n';

    auto r = soft_compare(p, opt);
    for (const auto& w : r.warnings) run.notes.push_back("warning: " + w);
    {
        auto f = run.open("compare.csv");
        write_soft_compare_csv(f, r);
    }
    {
        auto f = run.open("rate.csv");
        write_rate_csv(f, r.network_rate);
    }
    {
        auto f = run.open("meanfield_rate.csv");
        write_rate_csv(f, r.limit_rate);
    }
    {
        auto f = run.open("spikes.csv");
        write_spikes_csv(f, r.trace);
    }
    for (std::size_t k = 0; k < opt.snapshot_times.size(); ++k) {
        auto tag = short_number(opt.snapshot_times[k]);
        auto f = run.open("density_t" + tag + ".csv");
        write_density_csv(f, r.network_density[k]);
        if (k < r.limit_density.size()) {
            auto g = run.open("meanfield_density_t" + tag + ".csv");
            write_density_csv(g, r.limit_density[k]);
        }
    }
    std::ostringstream s;
    s << "scheme = " << r.scheme << "\ntau_star = " << r.fit.tau << "\nshifted_distance = " << r.fit.distance
      << "\nunshifted_distance = " << r.fit.distance_unshifted << "\npeak = " << r.fit.peak
      << "\nrelative_distance = " << r.fit.relative() << "\nevents = " << r.trace.events << "\n";
    run.write_text("summary.txt", s.str());
    run.log << s.str();
}

void hard_compare_command(Run& run)
{
    auto& cfg = run.cfg;
    auto p = read_hard_params(cfg);
    run.check(validate_hard(p));
    HardCompareOptions opt;
    opt.T = cfg.get_double("T", 6.0);
    opt.cells = positive_count(cfg, "cells", 6000);
    opt.surrogate_alpha = cfg.get_double("surrogate_alpha", 0.2);
    opt.surrogate_power = static_cast<int>(cfg.get_int("surrogate_power", 300));
    opt.K = positive_count(cfg, "K", 20000);
    opt.dt = cfg.get_double("dt", 1e-3);
    opt.n = cfg.get_int("n", 0);
    opt.sample_dt = cfg.get_double("sample_dt", 0.01);
    opt.seed = cfg.get_u64("seed", 1);
    opt.threads = run.threads;
    run.check(validate_soft(hard_surrogate(p, opt.surrogate_alpha, opt.surrogate_power)));

    auto r = hard_compare(p, opt);
    for (const auto& w : r.warnings) run.notes.push_back("warning: " + w);
    {
        auto f = run.open("kappa.csv");
        write_kappa_csv(f, r.explicit_kappa);
    }
    {
        auto f = run.open("compare.csv");
        write_hard_compare_csv(f, r);
    }
    std::ostringstream s;
    s.precision(17);
    s << "period = " << r.period << "\nperiodicity_error = " << r.periodicity_error
      << "\nperiod_autocorrelation = " << r.period_autocorrelation << "\nsup_difference = " << r.sup_difference
      << "\npeak = " << r.peak << "\n";
    run.write_text("summary.txt", s.str());
    run.log << s.str();
}

void stationary_scan_command(Run& run)
{
    auto& cfg = run.cfg;
    StationaryScanOptions opt;
    auto lambda = cfg.get_function("lambda", "power(p=2)");
    if (!stationary_shape(lambda, opt.alpha, opt.p))
        throw ValidationFailure("stationary-scan needs lambda = shifted_power(alpha, p) or power(p)");
    opt.gammas = cfg.get_list("gammas", "1, 5, 20");
    opt.Is = cfg.get_list("I", "0.1, 0.5, 1, 2, 5");
    opt.a_lo = cfg.get_double("a_lo", 0.0);
    opt.a_hi = cfg.get_double("a_hi", 0.0);
    opt.resolution = positive_count(cfg, "resolution", 4000);
    opt.critical = cfg.get_bool("critical", true);
    opt.gamma_lo = cfg.get_double("gamma_lo", 0.05);
    opt.gamma_hi = cfg.get_double("gamma_hi", 50.0);
    opt.gamma_tol = cfg.get_double("gamma_tol", 1e-3);
    for (double g : opt.gammas)
        if (!(g > 0.0)) throw ValidationFailure("gammas must be positive");
    for (double I : opt.Is)
        if (!(I > 0.0)) throw ValidationFailure("I values must be positive");

    auto r = stationary_scan(opt);
    {
        auto f = run.open("bifurcation.csv");
        write_bifurcation_csv(f, r.rows);
    }
    for (double g : opt.gammas) {
        auto f = run.open("phi_scan_gamma" + short_number(g) + ".csv");
        write_phi_scan_csv(f, r.grid, g);
    }
    std::ostringstream s;
    s.precision(17);
    for (const auto& row : r.rows) s << "roots(gamma=" << row.gamma << ", I=" << row.I << ") = " << row.roots << '\n';
    if (opt.critical) {
        if (r.critical.gamma1_found)
            s << "gamma1 = [" << r.critical.gamma1_lo << ", " << r.critical.gamma1_hi << "]\n";
        else
            s << "gamma1 = none in [" << opt.gamma_lo << ", " << opt.gamma_hi << "]\n";
        if (r.critical.gamma2_found)
            s << "gamma2 = [" << r.critical.gamma2_lo << ", " << r.critical.gamma2_hi << "]\n";
        else
            s << "gamma2 = none in [" << opt.gamma_lo << ", " << opt.gamma_hi << "]\n";
    }
    run.write_text("summary.txt", s.str());
    run.log << s.str();
}

int validate_command(Run& run)
{
    auto seed = run.cfg.get_u64("seed", 1);
    auto checks = run_validation_suite(seed, run.threads);
    std::ostringstream s;
    int failed = 0;
    for (const auto& c : checks) {
        s << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        if (!c.pass) ++failed;
    }
    s << failed << " of " << checks.size() << " checks failed\n";
    run.write_text("validate.txt", s.str());
    run.log << s.str();
    return failed == 0 ? 0 : 1;
}

}  // namespace

std::vector<std::string> experiment_commands()
{
    return {"isolated-dendrite", "soft-compare", "hard-compare", "stationary-scan", "validate"};
}

int run_experiment(const ExperimentConfig& ec, std::ostream& log)
{
    Run run{ec.config_path.empty() ? ConfigFile() : ConfigFile::load(ec.config_path), ec.out, log, ec.threads, {}};
    auto& cfg = run.cfg;
    for (const auto& [k, v] : ec.overrides) cfg.set(k, v);
    if (ec.seed) cfg.set("seed", std::to_string(*ec.seed));
    if (ec.n) cfg.set("n", std::to_string(*ec.n));
    if (ec.K) cfg.set("K", std::to_string(*ec.K));
    if (ec.replicates) cfg.set("replicates", std::to_string(*ec.replicates));
    cfg.set("command", ec.command);
    cfg.get_string("command", ec.command);
    std::filesystem::create_directories(run.out);

    int code = 0;
    if (ec.command == "isolated-dendrite")
        isolated_dendrite_command(run);
    else if (ec.command == "soft-compare")
        soft_compare_command(run);
    else if (ec.command == "hard-compare")
        hard_compare_command(run);
    else if (ec.command == "stationary-scan")
        stationary_scan_command(run);
    else if (ec.command == "validate")
        code = validate_command(run);
    else
        throw std::invalid_argument("unknown command " + ec.command);

    for (const auto& k : cfg.unused_keys()) {
        log << "warning: unused key " << k << '\n';
        run.notes.push_back("unused key " + k);
    }
    std::ostringstream side;
    side << "# dendrite-field " << ec.command << "; re-run with --config run.conf\n";
    side << "# threads = " << run.threads << " (outputs do not depend on it)\n";
    for (const auto& n : run.notes) side << "# " << n << '\n';
    side << cfg.resolved_text();
    run.write_text("run.conf", side.str());
    return code;
}

}  // namespace dendrite
