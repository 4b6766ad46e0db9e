// dendrite-field: command-line surface of the experiments.
//
// Exit codes: 0 ok, 1 validation failure, 2 runtime or usage error.
// DENDRITE_THREADS sets the worker count.

#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "dendrite/experiments.hpp"

int main(int argc, char** argv)
{
    using namespace dendrite;
    CLI::App app{"Networks of neurons coupled through annihilating dendritic fronts"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::uint64_t seed = 0;
    std::size_t replicates = 0, K = 0;
    std::int64_t n = 0;
    std::string out = "out";
    std::vector<std::string> sets;

    for (const auto& name : experiment_commands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", cfg.config_path, "key = value configuration file")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "64-bit seed (overrides the config)");
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_option("--replicates", replicates, "replicate count");
        sub->add_option("--n", n, "network or cloud size");
        sub->add_option("--K", K, "mean-field particle count");
        sub->add_option("--set", sets, "extra key=value overrides");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (auto* sub : app.get_subcommands()) {
            cfg.command = sub->get_name();
            if (sub->count("--seed")) cfg.seed = seed;
            if (sub->count("--replicates")) cfg.replicates = replicates;
            if (sub->count("--n")) cfg.n = n;
            if (sub->count("--K")) cfg.K = K;
        }
        for (const auto& kv : sets) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) {
                std::cerr << "--set expects key=value, got '" << kv << "'\n";
                return 2;
            }
            auto trim = [](std::string s) {
                s.erase(0, s.find_first_not_of(' '));
                s.erase(s.find_last_not_of(' ') + 1);
                return s;
            };
            cfg.overrides.emplace_back(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
        }
        cfg.out = out;
        cfg.threads = worker_threads();
        return run_experiment(cfg, std::cout);
    } catch (const ValidationFailure& e) {
        std::cerr << "validation failure: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
