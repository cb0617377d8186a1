#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "rfio/experiments.hpp"
#include "rfio/parallel.hpp"

// Experiment runner: one command per invocation, selected by the config
// file; `rfio suite` chains the acceptance battery. Exit status: 0 pass,
// 2 criterion failure, 1 error.

int main(int argc, char** argv) {
    CLI::App app{"rough-phase Fourier integral operator experiments"};
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;

    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--out", out_dir, "output directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", seed, "seed (overrides config)");
    app.add_option("--threads", threads, "worker threads (0 = auto)");

    CLI::App* suite = app.add_subcommand("suite", "run the acceptance battery");
    std::string suite_out = "suite_out";
    std::uint64_t suite_seed = 1;
    suite->add_option("--out", suite_out, "output directory");
    suite->add_option("--seed", suite_seed, "seed");

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    try {
        if (*suite) {
            if (threads > 0) rfio::set_thread_count(threads);
            rfio::ExperimentConfig cfg;
            cfg.command = "suite";
            cfg.out_dir = suite_out;
            cfg.seed = suite_seed;
            return rfio::run_experiment(cfg, std::cout);
        }
        if (config_path.empty()) {
            std::cerr << "error: --config is required (or use the suite subcommand)\n";
            return 1;
        }
        rfio::ExperimentConfig cfg = rfio::load_config_file(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed_set) cfg.seed = seed;
        if (threads > 0) cfg.threads = threads;
        return rfio::run_experiment(cfg, std::cout);
    } catch (const rfio::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
