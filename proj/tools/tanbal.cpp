#include <iostream>

#include "CLI11.hpp"

#include "tanbal/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Balanced truncation by adaptive tangential interpolation: batch experiment runner"};
    app.require_subcommand(1);

    bool deterministic = false;
    std::uint64_t seed = 0;
    std::string output_dir;
    app.add_flag("--deterministic", deterministic, "Run single-threaded so outputs are reproducible byte for byte");
    auto* seed_opt = app.add_option("--seed", seed, "Algorithm seed (overrides the config)");
    auto* out_opt = app.add_option("--output-dir", output_dir, "Directory for CSV and JSON artifacts (overrides the config)");

    std::string run_config, compare_config;
    auto* run = app.add_subcommand("run", "Run the task named in the config");
    run->add_option("config", run_config, "Experiment config (JSON)")->required();
    auto* compare = app.add_subcommand("compare", "ATIA-BT against dense BT for each tolerance in params.tols");
    compare->add_option("config", compare_config, "Experiment config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (deterministic) tanbal::set_thread_count(1);
    tanbal::RunOverrides ov;
    if (*seed_opt) ov.seed = seed;
    if (*out_opt) ov.output_dir = output_dir;
    if (*compare) {
        ov.task = tanbal::Task::Compare;
        return tanbal::run_experiment(compare_config, ov);
    }
    return tanbal::run_experiment(run_config, ov);
}
