#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pderl/commands.hpp"
#include "pderl/config.hpp"

namespace {

struct CliFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    int seeds = 0;
    std::string mode;
    std::string env;
    long frames = 0;
    std::string out;
};

void add_common_flags(CLI::App* cmd, CliFlags& flags) {
    cmd->add_option("--config", flags.config_path, "run configuration file (key = value lines)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--seeds", flags.seeds, "number of seeded repetitions")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--mode", flags.mode, "operator mode")
        ->check(CLI::IsMember({"erl", "perl", "derl", "pderl"}));
    cmd->add_option("--env", flags.env, "environment")
        ->check(CLI::IsMember({"point_mass_2d", "pendulum_swing_up"}));
    cmd->add_option("--frames", flags.frames, "environment frame budget")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", flags.out, "output directory");
}

pderl::RunConfig build_config(const CLI::App* cmd, const CliFlags& flags) {
    pderl::RunConfig cfg;
    if (cmd->count("--config") > 0) {
        cfg = pderl::load_config(flags.config_path);
    }
    if (cmd->count("--seed") > 0) {
        cfg.engine.master_seed = flags.seed;
    }
    if (cmd->count("--seeds") > 0) {
        cfg.seeds = flags.seeds;
    }
    if (cmd->count("--mode") > 0) {
        cfg.engine.mode = pderl::parse_mode(flags.mode);
    }
    if (cmd->count("--env") > 0) {
        cfg.env_id = pderl::parse_env_id(flags.env);
    }
    if (cmd->count("--frames") > 0) {
        cfg.engine.frame_budget = flags.frames;
    }
    if (cmd->count("--out") > 0) {
        cfg.out_dir = flags.out;
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evolutionary reinforcement learning engine with learning-based "
                 "variation operators"};
    app.require_subcommand(1);

    CliFlags flags;
    CLI::App* train = app.add_subcommand("train", "run the evolution loop to the frame budget");
    CLI::App* crossover =
        app.add_subcommand("crossover-bench", "compare distillation and n-point crossover "
                                              "offspring on trained parents");
    CLI::App* mutation =
        app.add_subcommand("mutation-bench", "compare proximal and Gaussian mutation offspring, "
                                             "with a magnitude sweep");
    CLI::App* selection =
        app.add_subcommand("selection-compare", "paired greedy vs distance parent selection runs");
    CLI::App* plots =
        app.add_subcommand("export-plots", "distill a run directory into plot-friendly tables");
    for (CLI::App* cmd : {train, crossover, mutation, selection, plots}) {
        add_common_flags(cmd, flags);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const CLI::App* active = app.get_subcommands().front();
        const pderl::RunConfig cfg = build_config(active, flags);
        if (active == train) {
            return pderl::cmd_train(cfg);
        }
        if (active == crossover) {
            return pderl::cmd_crossover_bench(cfg);
        }
        if (active == mutation) {
            return pderl::cmd_mutation_bench(cfg);
        }
        if (active == selection) {
            return pderl::cmd_selection_compare(cfg);
        }
        return pderl::cmd_export_plots(cfg);
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
}
