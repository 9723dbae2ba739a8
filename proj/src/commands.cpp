#include "pderl/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pderl/checkpoint.hpp"
#include "pderl/operators.hpp"

namespace pderl {
namespace {

namespace fs = std::filesystem;

std::string fmt_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::ofstream open_table(const fs::path& path, const std::string& header) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out << header << "\n";
    return out;
}

fs::path prepare_out_dir(const RunConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    save_config((dir / "config.txt").string(), cfg);
    return dir;
}

struct Stats {
    double mean = 0.0;
    double stddev = 0.0;
    double median = 0.0;
};

Stats summarize(std::vector<double> values) {
    Stats stats;
    if (values.empty()) {
        return stats;
    }
    const double n = static_cast<double>(values.size());
    stats.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double sq = 0.0;
    for (double v : values) {
        sq += (v - stats.mean) * (v - stats.mean);
    }
    stats.stddev = std::sqrt(sq / n);
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    stats.median = values.size() % 2 == 1 ? values[mid]
                                          : (values[mid - 1] + values[mid]) / 2.0;
    return stats;
}

double evaluate_agent(Agent& agent, EnvId env_id, int trials, std::uint64_t seed) {
    auto env = make_env(env_id);
    agent.fitness = evaluate_fitness(*env, network_policy(agent.spec, agent.params), trials,
                                     seed, &agent.memory);
    agent.fitness_fresh = true;
    return agent.fitness;
}

double mean_action_drift(const Agent& parent, const Agent& child, Rng& rng, int batch) {
    const Matrix states = parent.memory.sample_states(rng, batch);
    const Matrix pa = forward(parent.spec, parent.params, states);
    const Matrix ca = forward(child.spec, child.params, states);
    return (pa - ca).colwise().norm().mean();
}

double visitation_kl(const Agent& parent, const Agent& child, EnvId env_id,
                     std::uint64_t seed) {
    auto env = make_env(env_id);
    const VisitationSample parent_sample =
        collect_visitation(*env, network_policy(parent.spec, parent.params), 10,
                           derive_seed(seed, {1}));
    const VisitationSample child_sample = collect_visitation(
        *env, network_policy(child.spec, child.params), 10, derive_seed(seed, {2}));
    const DensityModel p = fit_kde(parent_sample);
    const DensityModel q = fit_kde(child_sample);
    return kl_divergence(p, q, default_grid(p, q)).value;
}

}  // namespace

std::vector<Agent> evaluated_population_snapshot(const EvolutionEngine& engine, EnvId env_id,
                                                 int trials, std::uint64_t seed) {
    std::vector<Agent> snapshot = engine.population();
    for (std::size_t i = 0; i < snapshot.size(); ++i) {
        evaluate_agent(snapshot[i], env_id, trials,
                       derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    }
    return snapshot;
}

int cmd_train(const RunConfig& cfg) {
    cfg.engine.validate();
    const fs::path dir = prepare_out_dir(cfg);
    auto summary = open_table(dir / "summary.tsv",
                              "seed\tmaster_seed\tgenerations\tframes\tfinal_best\tfinal_mean\t"
                              "rl_elite_pct\trl_selected_pct\trl_discarded_pct");
    std::vector<double> final_bests;
    for (int rep = 0; rep < cfg.seeds; ++rep) {
        EngineConfig engine_cfg = cfg.engine;
        engine_cfg.master_seed = cfg.engine.master_seed + static_cast<std::uint64_t>(rep);
        EvolutionEngine engine(engine_cfg, cfg.env_id);
        auto stream = open_table(dir / ("generations_seed" + std::to_string(rep) + ".tsv"),
                                 report_header());
        std::vector<GenerationReport> reports;
        while (!engine.done()) {
            reports.push_back(engine.run_generation());
            stream << format_report(reports.back()) << "\n";
        }
        if (reports.empty()) {
            std::cout << "seed " << rep << ": zero-frame budget, config echo only\n";
            continue;
        }
        const GenerationReport& last = reports.back();
        final_bests.push_back(last.best_fitness);

        // Champion checkpoint: re-evaluate the final population so the saved
        // network is the best current member, not a stale slot.
        std::vector<Agent> snapshot = evaluated_population_snapshot(
            engine, cfg.env_id, cfg.engine.trials,
            derive_seed(engine_cfg.master_seed, {0xbe57u}));
        const auto best = std::max_element(
            snapshot.begin(), snapshot.end(),
            [](const Agent& a, const Agent& b) { return a.fitness < b.fitness; });
        save_network((dir / ("champion_seed" + std::to_string(rep) + ".net")).string(),
                     best->spec, best->params);
        engine.rl_agent().save((dir / ("rl_seed" + std::to_string(rep) + ".agent")).string());

        const RlSelectionRates rates = track_rl_status(reports);
        summary << rep << '\t' << engine_cfg.master_seed << '\t' << reports.size() << '\t'
                << last.frames << '\t' << fmt_double(last.best_fitness) << '\t'
                << fmt_double(last.mean_fitness) << '\t' << fmt_double(rates.elite_pct) << '\t'
                << fmt_double(rates.selected_pct) << '\t' << fmt_double(rates.discarded_pct)
                << "\n";
        std::cout << "seed " << rep << ": " << reports.size() << " generations, "
                  << last.frames << " frames, best fitness " << last.best_fitness << "\n";
    }
    const Stats stats = summarize(final_bests);
    summary << "# aggregate final_best mean=" << fmt_double(stats.mean)
            << " std=" << fmt_double(stats.stddev) << " median=" << fmt_double(stats.median)
            << "\n";
    std::cout << "final best fitness over " << final_bests.size()
              << " seed(s): mean=" << stats.mean << " std=" << stats.stddev
              << " median=" << stats.median << "\n";
    return 0;
}

int cmd_crossover_bench(const RunConfig& cfg, int pool_size, int children_per_pair) {
    cfg.engine.validate();
    if (pool_size < 2) {
        throw std::invalid_argument("crossover bench needs a pool of at least two runs");
    }
    const fs::path dir = prepare_out_dir(cfg);

    // Champions of independently seeded runs; their hidden representations
    // are unrelated, which is exactly the regime where row mixing hurts.
    std::vector<Agent> champions;
    std::vector<EvolutionEngine> engines;
    engines.reserve(static_cast<std::size_t>(pool_size));
    for (int run = 0; run < pool_size; ++run) {
        EngineConfig engine_cfg = cfg.engine;
        engine_cfg.master_seed = cfg.engine.master_seed + static_cast<std::uint64_t>(run);
        engines.emplace_back(engine_cfg, cfg.env_id);
        engines.back().run();
        std::vector<Agent> snapshot = evaluated_population_snapshot(
            engines.back(), cfg.env_id, cfg.engine.trials,
            derive_seed(engine_cfg.master_seed, {0xbe57u}));
        champions.push_back(*std::max_element(
            snapshot.begin(), snapshot.end(),
            [](const Agent& a, const Agent& b) { return a.fitness < b.fitness; }));
        std::cout << "pool run " << run << ": champion fitness "
                  << champions.back().fitness << "\n";
    }

    auto table = open_table(dir / "crossover_bench.tsv",
                            "pair\top\tchild\tparent_best\tparent_other\tchild_fitness\t"
                            "ratio_to_best_parent");
    const auto emit_children = [&](int pair_id, const std::string& op, const Agent& px,
                                   const Agent& py, const RlAgent& critic) {
        const double best_parent = std::max(px.fitness, py.fitness);
        const double other_parent = std::min(px.fitness, py.fitness);
        std::vector<OffspringRow> rows;
        for (int c = 0; c < children_per_pair; ++c) {
            Rng rng = make_rng(derive_seed(cfg.engine.master_seed,
                                           {0xc055u, static_cast<std::uint64_t>(pair_id),
                                            static_cast<std::uint64_t>(c),
                                            op == "distillation" ? 1u : 2u}));
            Agent child = op == "distillation"
                              ? distillation_crossover(px, py, critic, cfg.engine.crossover,
                                                       cfg.engine.kappa, rng)
                              : npoint_crossover(px, py, cfg.engine.kappa, rng);
            evaluate_agent(child, cfg.env_id, cfg.engine.trials,
                           derive_seed(cfg.engine.master_seed,
                                       {0xe7a1u, static_cast<std::uint64_t>(pair_id),
                                        static_cast<std::uint64_t>(c),
                                        op == "distillation" ? 1u : 2u}));
            rows.push_back(OffspringRow{op, child.fitness, 0.0});
        }
        const OffspringReport report =
            normalized_offspring_fitness(best_parent, other_parent, rows);
        for (std::size_t c = 0; c < report.rows.size(); ++c) {
            table << pair_id << '\t' << op << '\t' << c << '\t' << fmt_double(best_parent)
                  << '\t' << fmt_double(other_parent) << '\t'
                  << fmt_double(report.rows[c].fitness) << '\t'
                  << fmt_double(report.rows[c].value) << "\n";
        }
    };

    // Identical-parents sanity pair first: the filter is irrelevant and the
    // distilled child should match the parent almost exactly.
    emit_children(-1, "distillation", champions[0], champions[0], engines[0].rl_agent());

    int pair_id = 0;
    for (int i = 0; i < pool_size; ++i) {
        for (int j = i + 1; j < pool_size; ++j, ++pair_id) {
            emit_children(pair_id, "distillation", champions[static_cast<std::size_t>(i)],
                          champions[static_cast<std::size_t>(j)],
                          engines[static_cast<std::size_t>(i)].rl_agent());
            emit_children(pair_id, "npoint", champions[static_cast<std::size_t>(i)],
                          champions[static_cast<std::size_t>(j)],
                          engines[static_cast<std::size_t>(i)].rl_agent());
        }
    }

    // Visitation densities for the first pair, for contour plots.
    {
        auto env = make_env(cfg.env_id);
        const Agent& px = champions[0];
        const Agent& py = champions[1];
        Rng rng = make_rng(derive_seed(cfg.engine.master_seed, {0xdeau}));
        Agent distill_child = distillation_crossover(px, py, engines[0].rl_agent(),
                                                     cfg.engine.crossover, cfg.engine.kappa, rng);
        Agent npoint_child = npoint_crossover(px, py, cfg.engine.kappa, rng);
        const auto sample = [&](const Agent& agent, std::uint64_t tag) {
            return collect_visitation(*env, network_policy(agent.spec, agent.params), 10,
                                      derive_seed(cfg.engine.master_seed, {0x5a11u, tag}));
        };
        const DensityModel dp = fit_kde(sample(px, 0));
        const DensityModel dq = fit_kde(sample(py, 1));
        const DensityModel dd = fit_kde(sample(distill_child, 2));
        const DensityModel dn = fit_kde(sample(npoint_child, 3));
        export_density_grid((dir / "density_parents.tsv").string(), dp, dq,
                            default_grid(dp, dq));
        export_density_grid((dir / "density_children.tsv").string(), dd, dn,
                            default_grid(dd, dn));
    }
    std::cout << "crossover bench written to " << dir << "\n";
    return 0;
}

int cmd_mutation_bench(const RunConfig& cfg) {
    cfg.engine.validate();
    const fs::path dir = prepare_out_dir(cfg);

    EvolutionEngine engine(cfg.engine, cfg.env_id);
    engine.run();
    std::vector<Agent> parents = evaluated_population_snapshot(
        engine, cfg.env_id, cfg.engine.trials, derive_seed(cfg.engine.master_seed, {0xbe57u}));

    auto table = open_table(dir / "mutation_bench.tsv",
                            "parent\top\tsigma\tparent_fitness\tchild_fitness\tretention\t"
                            "action_drift\tvisitation_kl");
    MutationConfig mut = cfg.engine.mutation;
    for (std::size_t i = 0; i < parents.size(); ++i) {
        const Agent& parent = parents[i];
        for (const bool use_proximal : {true, false}) {
            Rng rng = make_rng(derive_seed(
                cfg.engine.master_seed,
                {0x3117u, static_cast<std::uint64_t>(i), use_proximal ? 1u : 2u}));
            Agent child = use_proximal
                              ? proximal_mutation(parent, mut, rng)
                              : gaussian_mutation(parent, mut.sigma, cfg.engine.gaussian_fraction,
                                                  rng);
            evaluate_agent(child, cfg.env_id, cfg.engine.trials,
                           derive_seed(cfg.engine.master_seed,
                                       {0xe7a1u, static_cast<std::uint64_t>(i),
                                        use_proximal ? 1u : 2u}));
            const double retention =
                std::abs(parent.fitness) < 1e-6 ? child.fitness : child.fitness / parent.fitness;
            Rng drift_rng = make_rng(derive_seed(cfg.engine.master_seed,
                                                 {0xd217u, static_cast<std::uint64_t>(i)}));
            const double drift = mean_action_drift(parent, child, drift_rng, mut.batch_size);
            const double kl =
                visitation_kl(parent, child, cfg.env_id,
                              derive_seed(cfg.engine.master_seed,
                                          {0x0353u, static_cast<std::uint64_t>(i),
                                           use_proximal ? 1u : 2u}));
            table << i << '\t' << (use_proximal ? "proximal" : "gaussian") << '\t'
                  << fmt_double(mut.sigma) << '\t' << fmt_double(parent.fitness) << '\t'
                  << fmt_double(child.fitness) << '\t' << fmt_double(retention) << '\t'
                  << fmt_double(drift) << '\t' << fmt_double(kl) << "\n";
        }
    }

    // Magnitude sweep: proximal action drift as sigma grows, plus the exact
    // zero row (a zero-magnitude mutation is the identity).
    auto sweep = open_table(dir / "mutation_sweep.tsv", "sigma\tparent\taction_drift");
    const std::vector<double> sweep_sigmas{0.0, 0.01, 0.05, 0.1, 0.5};
    for (double sigma : sweep_sigmas) {
        for (std::size_t i = 0; i < parents.size(); ++i) {
            const Agent& parent = parents[i];
            double drift = 0.0;
            if (sigma > 0.0) {
                MutationConfig swept = mut;
                swept.sigma = sigma;
                Rng rng = make_rng(derive_seed(cfg.engine.master_seed,
                                               {0x53edu, static_cast<std::uint64_t>(i),
                                                static_cast<std::uint64_t>(sigma * 1000)}));
                const Agent child = proximal_mutation(parent, swept, rng);
                Rng drift_rng = make_rng(derive_seed(
                    cfg.engine.master_seed, {0xd217u, static_cast<std::uint64_t>(i)}));
                drift = mean_action_drift(parent, child, drift_rng, mut.batch_size);
            }
            sweep << fmt_double(sigma) << '\t' << i << '\t' << fmt_double(drift) << "\n";
        }
    }
    std::cout << "mutation bench written to " << dir << "\n";
    return 0;
}

int cmd_selection_compare(const RunConfig& cfg) {
    cfg.engine.validate();
    const fs::path dir = prepare_out_dir(cfg);
    auto table = open_table(dir / "selection_compare.tsv",
                            "selection\tseed\tgeneration\tframes\tbest_fitness\tmean_fitness");
    auto summary = open_table(dir / "selection_summary.tsv",
                              "selection\tseed\tearly_mean_best\tfinal_best");
    for (const SelectionMode mode : {SelectionMode::Greedy, SelectionMode::Distance}) {
        const std::string name = mode == SelectionMode::Greedy ? "greedy" : "distance";
        for (int rep = 0; rep < cfg.seeds; ++rep) {
            EngineConfig engine_cfg = cfg.engine;
            engine_cfg.selection = mode;
            engine_cfg.master_seed = cfg.engine.master_seed + static_cast<std::uint64_t>(rep);
            EvolutionEngine engine(engine_cfg, cfg.env_id);
            const std::vector<GenerationReport> reports = engine.run();
            std::vector<double> early;
            for (const GenerationReport& report : reports) {
                table << name << '\t' << rep << '\t' << report.generation << '\t'
                      << report.frames << '\t' << fmt_double(report.best_fitness) << '\t'
                      << fmt_double(report.mean_fitness) << "\n";
                if (report.frames <= cfg.engine.frame_budget / 3) {
                    early.push_back(report.best_fitness);
                }
            }
            const double early_mean =
                early.empty() ? 0.0
                              : std::accumulate(early.begin(), early.end(), 0.0) / early.size();
            summary << name << '\t' << rep << '\t' << fmt_double(early_mean) << '\t'
                    << fmt_double(reports.empty() ? 0.0 : reports.back().best_fitness) << "\n";
        }
    }
    std::cout << "selection comparison written to " << dir << "\n";
    return 0;
}

int cmd_export_plots(const RunConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    if (!fs::exists(dir)) {
        throw std::runtime_error("run directory '" + dir.string() + "' does not exist");
    }
    const fs::path plots = dir / "plots";
    fs::create_directories(plots);
    auto curve = open_table(plots / "learning_curve.tsv",
                            "seed\tgeneration\tframes\tbest_fitness\tmean_fitness");
    auto status = open_table(plots / "rl_status_rates.tsv",
                             "seed\tgeneration\telite_pct\tselected_pct\tdiscarded_pct");
    bool found_any = false;
    for (int rep = 0;; ++rep) {
        const fs::path stream_path = dir / ("generations_seed" + std::to_string(rep) + ".tsv");
        if (!fs::exists(stream_path)) {
            break;
        }
        found_any = true;
        std::ifstream in(stream_path);
        std::string line;
        std::getline(in, line);  // header
        std::vector<GenerationReport> reports;
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            reports.push_back(parse_report_line(line));
            const GenerationReport& report = reports.back();
            curve << rep << '\t' << report.generation << '\t' << report.frames << '\t'
                  << fmt_double(report.best_fitness) << '\t' << fmt_double(report.mean_fitness)
                  << "\n";
            const RlSelectionRates rates = track_rl_status(reports);
            status << rep << '\t' << report.generation << '\t' << fmt_double(rates.elite_pct)
                   << '\t' << fmt_double(rates.selected_pct) << '\t'
                   << fmt_double(rates.discarded_pct) << "\n";
        }
    }
    if (!found_any) {
        throw std::runtime_error("no generations_seed*.tsv streams found in '" + dir.string() +
                                 "'");
    }
    std::cout << "plot data written to " << plots << "\n";
    return 0;
}

}  // namespace pderl
