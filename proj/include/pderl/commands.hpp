#pragma once

#include <string>
#include <vector>

#include "pderl/analysis.hpp"
#include "pderl/config.hpp"
#include "pderl/evolution.hpp"

namespace pderl {

// Re-evaluates a copy of the engine's final population with fresh trial
// seeds so benches and checkpoints see up-to-date fitness and memories.
std::vector<Agent> evaluated_population_snapshot(const EvolutionEngine& engine, EnvId env_id,
                                                 int trials, std::uint64_t seed);

// Runs the evolution loop for every seeded repetition; writes the config
// echo, per-seed generation streams, champion checkpoints, and a summary.
int cmd_train(const RunConfig& cfg);

// Trains a pool of runs, crosses every champion pair with both operators,
// and reports offspring fitness normalized by the better parent.
int cmd_crossover_bench(const RunConfig& cfg, int pool_size = 5, int children_per_pair = 3);

// Mutates each member of a trained population with both operators, reports
// fitness retention, behavioral drift, visitation KL, and a magnitude sweep.
int cmd_mutation_bench(const RunConfig& cfg);

// Paired greedy-vs-distance runs on identical seeds with early-phase summary.
int cmd_selection_compare(const RunConfig& cfg);

// Distills per-seed generation streams in an existing run directory into
// plot-friendly learning-curve and RL-status tables.
int cmd_export_plots(const RunConfig& cfg);

}  // namespace pderl
