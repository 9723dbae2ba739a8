#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pderl/env.hpp"
#include "pderl/operators.hpp"
#include "pderl/rl_agent.hpp"

namespace pderl {

/// Which pair of variation operators the population uses. The baseline mode
/// reproduces the classic loop (n-point crossover + Gaussian mutation); the
/// other modes swap in the learning-based operators one at a time or both.
enum class Mode { ErlBaseline, Perl, Derl, Pderl };

Mode parse_mode(const std::string& name);
std::string to_string(Mode mode);

enum class RlStatus { NotSynced, Elite, Selected, Discarded };
std::string to_string(RlStatus status);

struct SlotAudit {
    int slot = -1;
    std::string origin;  // "elite", "crossover", or "rl_clone"
    int parent_a = -1;
    int parent_b = -1;
    bool mutated = false;
};

struct GenerationReport {
    int generation = 0;  // 1-based
    std::vector<double> fitness;  // per slot, evaluated this generation
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    long frames = 0;  // cumulative environment frames after this generation
    RlStatus rl_status = RlStatus::NotSynced;  // fate of the clone injected last sync
    double critic_loss = 0.0;  // from the final RL train step this generation
    int rl_slot = -1;          // slot now holding a fresh RL clone, -1 if none
    std::vector<SlotAudit> audits;
    bool evaluation_only = false;  // frame budget ran out after the eval phase
};

// Fixed column order used by the generation record stream; identical runs
// must produce byte-identical lines.
std::string report_header();
std::string format_report(const GenerationReport& report);
GenerationReport parse_report_line(const std::string& line);

struct EngineConfig {
    int population_size = 10;     // k
    double elite_fraction = 0.2;  // psi
    int trials = 1;               // xi, fitness evaluations per agent
    int sync_period = 1;          // omega, generations between RL clonings
    double mutation_probability = 0.9;
    Mode mode = Mode::Pderl;
    SelectionMode selection = SelectionMode::Greedy;
    long frame_budget = 100000;
    std::uint64_t master_seed = 0;
    std::size_t kappa = 8000;  // genetic memory capacity
    std::vector<int> hidden_dims = {64, 64};
    double gaussian_fraction = 0.1;  // weight fraction touched by the baseline mutation
    CrossoverConfig crossover;
    MutationConfig mutation;
    RlConfig rl;

    void validate() const;  // throws std::invalid_argument naming the field
};

// Top ceil(psi * k) indices by fitness (ties -> lower index first), followed
// by the remaining indices; both halves ordered best-to-worst.
std::pair<std::vector<int>, std::vector<int>> rank_and_elites(const std::vector<double>& fitnesses,
                                                              double psi, int k);

struct RlSelectionRates {
    int synced_generations = 0;
    double elite_pct = 0.0;
    double selected_pct = 0.0;
    double discarded_pct = 0.0;
};

// Cumulative fate percentages of the RL clone across a report stream; the
// three percentages sum to 100 whenever synced_generations > 0.
RlSelectionRates track_rl_status(const std::vector<GenerationReport>& reports);

/// The full generation loop: evaluate, keep elites, cross selected parents,
/// mutate, train the RL agent on the shared buffer, and periodically clone
/// its actor into the weakest slot.
class EvolutionEngine {
   public:
    EvolutionEngine(const EngineConfig& cfg, EnvId env_id);

    bool done() const { return frames_ >= cfg_.frame_budget; }
    GenerationReport run_generation();
    std::vector<GenerationReport> run();  // until the frame budget is spent

    const std::vector<Agent>& population() const { return population_; }
    const RlAgent& rl_agent() const { return rl_; }
    RlAgent& rl_agent() { return rl_; }
    const EngineConfig& config() const { return cfg_; }
    long frames() const { return frames_; }
    int generations_run() const { return generation_; }

    // Index of the best evaluated agent in the most recent generation.
    int champion_slot() const;

   private:
    void evaluate_population(int generation);

    EngineConfig cfg_;
    std::unique_ptr<Environment> env_;
    std::vector<Agent> population_;
    RlAgent rl_;
    SharedReplayBuffer shared_buffer_;
    long frames_ = 0;
    int generation_ = 0;
    int pending_rl_slot_ = -1;  // clone injected last sync, fate not yet known
    std::vector<double> last_fitness_;
};

}  // namespace pderl
