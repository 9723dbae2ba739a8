#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pderl/memory.hpp"
#include "pderl/net.hpp"
#include "pderl/rl_agent.hpp"
#include "pderl/rng.hpp"

namespace pderl {

/// One population member: a directly-encoded policy, its personal experience
/// store, and a cached fitness that operators mark stale.
struct Agent {
    NetworkSpec spec;
    Vector params;
    GeneticMemory memory;
    double fitness = 0.0;
    bool fitness_fresh = false;
};

Agent make_agent(const NetworkSpec& spec, std::size_t kappa, Rng& rng);

// Fixture round trip: <prefix>.net (network checkpoint) + <prefix>.mem
// (memory dump). Cached fitness is not persisted; loaded agents are stale.
void save_agent(const std::string& prefix, const Agent& agent);
Agent load_agent(const std::string& prefix);

struct CrossoverConfig {
    int batch_size = 128;     // N_C
    int epochs = 12;
    double learning_rate = 1e-3;
    double reg_weight = 1.0;  // scales the (1/N_C)·sum ||mu_z||^2 term
};

struct MutationConfig {
    double sigma = 0.1;   // perturbation scale (standard deviation)
    int batch_size = 256;  // N_M
    // Weights whose batch-summed action gradient falls below this floor
    // (saturated or dead units) divide by the floor instead of ~0, so they
    // receive plain sigma-scale noise rather than an unbounded amplification
    // of exactly the directions the batch could not see.
    double sensitivity_floor = 1.0;
};

struct QFilterResult {
    double loss = 0.0;
    Matrix child_upstream;        // dL/d(child action), action_dim x batch
    std::vector<bool> imitate_x;  // per-sample filter outcome (ties go to x)
};

// Three-term imitation loss: per state, squared distance to whichever
// parent's action the critic scores higher, plus reg_weight/batch times the
// child action's squared norm.
QFilterResult qfilter_loss(const Matrix& child_actions, const Matrix& x_actions,
                           const Matrix& y_actions, const Eigen::RowVectorXd& qx,
                           const Eigen::RowVectorXd& qy, double reg_weight);

// Trains a fresh child to imitate, state by state, the parent action the
// critic prefers. Child weights start as a uniformly-chosen parent's; child
// memory is the shuffled union of both parents' newest kappa/2 entries.
Agent distillation_crossover(const Agent& parent_x, const Agent& parent_y,
                             const RlAgent& critic, const CrossoverConfig& cfg,
                             std::size_t kappa, Rng& rng);

// Eq.-style per-weight sensitivity: s_j = sqrt(sum_k (sum_i d mu(s_i)_k / d
// theta_j)^2) over the state batch.
Vector action_sensitivity(const NetworkSpec& spec, const Vector& params, const Matrix& states);

// Gaussian perturbation scaled down per weight by the policy's output
// sensitivity, so behavior stays near the parent's.
Agent proximal_mutation(const Agent& parent, const MutationConfig& cfg, Rng& rng);

// Baseline crossover: each row of each layer matrix (bias riding along) is
// taken wholesale from one parent. `row_from_x` holds one flag per row,
// layer-major; the Rng overload draws a fair coin per row.
Agent npoint_crossover(const Agent& parent_x, const Agent& parent_y, std::size_t kappa,
                       const std::vector<bool>& row_from_x, Rng& shuffle_rng);
Agent npoint_crossover(const Agent& parent_x, const Agent& parent_y, std::size_t kappa,
                       Rng& rng);
int total_rows(const NetworkSpec& spec);

// Baseline mutation: additive N(0, sigma) noise on ceil(fraction * |theta|)
// uniformly-chosen weights; everything else is untouched.
Agent gaussian_mutation(const Agent& parent, double sigma, double fraction, Rng& rng);

// Pair score m = f(x) + f(y); requires fresh fitness on both agents.
double mating_score_greedy(const Agent& x, const Agent& y);

// Monte-Carlo behavioral distance: mean squared action gap over sample_size
// states from each parent's memory. Seeds are tied to the memories, so
// swapping the argument order returns the identical value.
double mating_score_distance(const Agent& x, const Agent& y, int sample_size,
                             std::uint64_t seed_x_memory, std::uint64_t seed_y_memory);

enum class SelectionMode { Greedy, Distance };

// n_pairs index pairs drawn proportionally to pair score; pairs stay distinct
// until the candidate pool is exhausted, then the pool is re-drawn.
std::vector<std::pair<int, int>> select_parents(const std::vector<Agent>& population,
                                                SelectionMode mode, int n_pairs,
                                                std::uint64_t seed, int distance_sample_size = 64);

}  // namespace pderl
