#pragma once

#include <string>

#include "pderl/adam.hpp"
#include "pderl/memory.hpp"
#include "pderl/net.hpp"
#include "pderl/rng.hpp"

namespace pderl {

struct RlConfig {
    double actor_lr = 5e-5;
    double critic_lr = 5e-4;
    double discount = 0.99;   // gamma
    double tau = 0.001;       // target-network blend weight
    int batch_size = 128;
    double exploration_noise = 0.1;
    std::size_t personal_memory_capacity = 8000;  // kappa for the agent's own store
};

struct TrainDiagnostics {
    bool trained = false;  // false when the buffer was too small
    double critic_loss = 0.0;
    double mean_q = 0.0;
};

/// Off-policy deterministic actor-critic. The critic scores (state, action)
/// pairs through their concatenation; the actor ascends the critic's value.
class RlAgent {
   public:
    RlAgent(const NetworkSpec& actor_spec, const NetworkSpec& critic_spec, const RlConfig& cfg,
            Rng& init_rng);

    // One gradient step on a uniformly sampled batch plus soft target updates.
    // Returns trained=false without touching any state when the buffer holds
    // fewer than batch_size transitions.
    TrainDiagnostics train_step(const SharedReplayBuffer& buffer, Rng& rng);

    double q_value(const Vector& state, const Vector& action) const;
    Matrix q_values(const Matrix& states, const Matrix& actions) const;

    Vector action(const Vector& state) const;
    Vector exploration_action(const Vector& state, double noise_scale, Rng& rng) const;

    const NetworkSpec& actor_spec() const { return actor_spec_; }
    const NetworkSpec& critic_spec() const { return critic_spec_; }
    const Vector& actor_params() const { return actor_; }
    const Vector& critic_params() const { return critic_; }
    const Vector& actor_target_params() const { return actor_target_; }
    const Vector& critic_target_params() const { return critic_target_; }
    const RlConfig& config() const { return cfg_; }

    // Personal recent-experience store fed by the agent's own rollouts and
    // handed to population clones at synchronization time.
    GeneticMemory& personal_memory() { return personal_memory_; }
    const GeneticMemory& personal_memory() const { return personal_memory_; }

    void save(const std::string& path) const;
    void load(const std::string& path);

    // Test hook: overwrite weights to probe q_value / train_step math.
    void set_critic_params(const Vector& params);
    void set_actor_params(const Vector& params);

   private:
    Matrix concat_inputs(const Matrix& states, const Matrix& actions) const;

    NetworkSpec actor_spec_;
    NetworkSpec critic_spec_;
    RlConfig cfg_;
    Vector actor_;
    Vector actor_target_;
    Vector critic_;
    Vector critic_target_;
    AdamState actor_opt_;
    AdamState critic_opt_;
    GeneticMemory personal_memory_;
};

}  // namespace pderl
