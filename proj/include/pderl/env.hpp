#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pderl/memory.hpp"
#include "pderl/net.hpp"
#include "pderl/rng.hpp"

namespace pderl {

enum class EnvId { PointMass2d, PendulumSwingUp };

EnvId parse_env_id(const std::string& name);
std::string to_string(EnvId id);

struct EnvSpec {
    int state_dim = 0;
    int action_dim = 0;
    int max_episode_steps = 0;
    EnvId env_id = EnvId::PointMass2d;
};

struct StepResult {
    Vector next_state;
    double reward = 0.0;
    bool done = false;
    bool action_clamped = false;  // the given action fell outside [-1, 1]
};

/// Deterministic, seedable episodic environment. Actions live in
/// [-1, 1]^action_dim; out-of-range components are clamped and flagged.
class Environment {
   public:
    virtual ~Environment() = default;
    virtual const EnvSpec& spec() const = 0;
    virtual Vector reset(std::uint64_t seed) = 0;
    // Throws std::logic_error when called after the episode finished or
    // before the first reset.
    virtual StepResult step(const Vector& action) = 0;
    virtual std::unique_ptr<Environment> clone_fresh() const = 0;
};

std::unique_ptr<Environment> make_env(EnvId id);

/// Planar point mass driven by a velocity command toward a fixed goal.
/// Positions are clamped to [-position_bound, position_bound]^2 and the
/// per-step reward is 1 - distance_to_goal / max_distance, so an episode's
/// return lies in [0, max_episode_steps] and higher is closer.
class PointMass2d final : public Environment {
   public:
    static constexpr double kDt = 0.05;
    static constexpr double kPositionBound = 1.5;
    static constexpr double kSpawnBound = 1.0;
    static constexpr int kEpisodeSteps = 100;
    // Largest attainable distance between a clamped position and a goal.
    static constexpr double kMaxDistance = 3.5355339059327378;  // 2.5 * sqrt(2)

    const EnvSpec& spec() const override { return spec_; }
    Vector reset(std::uint64_t seed) override;
    StepResult step(const Vector& action) override;
    std::unique_ptr<Environment> clone_fresh() const override;

   private:
    Vector observe() const;

    EnvSpec spec_{4, 2, kEpisodeSteps, EnvId::PointMass2d};
    Eigen::Vector2d position_ = Eigen::Vector2d::Zero();
    Eigen::Vector2d goal_ = Eigen::Vector2d::Zero();
    int steps_taken_ = 0;
    bool active_ = false;
};

/// Torque-limited pendulum that must swing up against gravity. The angle is
/// measured from upright; theta = pi is the hanging (stable) equilibrium.
/// Declared dynamics, integrated by explicit Euler with the velocity update
/// applied first:
///   theta_dot' = clamp(theta_dot + (3g/(2l))·sin(theta)·dt + 3u/(m l²)·dt, ±8)
///   theta'     = theta + theta_dot'·dt,   u = torque_limit · action
/// Per-step reward is (1 + cos(theta')) / 2, in [0, 1].
class PendulumSwingUp final : public Environment {
   public:
    static constexpr double kDt = 0.05;
    static constexpr double kGravity = 10.0;
    static constexpr double kMass = 1.0;
    static constexpr double kLength = 1.0;
    static constexpr double kTorqueLimit = 2.0;
    static constexpr double kSpeedLimit = 8.0;
    static constexpr int kEpisodeSteps = 200;

    const EnvSpec& spec() const override { return spec_; }
    Vector reset(std::uint64_t seed) override;
    StepResult step(const Vector& action) override;
    std::unique_ptr<Environment> clone_fresh() const override;

    // Start from an exact (theta, theta_dot) phase point; used by tests.
    Vector reset_to(double theta, double theta_dot);

   private:
    Vector observe() const;

    EnvSpec spec_{3, 1, kEpisodeSteps, EnvId::PendulumSwingUp};
    double theta_ = 0.0;
    double theta_dot_ = 0.0;
    int steps_taken_ = 0;
    bool active_ = false;
};

struct EpisodeResult {
    double total_reward = 0.0;
    std::vector<Transition> transitions;
    int steps = 0;
};

using Policy = std::function<Vector(const Vector& state)>;

Policy network_policy(const NetworkSpec& spec, const Vector& params);

// Drives straight at the goal at full speed; near-optimal on PointMass2d.
Vector scripted_point_mass_action(const Vector& state);

EpisodeResult run_episode(Environment& env, const Policy& policy, std::uint64_t seed);

// Mean return over `trials` episodes seeded derive_seed(eval_seed, {trial}).
// Every transition is appended to `genetic_memory` and `shared_buffer` when
// those are non-null.
double evaluate_fitness(Environment& env, const Policy& policy, int trials,
                        std::uint64_t eval_seed, GeneticMemory* genetic_memory = nullptr,
                        SharedReplayBuffer* shared_buffer = nullptr,
                        long* frame_counter = nullptr);

}  // namespace pderl
