#include "pderl/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pderl {
namespace {

// Clamps into [-1, 1]^n and reports whether anything moved.
bool clamp_action(Vector& action, int expected_dim) {
    if (action.size() != expected_dim) {
        throw std::invalid_argument("step: action has " + std::to_string(action.size()) +
                                    " entries, environment expects " +
                                    std::to_string(expected_dim));
    }
    bool clamped = false;
    for (Eigen::Index i = 0; i < action.size(); ++i) {
        if (action[i] < -1.0 || action[i] > 1.0) {
            action[i] = std::clamp(action[i], -1.0, 1.0);
            clamped = true;
        }
    }
    return clamped;
}

void require_active(bool active, int steps_taken, int max_steps) {
    if (!active) {
        throw std::logic_error(steps_taken >= max_steps
                                   ? "step: episode already finished; reset first"
                                   : "step: reset must be called before step");
    }
}

}  // namespace

EnvId parse_env_id(const std::string& name) {
    if (name == "point_mass_2d") return EnvId::PointMass2d;
    if (name == "pendulum_swing_up") return EnvId::PendulumSwingUp;
    throw std::invalid_argument("unknown environment '" + name +
                                "' (expected point_mass_2d or pendulum_swing_up)");
}

std::string to_string(EnvId id) {
    return id == EnvId::PointMass2d ? "point_mass_2d" : "pendulum_swing_up";
}

std::unique_ptr<Environment> make_env(EnvId id) {
    if (id == EnvId::PointMass2d) return std::make_unique<PointMass2d>();
    return std::make_unique<PendulumSwingUp>();
}

Vector PointMass2d::observe() const {
    Vector state(4);
    state << position_.x(), position_.y(), goal_.x() - position_.x(),
        goal_.y() - position_.y();
    return state;
}

Vector PointMass2d::reset(std::uint64_t seed) {
    Rng rng = make_rng(derive_seed(seed, {static_cast<std::uint64_t>(EnvId::PointMass2d)}));
    position_.x() = uniform_real(rng, -kSpawnBound, kSpawnBound);
    position_.y() = uniform_real(rng, -kSpawnBound, kSpawnBound);
    goal_.x() = uniform_real(rng, -kSpawnBound, kSpawnBound);
    goal_.y() = uniform_real(rng, -kSpawnBound, kSpawnBound);
    steps_taken_ = 0;
    active_ = true;
    return observe();
}

StepResult PointMass2d::step(const Vector& action) {
    require_active(active_, steps_taken_, spec_.max_episode_steps);
    Vector a = action;
    StepResult result;
    result.action_clamped = clamp_action(a, spec_.action_dim);
    position_ += kDt * Eigen::Vector2d(a[0], a[1]);
    position_ = position_.cwiseMax(-kPositionBound).cwiseMin(kPositionBound);
    ++steps_taken_;
    result.reward = 1.0 - (position_ - goal_).norm() / kMaxDistance;
    result.done = steps_taken_ >= spec_.max_episode_steps;
    result.next_state = observe();
    active_ = !result.done;
    return result;
}

std::unique_ptr<Environment> PointMass2d::clone_fresh() const {
    return std::make_unique<PointMass2d>();
}

Vector PendulumSwingUp::observe() const {
    Vector state(3);
    state << std::cos(theta_), std::sin(theta_), theta_dot_;
    return state;
}

Vector PendulumSwingUp::reset(std::uint64_t seed) {
    Rng rng =
        make_rng(derive_seed(seed, {static_cast<std::uint64_t>(EnvId::PendulumSwingUp)}));
    theta_ = uniform_real(rng, -M_PI, M_PI);
    theta_dot_ = uniform_real(rng, -1.0, 1.0);
    steps_taken_ = 0;
    active_ = true;
    return observe();
}

Vector PendulumSwingUp::reset_to(double theta, double theta_dot) {
    theta_ = theta;
    theta_dot_ = theta_dot;
    steps_taken_ = 0;
    active_ = true;
    return observe();
}

StepResult PendulumSwingUp::step(const Vector& action) {
    require_active(active_, steps_taken_, spec_.max_episode_steps);
    Vector a = action;
    StepResult result;
    result.action_clamped = clamp_action(a, spec_.action_dim);
    const double torque = kTorqueLimit * a[0];
    const double accel = 3.0 * kGravity / (2.0 * kLength) * std::sin(theta_) +
                         3.0 * torque / (kMass * kLength * kLength);
    theta_dot_ = std::clamp(theta_dot_ + accel * kDt, -kSpeedLimit, kSpeedLimit);
    theta_ += theta_dot_ * kDt;
    ++steps_taken_;
    result.reward = (1.0 + std::cos(theta_)) / 2.0;
    result.done = steps_taken_ >= spec_.max_episode_steps;
    result.next_state = observe();
    active_ = !result.done;
    return result;
}

std::unique_ptr<Environment> PendulumSwingUp::clone_fresh() const {
    return std::make_unique<PendulumSwingUp>();
}

Policy network_policy(const NetworkSpec& spec, const Vector& params) {
    return [spec, params](const Vector& state) { return forward(spec, params, state); };
}

Vector scripted_point_mass_action(const Vector& state) {
    Vector action(2);
    action << std::clamp(20.0 * state[2], -1.0, 1.0), std::clamp(20.0 * state[3], -1.0, 1.0);
    return action;
}

EpisodeResult run_episode(Environment& env, const Policy& policy, std::uint64_t seed) {
    EpisodeResult result;
    Vector state = env.reset(seed);
    bool done = false;
    while (!done) {
        Vector action = policy(state);
        StepResult step = env.step(action);
        result.total_reward += step.reward;
        result.transitions.push_back(
            Transition{state, std::move(action), step.reward, step.next_state, step.done});
        state = std::move(step.next_state);
        done = step.done;
        ++result.steps;
    }
    return result;
}

double evaluate_fitness(Environment& env, const Policy& policy, int trials,
                        std::uint64_t eval_seed, GeneticMemory* genetic_memory,
                        SharedReplayBuffer* shared_buffer, long* frame_counter) {
    if (trials < 1) {
        throw std::invalid_argument("evaluate_fitness: trial count must be >= 1");
    }
    double total = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        EpisodeResult episode =
            run_episode(env, policy, derive_seed(eval_seed, {static_cast<std::uint64_t>(trial)}));
        total += episode.total_reward;
        if (frame_counter != nullptr) {
            *frame_counter += episode.steps;
        }
        for (auto& transition : episode.transitions) {
            if (genetic_memory != nullptr) {
                genetic_memory->push(transition);
            }
            if (shared_buffer != nullptr) {
                shared_buffer->push(std::move(transition));
            }
        }
    }
    return total / trials;
}

}  // namespace pderl
