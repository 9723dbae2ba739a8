#include "pderl/memory.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace pderl {

TransitionRing::TransitionRing(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) {
        throw std::invalid_argument("transition ring capacity must be positive");
    }
}

void TransitionRing::push(Transition transition) {
    if (entries_.size() == capacity_) {
        entries_.pop_front();
    }
    entries_.push_back(std::move(transition));
    ++insertion_count_;
}

Matrix TransitionRing::sample_states(Rng& rng, int n) const {
    if (entries_.empty()) {
        throw std::logic_error("sample_states: memory is empty");
    }
    if (n <= 0) {
        throw std::invalid_argument("sample_states: batch size must be positive");
    }
    std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
    Matrix states(entries_.front().state.size(), n);
    for (int i = 0; i < n; ++i) {
        states.col(i) = entries_[pick(rng)].state;
    }
    return states;
}

std::vector<Transition> TransitionRing::sample_transitions(Rng& rng, int n) const {
    if (entries_.empty()) {
        throw std::logic_error("sample_transitions: memory is empty");
    }
    if (n <= 0) {
        throw std::invalid_argument("sample_transitions: batch size must be positive");
    }
    std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
    std::vector<Transition> batch;
    batch.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        batch.push_back(entries_[pick(rng)]);
    }
    return batch;
}

void TransitionRing::sample_batch(Rng& rng, int n, Matrix& states, Matrix& actions,
                                  Eigen::RowVectorXd& rewards, Matrix& next_states,
                                  Eigen::RowVectorXd& not_done) const {
    if (entries_.empty()) {
        throw std::logic_error("sample_batch: memory is empty");
    }
    if (n <= 0) {
        throw std::invalid_argument("sample_batch: batch size must be positive");
    }
    const Eigen::Index state_dim = entries_.front().state.size();
    const Eigen::Index action_dim = entries_.front().action.size();
    states.resize(state_dim, n);
    actions.resize(action_dim, n);
    next_states.resize(state_dim, n);
    rewards.resize(n);
    not_done.resize(n);
    std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
    for (int i = 0; i < n; ++i) {
        const Transition& t = entries_[pick(rng)];
        states.col(i) = t.state;
        actions.col(i) = t.action;
        next_states.col(i) = t.next_state;
        rewards[i] = t.reward;
        not_done[i] = t.done ? 0.0 : 1.0;
    }
}

GeneticMemory inherit_full(const GeneticMemory& parent) {
    GeneticMemory child(parent.capacity());
    for (std::size_t i = 0; i < parent.size(); ++i) {
        child.push(parent[i]);
    }
    return child;
}

GeneticMemory inherit_crossover(const GeneticMemory& memory_x, const GeneticMemory& memory_y,
                                std::size_t kappa, Rng& rng) {
    if (kappa == 0) {
        throw std::invalid_argument("inherit_crossover: kappa must be positive");
    }
    const std::size_t half = kappa / 2;
    std::vector<Transition> pool;
    pool.reserve(2 * half);
    const auto take_newest = [&pool, half](const GeneticMemory& memory) {
        const std::size_t take = std::min(memory.size(), half);
        for (std::size_t i = memory.size() - take; i < memory.size(); ++i) {
            pool.push_back(memory[i]);
        }
    };
    take_newest(memory_x);
    take_newest(memory_y);
    std::shuffle(pool.begin(), pool.end(), rng);
    GeneticMemory child(kappa);
    for (auto& transition : pool) {
        child.push(std::move(transition));
    }
    return child;
}

}  // namespace pderl
