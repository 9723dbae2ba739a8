#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "pderl/net.hpp"
#include "pderl/rng.hpp"

namespace pderl {

struct Transition {
    Vector state;
    Vector action;
    double reward = 0.0;
    Vector next_state;
    bool done = false;
};

/// Bounded ring of transitions in insertion order; the oldest entry is
/// evicted first once `capacity()` is reached.
class TransitionRing {
   public:
    explicit TransitionRing(std::size_t capacity);

    void push(Transition transition);
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }
    // Total number of pushes ever, including evicted ones.
    std::size_t insertion_count() const { return insertion_count_; }
    const Transition& operator[](std::size_t i) const { return entries_[i]; }

    // n states drawn uniformly with replacement; throws on empty storage.
    Matrix sample_states(Rng& rng, int n) const;
    std::vector<Transition> sample_transitions(Rng& rng, int n) const;

    // Uniform batch assembled straight into column-per-sample matrices;
    // draws the same entries as sample_transitions would for the same rng.
    void sample_batch(Rng& rng, int n, Matrix& states, Matrix& actions,
                      Eigen::RowVectorXd& rewards, Matrix& next_states,
                      Eigen::RowVectorXd& not_done) const;

   private:
    std::size_t capacity_;
    std::size_t insertion_count_ = 0;
    std::deque<Transition> entries_;
};

/// Per-agent experience store with the inheritance semantics used by the
/// variation operators.
class GeneticMemory : public TransitionRing {
   public:
    explicit GeneticMemory(std::size_t capacity = 8000) : TransitionRing(capacity) {}
};

class SharedReplayBuffer : public TransitionRing {
   public:
    explicit SharedReplayBuffer(std::size_t capacity = 1000000) : TransitionRing(capacity) {}
};

// Child receives an independent copy of the parent's retained entries.
GeneticMemory inherit_full(const GeneticMemory& parent);

// Child receives the newest min(|x|, kappa/2) entries of x plus the newest
// min(|y|, kappa/2) entries of y, shuffled with `rng`.
GeneticMemory inherit_crossover(const GeneticMemory& memory_x, const GeneticMemory& memory_y,
                                std::size_t kappa, Rng& rng);

}  // namespace pderl
