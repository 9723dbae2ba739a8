#include "pderl/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pderl {

void adam_step(Vector& params, const Vector& gradient, AdamState& state) {
    if (gradient.size() != params.size() || state.first_moment.size() != params.size() ||
        state.second_moment.size() != params.size()) {
        throw std::invalid_argument("adam_step: parameter, gradient and moment lengths differ");
    }
    if (!gradient.allFinite()) {
        throw std::runtime_error("adam_step: non-finite gradient");
    }
    ++state.step;
    state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * gradient;
    state.second_moment = state.beta2 * state.second_moment +
                          (1.0 - state.beta2) * gradient.array().square().matrix();
    const double bias1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    params.array() -= state.learning_rate * (state.first_moment.array() / bias1) /
                      ((state.second_moment.array() / bias2).sqrt() + state.epsilon);
}

void soft_update(Vector& target, const Vector& source, double tau) {
    if (target.size() != source.size()) {
        throw std::invalid_argument("soft_update: length mismatch");
    }
    if (tau < 0.0 || tau > 1.0) {
        throw std::invalid_argument("soft_update: tau must lie in [0, 1], got " +
                                    std::to_string(tau));
    }
    target = (1.0 - tau) * target + tau * source;
}

}  // namespace pderl
