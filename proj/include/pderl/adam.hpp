#pragma once

#include "pderl/net.hpp"

namespace pderl {

struct AdamState {
    Vector first_moment;
    Vector second_moment;
    long step = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    explicit AdamState(Eigen::Index n = 0, double lr = 1e-3)
        : first_moment(Vector::Zero(n)), second_moment(Vector::Zero(n)), learning_rate(lr) {}
};

// One adaptive-moment descent step in place; throws on non-finite gradients
// or misaligned lengths.
void adam_step(Vector& params, const Vector& gradient, AdamState& state);

// target <- (1 - tau) * target + tau * source. tau must be in [0, 1].
void soft_update(Vector& target, const Vector& source, double tau);

}  // namespace pderl
