#pragma once

#include <vector>

#include <Eigen/Dense>

#include "pderl/rng.hpp"

namespace pderl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Activation { Tanh, Linear };

/// Shape of a fully-connected network. Hidden layers always use tanh;
/// the output layer uses `output_activation` (tanh for policies so actions
/// stay in (-1, 1), linear for scalar critics).
struct NetworkSpec {
    int input_dim = 0;
    std::vector<int> hidden_dims;
    int output_dim = 0;
    Activation output_activation = Activation::Tanh;

    int layer_count() const { return static_cast<int>(hidden_dims.size()) + 1; }
    int layer_in(int layer) const;
    int layer_out(int layer) const;
    // Offset of layer `layer`'s weight block in the flat parameter vector;
    // the bias block immediately follows the weights.
    int weight_offset(int layer) const;
    int bias_offset(int layer) const;
    int param_count() const;

    void validate() const;  // throws std::invalid_argument on bad dims

    bool operator==(const NetworkSpec&) const = default;
};

NetworkSpec policy_spec(int state_dim, int action_dim, const std::vector<int>& hidden);
NetworkSpec critic_spec(int state_dim, int action_dim, const std::vector<int>& hidden);

// Canonical flat parameter vector: per layer, weights in column-major order
// followed by the bias. The ordering is fixed so parameter vectors are
// interchangeable across all agents sharing a spec.
Vector init_params(const NetworkSpec& spec, Rng& rng);

// Batched forward pass; inputs and outputs hold one sample per column.
Matrix forward(const NetworkSpec& spec, const Vector& params, const Matrix& inputs);
Vector forward(const NetworkSpec& spec, const Vector& params, const Vector& input);

struct BackwardResult {
    Vector param_grad;  // aligned with the flat parameter vector
    Matrix input_grad;  // input_dim x batch
};

// Exact gradients of sum_i upstream_i . output_i with respect to every
// parameter (and, for chaining, with respect to the inputs). `upstream`
// is output_dim x batch.
BackwardResult backward(const NetworkSpec& spec, const Vector& params, const Matrix& inputs,
                        const Matrix& upstream);

// Row k holds the gradient of sum_i output(s_i)_k over the whole batch,
// aligned with the flat parameter vector.
Matrix per_output_param_gradients(const NetworkSpec& spec, const Vector& params,
                                  const Matrix& states);

}  // namespace pderl
