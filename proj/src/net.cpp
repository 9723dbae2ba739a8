#include "pderl/net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pderl {
namespace {

using ConstWeightMap = Eigen::Map<const Matrix>;
using WeightMap = Eigen::Map<Matrix>;
using ConstBiasMap = Eigen::Map<const Vector>;

void check_params(const NetworkSpec& spec, const Vector& params) {
    if (params.size() != spec.param_count()) {
        throw std::invalid_argument("parameter vector has " + std::to_string(params.size()) +
                                    " entries, spec requires " +
                                    std::to_string(spec.param_count()));
    }
}

// Post-activation values of every layer; activations[0] is the input batch.
std::vector<Matrix> forward_cached(const NetworkSpec& spec, const Vector& params,
                                   const Matrix& inputs) {
    std::vector<Matrix> activations;
    activations.reserve(static_cast<std::size_t>(spec.layer_count()) + 1);
    activations.push_back(inputs);
    for (int layer = 0; layer < spec.layer_count(); ++layer) {
        const int in = spec.layer_in(layer);
        const int out = spec.layer_out(layer);
        ConstWeightMap weights(params.data() + spec.weight_offset(layer), out, in);
        ConstBiasMap bias(params.data() + spec.bias_offset(layer), out);
        Matrix pre = (weights * activations.back()).colwise() + bias;
        const bool last = layer == spec.layer_count() - 1;
        if (!last || spec.output_activation == Activation::Tanh) {
            pre = pre.array().tanh();
        }
        activations.push_back(std::move(pre));
    }
    return activations;
}

}  // namespace

int NetworkSpec::layer_in(int layer) const {
    return layer == 0 ? input_dim : hidden_dims[static_cast<std::size_t>(layer) - 1];
}

int NetworkSpec::layer_out(int layer) const {
    return layer == layer_count() - 1 ? output_dim
                                      : hidden_dims[static_cast<std::size_t>(layer)];
}

int NetworkSpec::weight_offset(int layer) const {
    int offset = 0;
    for (int l = 0; l < layer; ++l) {
        offset += layer_in(l) * layer_out(l) + layer_out(l);
    }
    return offset;
}

int NetworkSpec::bias_offset(int layer) const {
    return weight_offset(layer) + layer_in(layer) * layer_out(layer);
}

int NetworkSpec::param_count() const {
    return weight_offset(layer_count() - 1) +
           layer_in(layer_count() - 1) * layer_out(layer_count() - 1) +
           output_dim;
}

void NetworkSpec::validate() const {
    if (input_dim <= 0 || output_dim <= 0) {
        throw std::invalid_argument("network dims must be strictly positive");
    }
    for (int h : hidden_dims) {
        if (h <= 0) {
            throw std::invalid_argument("hidden layer widths must be strictly positive");
        }
    }
}

NetworkSpec policy_spec(int state_dim, int action_dim, const std::vector<int>& hidden) {
    NetworkSpec spec{state_dim, hidden, action_dim, Activation::Tanh};
    spec.validate();
    return spec;
}

NetworkSpec critic_spec(int state_dim, int action_dim, const std::vector<int>& hidden) {
    NetworkSpec spec{state_dim + action_dim, hidden, 1, Activation::Linear};
    spec.validate();
    return spec;
}

Vector init_params(const NetworkSpec& spec, Rng& rng) {
    spec.validate();
    Vector params(spec.param_count());
    for (int layer = 0; layer < spec.layer_count(); ++layer) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(spec.layer_in(layer)));
        const int begin = spec.weight_offset(layer);
        const int end = spec.bias_offset(layer) + spec.layer_out(layer);
        for (int i = begin; i < end; ++i) {
            params[i] = uniform_real(rng, -bound, bound);
        }
    }
    return params;
}

Matrix forward(const NetworkSpec& spec, const Vector& params, const Matrix& inputs) {
    if (inputs.rows() != spec.input_dim) {
        throw std::invalid_argument("forward: input has " + std::to_string(inputs.rows()) +
                                    " rows, spec expects " + std::to_string(spec.input_dim));
    }
    check_params(spec, params);
    return forward_cached(spec, params, inputs).back();
}

Vector forward(const NetworkSpec& spec, const Vector& params, const Vector& input) {
    return forward(spec, params, Matrix(input)).col(0);
}

BackwardResult backward(const NetworkSpec& spec, const Vector& params, const Matrix& inputs,
                        const Matrix& upstream) {
    if (inputs.rows() != spec.input_dim) {
        throw std::invalid_argument("backward: input has " + std::to_string(inputs.rows()) +
                                    " rows, spec expects " + std::to_string(spec.input_dim));
    }
    if (upstream.rows() != spec.output_dim || upstream.cols() != inputs.cols()) {
        throw std::invalid_argument("backward: upstream gradient must be output_dim x batch");
    }
    check_params(spec, params);

    const std::vector<Matrix> activations = forward_cached(spec, params, inputs);

    BackwardResult result;
    result.param_grad = Vector::Zero(spec.param_count());

    Matrix delta;  // gradient w.r.t. the pre-activation of the current layer
    for (int layer = spec.layer_count() - 1; layer >= 0; --layer) {
        const Matrix& output = activations[static_cast<std::size_t>(layer) + 1];
        if (layer == spec.layer_count() - 1) {
            delta = spec.output_activation == Activation::Tanh
                        ? (upstream.array() * (1.0 - output.array().square())).matrix()
                        : upstream;
        } else {
            const int out = spec.layer_out(layer + 1);
            const int in = spec.layer_in(layer + 1);
            ConstWeightMap next_weights(params.data() + spec.weight_offset(layer + 1), out, in);
            delta = ((next_weights.transpose() * delta).array() *
                     (1.0 - output.array().square()))
                        .matrix();
        }
        if (!delta.allFinite()) {
            throw std::runtime_error("backward: non-finite gradient at layer " +
                                     std::to_string(layer));
        }
        const Matrix& prev = activations[static_cast<std::size_t>(layer)];
        WeightMap weight_grad(result.param_grad.data() + spec.weight_offset(layer),
                              spec.layer_out(layer), spec.layer_in(layer));
        weight_grad = delta * prev.transpose();
        result.param_grad.segment(spec.bias_offset(layer), spec.layer_out(layer)) =
            delta.rowwise().sum();
    }

    ConstWeightMap first_weights(params.data() + spec.weight_offset(0), spec.layer_out(0),
                                 spec.layer_in(0));
    result.input_grad = first_weights.transpose() * delta;
    return result;
}

Matrix per_output_param_gradients(const NetworkSpec& spec, const Vector& params,
                                  const Matrix& states) {
    if (states.cols() == 0) {
        throw std::invalid_argument("per_output_param_gradients: batch must be non-empty");
    }
    Matrix grads(spec.output_dim, spec.param_count());
    for (int k = 0; k < spec.output_dim; ++k) {
        Matrix upstream = Matrix::Zero(spec.output_dim, states.cols());
        upstream.row(k).setOnes();
        grads.row(k) = backward(spec, params, states, upstream).param_grad.transpose();
    }
    return grads;
}

}  // namespace pderl
