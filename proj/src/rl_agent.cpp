#include "pderl/rl_agent.hpp"

#include <fstream>
#include <stdexcept>

#include "pderl/checkpoint.hpp"

namespace pderl {
namespace {
constexpr char kAgentMagic[8] = {'P', 'D', 'R', 'L', 'A', '0', '0', '1'};
}

RlAgent::RlAgent(const NetworkSpec& actor_spec, const NetworkSpec& critic_spec,
                 const RlConfig& cfg, Rng& init_rng)
    : actor_spec_(actor_spec),
      critic_spec_(critic_spec),
      cfg_(cfg),
      actor_opt_(actor_spec.param_count(), cfg.actor_lr),
      critic_opt_(critic_spec.param_count(), cfg.critic_lr),
      personal_memory_(cfg.personal_memory_capacity) {
    actor_spec_.validate();
    critic_spec_.validate();
    if (critic_spec_.input_dim != actor_spec_.input_dim + actor_spec_.output_dim) {
        throw std::invalid_argument(
            "critic input dim must equal state dim + action dim for the concatenated input");
    }
    if (critic_spec_.output_dim != 1 || critic_spec_.output_activation != Activation::Linear) {
        throw std::invalid_argument("critic must emit a single linear value");
    }
    if (cfg_.discount < 0.0 || cfg_.discount >= 1.0) {
        throw std::invalid_argument("discount must lie in [0, 1)");
    }
    actor_ = init_params(actor_spec_, init_rng);
    critic_ = init_params(critic_spec_, init_rng);
    actor_target_ = actor_;
    critic_target_ = critic_;
}

Matrix RlAgent::concat_inputs(const Matrix& states, const Matrix& actions) const {
    Matrix inputs(states.rows() + actions.rows(), states.cols());
    inputs.topRows(states.rows()) = states;
    inputs.bottomRows(actions.rows()) = actions;
    return inputs;
}

TrainDiagnostics RlAgent::train_step(const SharedReplayBuffer& buffer, Rng& rng) {
    TrainDiagnostics diag;
    if (buffer.size() < static_cast<std::size_t>(cfg_.batch_size)) {
        return diag;
    }
    const int batch = cfg_.batch_size;
    const int action_dim = actor_spec_.output_dim;
    Matrix states;
    Matrix actions;
    Matrix next_states;
    Eigen::RowVectorXd rewards;
    Eigen::RowVectorXd not_done;
    buffer.sample_batch(rng, batch, states, actions, rewards, next_states, not_done);

    // Critic regression toward y = r + gamma * (1 - done) * Q'(s', mu'(s')).
    const Matrix next_actions = forward(actor_spec_, actor_target_, next_states);
    const Matrix next_q =
        forward(critic_spec_, critic_target_, concat_inputs(next_states, next_actions));
    const Eigen::RowVectorXd target =
        rewards + cfg_.discount * not_done.cwiseProduct(next_q.row(0));

    const Matrix critic_inputs = concat_inputs(states, actions);
    const Matrix q = forward(critic_spec_, critic_, critic_inputs);
    const Eigen::RowVectorXd error = q.row(0) - target;
    diag.critic_loss = error.squaredNorm() / batch;
    diag.mean_q = q.row(0).mean();

    const Matrix critic_upstream = (2.0 / batch) * error;
    adam_step(critic_, backward(critic_spec_, critic_, critic_inputs, critic_upstream).param_grad,
              critic_opt_);

    // Actor ascends mean_b Q(s, mu(s)): chain the critic's action gradient
    // through the actor and negate for the descent-form optimizer.
    const Matrix live_actions = forward(actor_spec_, actor_, states);
    const Matrix value_upstream = Matrix::Constant(1, batch, 1.0 / batch);
    const Matrix critic_input_grad =
        backward(critic_spec_, critic_, concat_inputs(states, live_actions), value_upstream)
            .input_grad;
    const Matrix dq_daction = critic_input_grad.bottomRows(action_dim);
    Vector actor_grad = backward(actor_spec_, actor_, states, dq_daction).param_grad;
    actor_grad = -actor_grad;
    adam_step(actor_, actor_grad, actor_opt_);

    soft_update(actor_target_, actor_, cfg_.tau);
    soft_update(critic_target_, critic_, cfg_.tau);
    diag.trained = true;
    return diag;
}

double RlAgent::q_value(const Vector& state, const Vector& action) const {
    return forward(critic_spec_, critic_, concat_inputs(Matrix(state), Matrix(action)))(0, 0);
}

Matrix RlAgent::q_values(const Matrix& states, const Matrix& actions) const {
    return forward(critic_spec_, critic_, concat_inputs(states, actions));
}

Vector RlAgent::action(const Vector& state) const {
    return forward(actor_spec_, actor_, state);
}

Vector RlAgent::exploration_action(const Vector& state, double noise_scale, Rng& rng) const {
    Vector a = action(state) + gaussian_vector(rng, actor_spec_.output_dim, noise_scale);
    return a.cwiseMax(-1.0).cwiseMin(1.0);
}

void RlAgent::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out.write(kAgentMagic, sizeof(kAgentMagic));
    write_network(out, actor_spec_, actor_);
    write_network(out, actor_spec_, actor_target_);
    write_network(out, critic_spec_, critic_);
    write_network(out, critic_spec_, critic_target_);
    write_adam_state(out, actor_opt_);
    write_adam_state(out, critic_opt_);
    if (!out) {
        throw std::runtime_error("agent checkpoint write to '" + path + "' failed");
    }
}

void RlAgent::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "' for reading");
    }
    char magic[sizeof(kAgentMagic)] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::string(magic, sizeof(magic)) != std::string(kAgentMagic, sizeof(kAgentMagic))) {
        throw std::runtime_error("'" + path + "' is not an agent checkpoint");
    }
    auto [a_spec, a_params] = read_network(in);
    auto [at_spec, at_params] = read_network(in);
    auto [c_spec, c_params] = read_network(in);
    auto [ct_spec, ct_params] = read_network(in);
    if (a_spec != actor_spec_ || at_spec != actor_spec_ || c_spec != critic_spec_ ||
        ct_spec != critic_spec_) {
        throw std::runtime_error("agent checkpoint '" + path +
                                 "' was written with different network specs");
    }
    actor_ = std::move(a_params);
    actor_target_ = std::move(at_params);
    critic_ = std::move(c_params);
    critic_target_ = std::move(ct_params);
    actor_opt_ = read_adam_state(in);
    critic_opt_ = read_adam_state(in);
}

void RlAgent::set_critic_params(const Vector& params) {
    if (params.size() != critic_spec_.param_count()) {
        throw std::invalid_argument("set_critic_params: length mismatch");
    }
    critic_ = params;
    critic_target_ = params;
}

void RlAgent::set_actor_params(const Vector& params) {
    if (params.size() != actor_spec_.param_count()) {
        throw std::invalid_argument("set_actor_params: length mismatch");
    }
    actor_ = params;
    actor_target_ = params;
}

}  // namespace pderl
