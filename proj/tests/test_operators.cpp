#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "oracles.hpp"
#include "pderl/operators.hpp"

using namespace pderl;

namespace {

Transition state_only(const Vector& state) {
    Transition t;
    t.state = state;
    t.action = Vector::Zero(1);
    t.reward = 0.0;
    t.next_state = state;
    t.done = false;
    return t;
}

GeneticMemory memory_of_states(const std::vector<Vector>& states, std::size_t capacity = 8000) {
    GeneticMemory memory(capacity);
    for (const auto& s : states) memory.push(state_only(s));
    return memory;
}

GeneticMemory random_state_memory(int n, int dim, std::uint64_t seed,
                                  std::size_t capacity = 8000) {
    Rng rng = make_rng(seed);
    GeneticMemory memory(capacity);
    for (int i = 0; i < n; ++i) {
        Vector s(dim);
        for (int d = 0; d < dim; ++d) s[d] = uniform_real(rng, -1.0, 1.0);
        memory.push(state_only(s));
    }
    return memory;
}

// Constant-output linear "policy": one linear layer, zero weights, bias = c.
Agent constant_policy_agent(int state_dim, double c) {
    Agent agent;
    agent.spec.input_dim = state_dim;
    agent.spec.output_dim = 1;
    agent.spec.output_activation = Activation::Linear;
    agent.params = Vector::Zero(agent.spec.param_count());
    agent.params[agent.spec.bias_offset(0)] = c;
    agent.memory = GeneticMemory(64);
    return agent;
}

// Critic whose value is exactly the (single) action component.
RlAgent action_reading_critic(int state_dim) {
    Rng rng = make_rng(0xc417);
    NetworkSpec critic;
    critic.input_dim = state_dim + 1;
    critic.output_dim = 1;
    critic.output_activation = Activation::Linear;
    RlAgent agent(policy_spec(state_dim, 1, {4}), critic, RlConfig{}, rng);
    Vector w = Vector::Zero(critic.param_count());
    w[state_dim] = 1.0;  // weight on the action slot of [state; action]
    agent.set_critic_params(w);
    return agent;
}

// Scalar-loop restatement of the three-term filtered imitation loss.
double qfilter_loss_reference(const Matrix& child, const Matrix& x, const Matrix& y,
                              const Eigen::RowVectorXd& qx, const Eigen::RowVectorXd& qy,
                              double reg_weight) {
    double loss = 0.0;
    const double reg = reg_weight / static_cast<double>(child.cols());
    for (int i = 0; i < child.cols(); ++i) {
        for (int r = 0; r < child.rows(); ++r) {
            const double target = qx[i] >= qy[i] ? x(r, i) : y(r, i);
            const double diff = child(r, i) - target;
            loss += diff * diff + reg * child(r, i) * child(r, i);
        }
    }
    return loss;
}

double mean_action_gap(const Agent& a, const Agent& b, const Matrix& states) {
    return (forward(a.spec, a.params, states) - forward(b.spec, b.params, states))
        .colwise()
        .norm()
        .mean();
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("q-filter: a child matching the preferred parent has zero loss") {
    Matrix child(2, 1), x(2, 1), y(2, 1);
    child << 0.3, -0.4;
    x << 0.3, -0.4;
    y << -0.9, 0.9;
    Eigen::RowVectorXd qx(1), qy(1);
    qx << 5.0;
    qy << 1.0;
    const auto result = qfilter_loss(child, x, y, qx, qy, 0.0);
    CHECK(result.loss == 0.0);
    CHECK(result.child_upstream.isZero(0.0));
    REQUIRE(result.imitate_x.size() == 1);
    CHECK(result.imitate_x[0]);
}

TEST_CASE("q-filter: imitation distance to the preferred parent, ties to x") {
    Matrix child(2, 1), x(2, 1), y(2, 1);
    child << 0.0, 0.0;
    x << 1.0, 0.0;
    y << 0.0, 2.0;
    Eigen::RowVectorXd qx(1), qy(1);

    qx << 2.0;
    qy << 1.0;
    CHECK(qfilter_loss(child, x, y, qx, qy, 0.0).loss == doctest::Approx(1.0));

    qx << 1.0;
    qy << 2.0;  // now y is preferred: distance to (0, 2)
    CHECK(qfilter_loss(child, x, y, qx, qy, 0.0).loss == doctest::Approx(4.0));

    qx << 3.0;
    qy << 3.0;  // tie goes to the first parent
    const auto tie = qfilter_loss(child, x, y, qx, qy, 0.0);
    CHECK(tie.imitate_x[0]);
    CHECK(tie.loss == doctest::Approx(1.0));
}

TEST_CASE("q-filter: the regularizer alone pulls actions toward zero") {
    Matrix same(2, 1);
    same << 1.0, 1.0;
    Eigen::RowVectorXd q(1);
    q << 0.0;
    const auto result = qfilter_loss(same, same, same, q, q, 2.0);
    CHECK(result.loss == doctest::Approx(4.0));  // (2/1) * ||(1,1)||^2
    CHECK(result.child_upstream(0, 0) == doctest::Approx(4.0));
    CHECK(result.child_upstream(1, 0) == doctest::Approx(4.0));
}

TEST_CASE("q-filter loss matches the scalar reference on random batches") {
    Rng rng = make_rng(313);
    for (int trial = 0; trial < 10; ++trial) {
        const int batch = 1 + static_cast<int>(uniform_real(rng, 0.0, 16.0));
        const int dim = 1 + static_cast<int>(uniform_real(rng, 0.0, 3.0));
        Matrix child(dim, batch), x(dim, batch), y(dim, batch);
        Eigen::RowVectorXd qx(batch), qy(batch);
        for (int i = 0; i < batch; ++i) {
            qx[i] = uniform_real(rng, -1.0, 1.0);
            qy[i] = uniform_real(rng, -1.0, 1.0);
            for (int r = 0; r < dim; ++r) {
                child(r, i) = uniform_real(rng, -1.0, 1.0);
                x(r, i) = uniform_real(rng, -1.0, 1.0);
                y(r, i) = uniform_real(rng, -1.0, 1.0);
            }
        }
        const double reg = uniform_real(rng, 0.0, 2.0);
        const auto result = qfilter_loss(child, x, y, qx, qy, reg);
        const double expected = qfilter_loss_reference(child, x, y, qx, qy, reg);
        CHECK(result.loss == doctest::Approx(expected).epsilon(1e-12));

        // indicator brute force
        for (int i = 0; i < batch; ++i)
            CHECK(result.imitate_x[static_cast<std::size_t>(i)] == (qx[i] >= qy[i]));
    }
}

TEST_CASE("q-filter upstream gradient matches finite differences") {
    Rng rng = make_rng(717);
    Matrix child(2, 5), x(2, 5), y(2, 5);
    Eigen::RowVectorXd qx(5), qy(5);
    for (int i = 0; i < 5; ++i) {
        qx[i] = uniform_real(rng, -1.0, 1.0);
        qy[i] = uniform_real(rng, -1.0, 1.0);
        for (int r = 0; r < 2; ++r) {
            child(r, i) = uniform_real(rng, -1.0, 1.0);
            x(r, i) = uniform_real(rng, -1.0, 1.0);
            y(r, i) = uniform_real(rng, -1.0, 1.0);
        }
    }
    const double reg = 0.7;
    const Matrix upstream = qfilter_loss(child, x, y, qx, qy, reg).child_upstream;
    const double h = 1e-6;
    for (int i = 0; i < 5; ++i) {
        for (int r = 0; r < 2; ++r) {
            Matrix bumped = child;
            bumped(r, i) += h;
            const double up = qfilter_loss(bumped, x, y, qx, qy, reg).loss;
            bumped(r, i) -= 2.0 * h;
            const double down = qfilter_loss(bumped, x, y, qx, qy, reg).loss;
            const double numeric = (up - down) / (2.0 * h);
            CHECK(upstream(r, i) == doctest::Approx(numeric).epsilon(1e-5));
        }
    }
}

TEST_CASE("q-filter rejects misaligned batches") {
    Matrix a(2, 3), b(2, 2);
    Eigen::RowVectorXd q3(3), q2(2);
    CHECK_THROWS_AS(qfilter_loss(a, b, a, q3, q3, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(qfilter_loss(a, a, a, q2, q3, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(qfilter_loss(Matrix(2, 0), Matrix(2, 0), Matrix(2, 0),
                                 Eigen::RowVectorXd(0), Eigen::RowVectorXd(0), 0.0),
                    std::invalid_argument);
}

TEST_CASE("action sensitivity of a linear neuron is the summed input magnitude") {
    NetworkSpec spec;
    spec.input_dim = 2;
    spec.output_dim = 1;
    spec.output_activation = Activation::Linear;
    Vector params(3);
    params << 0.5, -0.25, 0.1;

    Matrix single(2, 1);
    single << 1.0, -2.0;
    const Vector s1 = action_sensitivity(spec, params, single);
    REQUIRE(s1.size() == 3);
    CHECK(s1[0] == doctest::Approx(1.0));
    CHECK(s1[1] == doctest::Approx(2.0));
    CHECK(s1[2] == doctest::Approx(1.0));  // bias column

    Matrix batch(2, 2);
    batch << 1.0, 0.0, 0.0, 1.0;
    const Vector s2 = action_sensitivity(spec, params, batch);
    CHECK(s2[0] == doctest::Approx(1.0));  // gradients sum over the batch
    CHECK(s2[1] == doctest::Approx(1.0));
    CHECK(s2[2] == doctest::Approx(2.0));
}

TEST_CASE("action sensitivity matches a finite-difference restatement") {
    const NetworkSpec spec = policy_spec(2, 2, {5});
    Rng rng = make_rng(41);
    const Vector params = init_params(spec, rng);
    Matrix states(2, 6);
    for (int c = 0; c < 6; ++c)
        for (int r = 0; r < 2; ++r) states(r, c) = uniform_real(rng, -1.0, 1.0);

    const Vector s = action_sensitivity(spec, params, states);
    REQUIRE(s.size() == spec.param_count());

    const double h = 1e-5;
    for (int j = 0; j < spec.param_count(); ++j) {
        Vector bumped = params;
        bumped[j] += h;
        const Vector up = forward(spec, bumped, states).rowwise().sum();
        bumped[j] -= 2.0 * h;
        const Vector down = forward(spec, bumped, states).rowwise().sum();
        const double numeric = ((up - down) / (2.0 * h)).norm();
        CHECK(s[j] == doctest::Approx(numeric).epsilon(1e-3));
    }
}

TEST_CASE("proximal mutation with vanishing noise reproduces the parent") {
    Rng rng = make_rng(57);
    Agent parent = make_agent(policy_spec(3, 2, {6}), 100, rng);
    parent.memory = random_state_memory(40, 3, 58, 100);
    parent.fitness = 12.0;
    parent.fitness_fresh = true;

    MutationConfig cfg;
    cfg.sigma = 1e-12;
    cfg.batch_size = 16;
    Agent child = proximal_mutation(parent, cfg, rng);
    CHECK((child.params - parent.params).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(child.spec == parent.spec);
    CHECK_FALSE(child.fitness_fresh);  // mutation marks fitness stale
    REQUIRE(child.memory.size() == parent.memory.size());
    for (std::size_t i = 0; i < child.memory.size(); ++i)
        CHECK((child.memory[i].state - parent.memory[i].state).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("proximal mutation scales perturbations by inverse sensitivity") {
    // A single repeated memory state makes the sensitivity batch exact:
    // s = batch * (|s1|, |s2|, 1), so delta_j * s_j should look N(0, sigma^2).
    Agent parent = constant_policy_agent(2, 0.0);
    parent.params[0] = 0.5;
    parent.params[1] = -0.25;
    Vector state(2);
    state << 0.5, -0.125;
    parent.memory = memory_of_states({state}, 64);

    MutationConfig cfg;
    cfg.sigma = 0.1;
    cfg.batch_size = 64;
    const Vector sensitivity(
        (Vector(3) << 64.0 * 0.5, 64.0 * 0.125, 64.0).finished());

    Rng rng = make_rng(404);
    const int trials = 400;
    Matrix rescaled(3, trials);
    for (int t = 0; t < trials; ++t) {
        const Agent child = proximal_mutation(parent, cfg, rng);
        rescaled.col(t) = (child.params - parent.params).cwiseProduct(sensitivity);
    }
    for (int j = 0; j < 3; ++j) {
        const double mean = rescaled.row(j).mean();
        const double variance = rescaled.row(j).array().square().mean() - mean * mean;
        CHECK(std::abs(mean) < 0.02);
        CHECK(std::sqrt(variance) == doctest::Approx(cfg.sigma).epsilon(0.15));
    }
}

TEST_CASE("proximal mutation refuses an empty parent memory") {
    Rng rng = make_rng(61);
    Agent parent = make_agent(policy_spec(2, 1, {4}), 50, rng);
    MutationConfig cfg;
    CHECK_THROWS_AS(proximal_mutation(parent, cfg, rng), std::runtime_error);
}

TEST_CASE("distillation of identical parents stays behaviorally put") {
    Rng rng = make_rng(71);
    Agent parent = make_agent(policy_spec(3, 2, {8}), 2000, rng);
    parent.memory = random_state_memory(600, 3, 72, 2000);
    Agent twin = parent;
    twin.memory = random_state_memory(600, 3, 73, 2000);

    Rng critic_rng = make_rng(74);
    RlAgent critic(policy_spec(3, 2, {8}), critic_spec(3, 2, {8}), RlConfig{}, critic_rng);

    CrossoverConfig cfg;  // paper-scale: 12 epochs, batches of 128, lr 1e-3
    Rng op_rng = make_rng(75);
    const Agent child = distillation_crossover(parent, twin, critic, cfg, 4000, op_rng);

    Rng probe_rng = make_rng(76);
    const Matrix probes = child.memory.sample_states(probe_rng, 256);
    CHECK(mean_action_gap(child, parent, probes) < 0.05);
    CHECK(child.spec == parent.spec);
    CHECK_FALSE(child.fitness_fresh);
    CHECK(child.memory.capacity() == 4000);
    CHECK(child.memory.size() == 1200);  // newest 600 from each parent
}

TEST_CASE("distillation adopts the parent the critic prefers") {
    // Parents emit constant actions -0.9 and +0.9; the critic scores an
    // action by its own value, so the +0.9 parent wins on every state.
    Agent low = constant_policy_agent(2, -0.9);
    Agent high = constant_policy_agent(2, 0.9);
    low.memory = random_state_memory(640, 2, 81, 8000);
    high.memory = random_state_memory(640, 2, 82, 8000);

    const RlAgent critic = action_reading_critic(2);
    CrossoverConfig cfg;
    cfg.learning_rate = 0.05;  // few steps available, so stride quickly

    Rng rng = make_rng(83);
    const Agent child = distillation_crossover(low, high, critic, cfg, 8000, rng);

    Rng probe_rng = make_rng(84);
    const Matrix probes = child.memory.sample_states(probe_rng, 128);
    const Matrix actions = forward(child.spec, child.params, probes);
    CHECK(actions.minCoeff() > 0.5);  // firmly on the preferred parent's side
    CHECK(mean_action_gap(child, high, probes) < 0.25);
    CHECK(mean_action_gap(child, low, probes) > 1.0);
}

TEST_CASE("distillation requires experience from at least one parent") {
    Rng rng = make_rng(91);
    Agent a = make_agent(policy_spec(2, 1, {4}), 50, rng);
    Agent b = make_agent(policy_spec(2, 1, {4}), 50, rng);
    Rng critic_rng = make_rng(92);
    RlAgent critic(policy_spec(2, 1, {4}), critic_spec(2, 1, {4}), RlConfig{}, critic_rng);
    CrossoverConfig cfg;
    CHECK_THROWS_AS(distillation_crossover(a, b, critic, cfg, 100, rng), std::runtime_error);

    b.memory = random_state_memory(30, 2, 93, 50);
    const Agent child = distillation_crossover(a, b, critic, cfg, 100, rng);
    CHECK(child.memory.size() == 30);
}

TEST_CASE("n-point crossover provenance: every row comes from a parent") {
    const NetworkSpec spec = policy_spec(3, 2, {5, 4});
    Rng rng = make_rng(101);
    Agent x = make_agent(spec, 100, rng);
    Agent y = make_agent(spec, 100, rng);
    x.memory = random_state_memory(20, 3, 102, 100);
    y.memory = random_state_memory(20, 3, 103, 100);

    REQUIRE(total_rows(spec) == 5 + 4 + 2);
    std::vector<bool> mask(static_cast<std::size_t>(total_rows(spec)));
    Rng mask_rng = make_rng(104);
    for (auto&& flag : mask) flag = uniform_real(mask_rng, 0.0, 1.0) < 0.5;

    Rng shuffle_rng = make_rng(105);
    const Agent child = npoint_crossover(x, y, 100, mask, shuffle_rng);

    std::size_t row_index = 0;
    for (int layer = 0; layer < spec.layer_count(); ++layer) {
        const int rows = spec.layer_out(layer);
        const int cols = spec.layer_in(layer);
        for (int r = 0; r < rows; ++r, ++row_index) {
            const Agent& source = mask[row_index] ? x : y;
            for (int c = 0; c < cols; ++c) {
                const int idx = spec.weight_offset(layer) + c * rows + r;
                CHECK(child.params[idx] == source.params[idx]);
            }
            const int bias_idx = spec.bias_offset(layer) + r;
            CHECK(child.params[bias_idx] == source.params[bias_idx]);
        }
    }
    CHECK(row_index == static_cast<std::size_t>(total_rows(spec)));
}

TEST_CASE("n-point crossover degenerate masks copy a whole parent") {
    const NetworkSpec spec = policy_spec(2, 2, {4});
    Rng rng = make_rng(111);
    Agent x = make_agent(spec, 50, rng);
    Agent y = make_agent(spec, 50, rng);
    x.memory = random_state_memory(10, 2, 112, 50);
    y.memory = random_state_memory(10, 2, 113, 50);

    Rng shuffle_rng = make_rng(114);
    const std::vector<bool> all_x(static_cast<std::size_t>(total_rows(spec)), true);
    const std::vector<bool> all_y(static_cast<std::size_t>(total_rows(spec)), false);
    CHECK((npoint_crossover(x, y, 50, all_x, shuffle_rng).params - x.params)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK((npoint_crossover(x, y, 50, all_y, shuffle_rng).params - y.params)
              .cwiseAbs()
              .maxCoeff() == 0.0);

    // identical parents: any coin sequence reproduces them
    Rng coin_rng = make_rng(115);
    const Agent clone = npoint_crossover(x, x, 50, coin_rng);
    CHECK((clone.params - x.params).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("n-point crossover with random coins still respects provenance") {
    const NetworkSpec spec = policy_spec(3, 1, {6});
    Rng rng = make_rng(121);
    Agent x = make_agent(spec, 60, rng);
    Agent y = make_agent(spec, 60, rng);
    x.memory = random_state_memory(12, 3, 122, 60);
    y.memory = random_state_memory(12, 3, 123, 60);

    Rng op_rng = make_rng(124);
    const Agent child = npoint_crossover(x, y, 60, op_rng);
    CHECK_FALSE(child.fitness_fresh);
    CHECK(child.memory.size() == 24);  // last min(12, 30) entries of each parent

    std::size_t row_index = 0;
    int rows_from_x = 0;
    for (int layer = 0; layer < spec.layer_count(); ++layer) {
        const int rows = spec.layer_out(layer);
        const int cols = spec.layer_in(layer);
        for (int r = 0; r < rows; ++r, ++row_index) {
            bool matches_x = true, matches_y = true;
            for (int c = 0; c < cols; ++c) {
                const int idx = spec.weight_offset(layer) + c * rows + r;
                matches_x = matches_x && child.params[idx] == x.params[idx];
                matches_y = matches_y && child.params[idx] == y.params[idx];
            }
            const int bias_idx = spec.bias_offset(layer) + r;
            matches_x = matches_x && child.params[bias_idx] == x.params[bias_idx];
            matches_y = matches_y && child.params[bias_idx] == y.params[bias_idx];
            CHECK((matches_x || matches_y));
            rows_from_x += matches_x ? 1 : 0;
        }
    }
    CHECK(rows_from_x > 0);  // coin flips at seed 124 mix both parents
    CHECK(rows_from_x < total_rows(spec));
}

TEST_CASE("gaussian mutation perturbs exactly the requested share of weights") {
    const NetworkSpec spec = policy_spec(4, 2, {8, 8});
    Rng rng = make_rng(131);
    Agent parent = make_agent(spec, 50, rng);
    parent.memory = random_state_memory(8, 4, 132, 50);

    Rng op_rng = make_rng(133);
    const Agent child = gaussian_mutation(parent, 0.1, 0.3, op_rng);
    const int expected = static_cast<int>(
        std::ceil(0.3 * static_cast<double>(spec.param_count())));
    int changed = 0;
    for (int i = 0; i < spec.param_count(); ++i)
        changed += child.params[i] != parent.params[i] ? 1 : 0;
    CHECK(changed == expected);

    // sigma = 0 keeps even the "mutated" weights bit-identical
    const Agent frozen = gaussian_mutation(parent, 0.0, 0.3, op_rng);
    CHECK((frozen.params - parent.params).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(gaussian_mutation(parent, 0.1, 0.0, op_rng), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_mutation(parent, 0.1, 1.5, op_rng), std::invalid_argument);
}

TEST_CASE("gaussian mutation noise is additive around the parent") {
    const NetworkSpec spec = policy_spec(2, 1, {4});
    Rng rng = make_rng(141);
    Agent parent = make_agent(spec, 50, rng);
    parent.memory = random_state_memory(5, 2, 142, 50);

    Rng op_rng = make_rng(143);
    const int trials = 2000;
    double sum = 0.0, sum_sq = 0.0;
    long n = 0;
    for (int t = 0; t < trials; ++t) {
        const Agent child = gaussian_mutation(parent, 0.05, 1.0, op_rng);
        const Vector delta = child.params - parent.params;
        for (int i = 0; i < delta.size(); ++i) {
            sum += delta[i];
            sum_sq += delta[i] * delta[i];
            ++n;
        }
    }
    const double mean = sum / static_cast<double>(n);
    const double std_dev = std::sqrt(sum_sq / static_cast<double>(n) - mean * mean);
    CHECK(std::abs(mean) < 0.002);
    CHECK(std_dev == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("greedy mating score adds fresh fitnesses and rejects stale ones") {
    Rng rng = make_rng(151);
    Agent a = make_agent(policy_spec(2, 1, {4}), 10, rng);
    Agent b = make_agent(policy_spec(2, 1, {4}), 10, rng);
    a.fitness = 3.0;
    b.fitness = 5.0;
    a.fitness_fresh = b.fitness_fresh = true;
    CHECK(mating_score_greedy(a, b) == 8.0);
    CHECK(mating_score_greedy(b, a) == 8.0);

    b.fitness_fresh = false;
    CHECK_THROWS_AS(mating_score_greedy(a, b), std::logic_error);
}

TEST_CASE("distance mating score has a closed form on single-state memories") {
    // Linear policies w_x = (1, 0), w_y = (0, 1): the action gap on state s
    // is (s1 - s2)^2, so the score is the sum over the two stored states.
    Agent x = constant_policy_agent(2, 0.0);
    x.params[0] = 1.0;
    Agent y = constant_policy_agent(2, 0.0);
    y.params[1] = 1.0;
    Vector sx(2), sy(2);
    sx << 1.0, 2.0;
    sy << 3.0, -1.0;
    x.memory = memory_of_states({sx}, 16);
    y.memory = memory_of_states({sy}, 16);

    const double score = mating_score_distance(x, y, 8, 1, 2);
    CHECK(score == doctest::Approx(1.0 + 16.0).epsilon(1e-12));
    // symmetric under a full argument swap
    CHECK(mating_score_distance(y, x, 8, 2, 1) == doctest::Approx(score).epsilon(1e-12));
}

TEST_CASE("distance mating score of identical policies is exactly zero") {
    Rng rng = make_rng(161);
    Agent a = make_agent(policy_spec(3, 2, {6}), 100, rng);
    a.memory = random_state_memory(30, 3, 162, 100);
    Agent b = a;
    b.memory = random_state_memory(25, 3, 163, 100);
    CHECK(mating_score_distance(a, b, 16, 7, 8) == 0.0);

    Agent empty = a;
    empty.memory = GeneticMemory(100);
    CHECK_THROWS_AS(mating_score_distance(a, empty, 16, 7, 8), std::runtime_error);
    CHECK_THROWS_AS(mating_score_distance(a, b, 0, 7, 8), std::invalid_argument);
}

TEST_CASE("two candidates always produce the only possible pair") {
    Rng rng = make_rng(171);
    std::vector<Agent> population;
    for (int i = 0; i < 2; ++i) {
        population.push_back(make_agent(policy_spec(2, 1, {4}), 10, rng));
        population.back().fitness = 1.0 + i;
        population.back().fitness_fresh = true;
    }
    const auto pairs = select_parents(population, SelectionMode::Greedy, 3, 9);
    REQUIRE(pairs.size() == 3);
    for (const auto& p : pairs) CHECK(p == std::pair<int, int>{0, 1});
}

TEST_CASE("greedy selection frequencies follow the 9:9:2 score ratio") {
    Rng rng = make_rng(181);
    std::vector<Agent> population;
    const double fitnesses[3] = {8.0, 1.0, 1.0};  // pair scores 9, 9, 2
    for (double f : fitnesses) {
        population.push_back(make_agent(policy_spec(2, 1, {4}), 10, rng));
        population.back().fitness = f;
        population.back().fitness_fresh = true;
    }

    std::map<std::pair<int, int>, int> counts;
    const int draws = 4000;
    for (int s = 0; s < draws; ++s) {
        const auto pairs =
            select_parents(population, SelectionMode::Greedy, 1, static_cast<std::uint64_t>(s));
        counts[pairs[0]]++;
    }
    const double total_weight = 9.0 + 9.0 + 2.0;
    const std::map<std::pair<int, int>, double> expected{
        {{0, 1}, 9.0 / total_weight}, {{0, 2}, 9.0 / total_weight}, {{1, 2}, 2.0 / total_weight}};
    for (const auto& [pair, p] : expected) {
        const double sigma = std::sqrt(draws * p * (1.0 - p));
        CHECK(std::abs(counts[pair] - draws * p) <= 3.0 * sigma);
    }
}

TEST_CASE("selection is deterministic in the seed") {
    Rng rng = make_rng(191);
    std::vector<Agent> population;
    for (int i = 0; i < 5; ++i) {
        population.push_back(make_agent(policy_spec(2, 1, {4}), 10, rng));
        population.back().fitness = static_cast<double>(i);
        population.back().fitness_fresh = true;
    }
    const auto a = select_parents(population, SelectionMode::Greedy, 10, 77);
    const auto b = select_parents(population, SelectionMode::Greedy, 10, 77);
    CHECK(a == b);
    const auto c = select_parents(population, SelectionMode::Greedy, 10, 78);
    CHECK(a != c);
}

TEST_CASE("distinct pairs are kept until the pool runs dry") {
    Rng rng = make_rng(201);
    std::vector<Agent> population;
    for (int i = 0; i < 4; ++i) {  // 6 possible pairs
        population.push_back(make_agent(policy_spec(2, 1, {4}), 10, rng));
        population.back().fitness = 1.0;
        population.back().fitness_fresh = true;
    }
    const auto pairs = select_parents(population, SelectionMode::Greedy, 6, 31);
    std::set<std::pair<int, int>> unique(pairs.begin(), pairs.end());
    CHECK(unique.size() == 6);  // first sweep uses every pair exactly once
}

TEST_CASE("distance selection avoids behavioral clones that greedy favors") {
    // Agents 0 and 1 share identical parameters (distance zero) and the top
    // fitnesses, so greedy loves the pair (0, 1) and distance shuns it.
    Rng rng = make_rng(211);
    std::vector<Agent> population;
    for (int i = 0; i < 4; ++i) {
        population.push_back(make_agent(policy_spec(2, 2, {6}), 200, rng));
        population.back().memory = random_state_memory(40, 2, 212 + static_cast<std::uint64_t>(i),
                                                       200);
        population.back().fitness = i < 2 ? 10.0 : 1.0;
        population.back().fitness_fresh = true;
    }
    population[1].params = population[0].params;

    int greedy_count = 0, distance_count = 0;
    const int draws = 300;
    const std::pair<int, int> clone_pair{0, 1};
    for (int s = 0; s < draws; ++s) {
        if (select_parents(population, SelectionMode::Greedy, 1,
                           static_cast<std::uint64_t>(s))[0] == clone_pair)
            greedy_count++;
        if (select_parents(population, SelectionMode::Distance, 1,
                           static_cast<std::uint64_t>(s), 16)[0] == clone_pair)
            distance_count++;
    }
    // greedy: weight 20 of 20+11+11+11+11+2 = 66 -> ~30% of draws
    CHECK(greedy_count > draws / 5);
    // distance: the clone pair's weight is the epsilon shift only
    CHECK(distance_count < draws / 20);
    CHECK(distance_count < greedy_count);
}

TEST_CASE("agent fixtures round trip through save and load") {
    Rng rng = make_rng(221);
    Agent agent = make_agent(policy_spec(3, 2, {5}), 40, rng);
    agent.memory = random_state_memory(7, 3, 222, 40);
    agent.fitness = 4.5;
    agent.fitness_fresh = true;

    const auto prefix =
        (std::filesystem::temp_directory_path() / "pderl_agent_fixture").string();
    save_agent(prefix, agent);
    const Agent loaded = load_agent(prefix);
    std::filesystem::remove(prefix + ".net");
    std::filesystem::remove(prefix + ".mem");

    CHECK(loaded.spec == agent.spec);
    CHECK((loaded.params - agent.params).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(loaded.memory.size() == agent.memory.size());
    for (std::size_t i = 0; i < agent.memory.size(); ++i)
        CHECK((loaded.memory[i].state - agent.memory[i].state).cwiseAbs().maxCoeff() == 0.0);
    CHECK_FALSE(loaded.fitness_fresh);  // fitness does not persist
}

}  // TEST_SUITE
