#include "pderl/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pderl/adam.hpp"
#include "pderl/checkpoint.hpp"

namespace pderl {

Agent make_agent(const NetworkSpec& spec, std::size_t kappa, Rng& rng) {
    return Agent{spec, init_params(spec, rng), GeneticMemory(kappa), 0.0, false};
}

void save_agent(const std::string& prefix, const Agent& agent) {
    save_network(prefix + ".net", agent.spec, agent.params);
    save_memory(prefix + ".mem", agent.memory);
}

Agent load_agent(const std::string& prefix) {
    auto [spec, params] = load_network(prefix + ".net");
    GeneticMemory memory = load_memory(prefix + ".mem");
    return Agent{std::move(spec), std::move(params), std::move(memory), 0.0, false};
}

QFilterResult qfilter_loss(const Matrix& child_actions, const Matrix& x_actions,
                           const Matrix& y_actions, const Eigen::RowVectorXd& qx,
                           const Eigen::RowVectorXd& qy, double reg_weight) {
    const Eigen::Index batch = child_actions.cols();
    if (x_actions.cols() != batch || y_actions.cols() != batch || qx.size() != batch ||
        qy.size() != batch || x_actions.rows() != child_actions.rows() ||
        y_actions.rows() != child_actions.rows()) {
        throw std::invalid_argument("qfilter_loss: batch arrays are misaligned");
    }
    if (batch == 0) {
        throw std::invalid_argument("qfilter_loss: empty batch");
    }
    QFilterResult result;
    result.imitate_x.resize(static_cast<std::size_t>(batch));
    result.child_upstream.resize(child_actions.rows(), batch);
    const double reg_per_sample = reg_weight / static_cast<double>(batch);
    for (Eigen::Index i = 0; i < batch; ++i) {
        const bool take_x = qx[i] >= qy[i];  // ties imitate the first parent
        result.imitate_x[static_cast<std::size_t>(i)] = take_x;
        const auto target = take_x ? x_actions.col(i) : y_actions.col(i);
        const Vector diff = child_actions.col(i) - target;
        result.loss += diff.squaredNorm() + reg_per_sample * child_actions.col(i).squaredNorm();
        result.child_upstream.col(i) =
            2.0 * diff + 2.0 * reg_per_sample * child_actions.col(i);
    }
    return result;
}

Agent distillation_crossover(const Agent& parent_x, const Agent& parent_y,
                             const RlAgent& critic, const CrossoverConfig& cfg,
                             std::size_t kappa, Rng& rng) {
    if (parent_x.spec != parent_y.spec) {
        throw std::invalid_argument("distillation_crossover: parents have different specs");
    }
    if (parent_x.memory.empty() && parent_y.memory.empty()) {
        throw std::runtime_error(
            "distillation_crossover: both parent memories are empty, nothing to distill from");
    }
    if (cfg.batch_size <= 0 || cfg.epochs <= 0 || cfg.learning_rate <= 0.0) {
        throw std::invalid_argument("distillation_crossover: config values must be positive");
    }

    Agent child;
    child.spec = parent_x.spec;
    child.memory = inherit_crossover(parent_x.memory, parent_y.memory, kappa, rng);
    child.params = uniform_real(rng, 0.0, 1.0) < 0.5 ? parent_x.params : parent_y.params;

    // One epoch walks the inherited memory once in expectation; memories
    // below capacity get proportionally fewer batches.
    const int batches_per_epoch =
        std::max<int>(1, static_cast<int>(child.memory.size() /
                                          static_cast<std::size_t>(cfg.batch_size)));
    AdamState opt(child.spec.param_count(), cfg.learning_rate);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (int b = 0; b < batches_per_epoch; ++b) {
            const Matrix states = child.memory.sample_states(rng, cfg.batch_size);
            const Matrix x_actions = forward(parent_x.spec, parent_x.params, states);
            const Matrix y_actions = forward(parent_y.spec, parent_y.params, states);
            const Eigen::RowVectorXd qx = critic.q_values(states, x_actions).row(0);
            const Eigen::RowVectorXd qy = critic.q_values(states, y_actions).row(0);
            const Matrix child_actions = forward(child.spec, child.params, states);
            const QFilterResult filtered =
                qfilter_loss(child_actions, x_actions, y_actions, qx, qy, cfg.reg_weight);
            adam_step(child.params,
                      backward(child.spec, child.params, states, filtered.child_upstream)
                          .param_grad,
                      opt);
        }
    }
    return child;
}

Vector action_sensitivity(const NetworkSpec& spec, const Vector& params, const Matrix& states) {
    const Matrix per_output = per_output_param_gradients(spec, params, states);
    return per_output.colwise().norm().transpose();
}

Agent proximal_mutation(const Agent& parent, const MutationConfig& cfg, Rng& rng) {
    if (parent.memory.empty()) {
        throw std::runtime_error("proximal_mutation: parent memory is empty");
    }
    if (cfg.sigma <= 0.0 || cfg.batch_size <= 0 || cfg.sensitivity_floor <= 0.0) {
        throw std::invalid_argument("proximal_mutation: config values must be positive");
    }
    Agent child;
    child.spec = parent.spec;
    child.memory = inherit_full(parent.memory);
    const Matrix states = parent.memory.sample_states(rng, cfg.batch_size);
    const Vector sensitivity = action_sensitivity(parent.spec, parent.params, states);
    const Vector noise = gaussian_vector(rng, parent.params.size(), cfg.sigma);
    child.params =
        parent.params + (noise.array() / sensitivity.array().max(cfg.sensitivity_floor)).matrix();
    return child;
}

int total_rows(const NetworkSpec& spec) {
    int rows = 0;
    for (int layer = 0; layer < spec.layer_count(); ++layer) {
        rows += spec.layer_out(layer);
    }
    return rows;
}

Agent npoint_crossover(const Agent& parent_x, const Agent& parent_y, std::size_t kappa,
                       const std::vector<bool>& row_from_x, Rng& shuffle_rng) {
    if (parent_x.spec != parent_y.spec) {
        throw std::invalid_argument("npoint_crossover: parents have different specs");
    }
    const NetworkSpec& spec = parent_x.spec;
    if (row_from_x.size() != static_cast<std::size_t>(total_rows(spec))) {
        throw std::invalid_argument("npoint_crossover: need one row flag per network row");
    }
    Agent child;
    child.spec = spec;
    child.memory = inherit_crossover(parent_x.memory, parent_y.memory, kappa, shuffle_rng);
    child.params = parent_x.params;
    std::size_t row_index = 0;
    for (int layer = 0; layer < spec.layer_count(); ++layer) {
        const int out = spec.layer_out(layer);
        const int in = spec.layer_in(layer);
        Eigen::Map<Matrix> child_w(child.params.data() + spec.weight_offset(layer), out, in);
        Eigen::Map<const Matrix> y_w(parent_y.params.data() + spec.weight_offset(layer), out, in);
        for (int r = 0; r < out; ++r, ++row_index) {
            if (!row_from_x[row_index]) {
                child_w.row(r) = y_w.row(r);
                child.params[spec.bias_offset(layer) + r] =
                    parent_y.params[spec.bias_offset(layer) + r];
            }
        }
    }
    return child;
}

Agent npoint_crossover(const Agent& parent_x, const Agent& parent_y, std::size_t kappa,
                       Rng& rng) {
    std::vector<bool> row_from_x(static_cast<std::size_t>(total_rows(parent_x.spec)));
    std::uniform_int_distribution<int> coin(0, 1);
    for (auto&& flag : row_from_x) {
        flag = coin(rng) == 0;
    }
    return npoint_crossover(parent_x, parent_y, kappa, row_from_x, rng);
}

Agent gaussian_mutation(const Agent& parent, double sigma, double fraction, Rng& rng) {
    if (fraction <= 0.0 || fraction > 1.0) {
        throw std::invalid_argument("gaussian_mutation: fraction must lie in (0, 1]");
    }
    if (sigma < 0.0) {
        throw std::invalid_argument("gaussian_mutation: sigma must be non-negative");
    }
    Agent child;
    child.spec = parent.spec;
    child.memory = inherit_full(parent.memory);
    child.params = parent.params;
    const auto param_count = static_cast<std::size_t>(parent.params.size());
    const auto mutate_count = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(param_count)));
    std::vector<std::size_t> indices(param_count);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    // Partial Fisher-Yates: the first mutate_count entries become the subset.
    for (std::size_t i = 0; i < mutate_count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, param_count - 1);
        std::swap(indices[i], indices[pick(rng)]);
        child.params[static_cast<Eigen::Index>(indices[i])] += gaussian(rng, 0.0, sigma);
    }
    return child;
}

double mating_score_greedy(const Agent& x, const Agent& y) {
    if (!x.fitness_fresh || !y.fitness_fresh) {
        throw std::logic_error("mating_score_greedy: fitness is stale; evaluate agents first");
    }
    return x.fitness + y.fitness;
}

double mating_score_distance(const Agent& x, const Agent& y, int sample_size,
                             std::uint64_t seed_x_memory, std::uint64_t seed_y_memory) {
    if (x.memory.empty() || y.memory.empty()) {
        throw std::runtime_error("mating_score_distance: both parent memories must be non-empty");
    }
    if (sample_size <= 0) {
        throw std::invalid_argument("mating_score_distance: sample size must be positive");
    }
    const auto expectation_over = [&](const GeneticMemory& memory, std::uint64_t seed) {
        Rng rng = make_rng(seed);
        const Matrix states = memory.sample_states(rng, sample_size);
        const Matrix ax = forward(x.spec, x.params, states);
        const Matrix ay = forward(y.spec, y.params, states);
        return (ax - ay).colwise().squaredNorm().mean();
    };
    return expectation_over(x.memory, seed_x_memory) + expectation_over(y.memory, seed_y_memory);
}

std::vector<std::pair<int, int>> select_parents(const std::vector<Agent>& population,
                                                SelectionMode mode, int n_pairs,
                                                std::uint64_t seed, int distance_sample_size) {
    const int k = static_cast<int>(population.size());
    if (k < 2) {
        throw std::invalid_argument("select_parents: need at least two candidates");
    }
    if (n_pairs <= 0) {
        throw std::invalid_argument("select_parents: n_pairs must be positive");
    }

    std::vector<std::pair<int, int>> pairs;
    std::vector<double> scores;
    pairs.reserve(static_cast<std::size_t>(k) * (k - 1) / 2);
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            pairs.emplace_back(i, j);
            if (mode == SelectionMode::Greedy) {
                scores.push_back(mating_score_greedy(population[static_cast<std::size_t>(i)],
                                                     population[static_cast<std::size_t>(j)]));
            } else {
                scores.push_back(mating_score_distance(
                    population[static_cast<std::size_t>(i)],
                    population[static_cast<std::size_t>(j)], distance_sample_size,
                    derive_seed(seed, {0xd15au, static_cast<std::uint64_t>(i)}),
                    derive_seed(seed, {0xd15au, static_cast<std::uint64_t>(j)})));
            }
        }
    }

    const double min_score = *std::min_element(scores.begin(), scores.end());
    const double max_score = *std::max_element(scores.begin(), scores.end());
    std::vector<double> weights(scores.size(), 1.0);
    if (max_score > min_score) {
        for (std::size_t p = 0; p < scores.size(); ++p) {
            // Shift into positive territory only when necessary so already-
            // positive score ratios are preserved.
            weights[p] = min_score > 0.0
                             ? scores[p]
                             : scores[p] - min_score + 1e-3 * (max_score - min_score);
        }
    }

    Rng rng = make_rng(derive_seed(seed, {0x5e1ec7u}));
    std::vector<std::pair<int, int>> chosen;
    chosen.reserve(static_cast<std::size_t>(n_pairs));
    std::vector<double> pool = weights;
    while (static_cast<int>(chosen.size()) < n_pairs) {
        double total = std::accumulate(pool.begin(), pool.end(), 0.0);
        if (total <= 0.0) {
            pool = weights;  // pool exhausted: allow repeats from a fresh draw
            total = std::accumulate(pool.begin(), pool.end(), 0.0);
        }
        double ticket = uniform_real(rng, 0.0, total);
        std::size_t winner = 0;
        for (; winner + 1 < pool.size(); ++winner) {
            ticket -= pool[winner];
            if (ticket < 0.0) {
                break;
            }
        }
        while (pool[winner] <= 0.0 && winner > 0) {
            --winner;  // numerical spill past the last positive weight
        }
        chosen.push_back(pairs[winner]);
        pool[winner] = 0.0;  // keep drawn pairs distinct until pool refill
    }
    return chosen;
}

}  // namespace pderl
