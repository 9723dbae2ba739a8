#include "pderl/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pderl {
namespace {

// Seed-path tags for the independent random streams of one run.
enum SeedStream : std::uint64_t {
    kInitPopulation = 1,
    kInitRl = 2,
    kEvaluation = 3,
    kSelection = 4,
    kVariation = 5,
    kRlRollout = 6,
    kRlTraining = 7,
    kRlNoise = 8,
};

std::string fmt_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

RlAgent make_rl_agent(const EngineConfig& cfg, const EnvSpec& env_spec) {
    RlConfig rl_cfg = cfg.rl;
    rl_cfg.personal_memory_capacity = cfg.kappa;
    Rng rng = make_rng(derive_seed(cfg.master_seed, {kInitRl}));
    return RlAgent(policy_spec(env_spec.state_dim, env_spec.action_dim, cfg.hidden_dims),
                   critic_spec(env_spec.state_dim, env_spec.action_dim, cfg.hidden_dims), rl_cfg,
                   rng);
}

}  // namespace

Mode parse_mode(const std::string& name) {
    if (name == "erl") return Mode::ErlBaseline;
    if (name == "perl") return Mode::Perl;
    if (name == "derl") return Mode::Derl;
    if (name == "pderl") return Mode::Pderl;
    throw std::invalid_argument("unknown mode '" + name + "' (expected erl|perl|derl|pderl)");
}

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::ErlBaseline: return "erl";
        case Mode::Perl: return "perl";
        case Mode::Derl: return "derl";
        case Mode::Pderl: return "pderl";
    }
    return "pderl";
}

std::string to_string(RlStatus status) {
    switch (status) {
        case RlStatus::NotSynced: return "not_synced";
        case RlStatus::Elite: return "elite";
        case RlStatus::Selected: return "selected";
        case RlStatus::Discarded: return "discarded";
    }
    return "not_synced";
}

std::string report_header() {
    return "generation\tframes\tbest_fitness\tmean_fitness\trl_status\tcritic_loss\trl_slot\t"
           "evaluation_only\tfitness_per_slot\tslot_audits";
}

std::string format_report(const GenerationReport& report) {
    std::ostringstream out;
    out << report.generation << '\t' << report.frames << '\t' << fmt_double(report.best_fitness)
        << '\t' << fmt_double(report.mean_fitness) << '\t' << to_string(report.rl_status) << '\t'
        << fmt_double(report.critic_loss) << '\t' << report.rl_slot << '\t'
        << (report.evaluation_only ? 1 : 0) << '\t';
    for (std::size_t i = 0; i < report.fitness.size(); ++i) {
        if (i > 0) out << ';';
        out << fmt_double(report.fitness[i]);
    }
    out << '\t';
    for (std::size_t i = 0; i < report.audits.size(); ++i) {
        const SlotAudit& audit = report.audits[i];
        if (i > 0) out << ';';
        out << audit.slot << ':' << audit.origin << ':' << audit.parent_a << ':'
            << audit.parent_b << ':' << (audit.mutated ? 1 : 0);
    }
    return out.str();
}

GenerationReport parse_report_line(const std::string& line) {
    std::vector<std::string> columns;
    std::string::size_type start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        columns.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) {
            break;
        }
        start = tab + 1;
    }
    if (columns.size() != 10) {
        throw std::invalid_argument("generation record has " + std::to_string(columns.size()) +
                                    " columns, expected 10");
    }
    const auto parse_status = [](const std::string& name) {
        if (name == "not_synced") return RlStatus::NotSynced;
        if (name == "elite") return RlStatus::Elite;
        if (name == "selected") return RlStatus::Selected;
        if (name == "discarded") return RlStatus::Discarded;
        throw std::invalid_argument("unknown rl status '" + name + "'");
    };
    GenerationReport report;
    report.generation = std::stoi(columns[0]);
    report.frames = std::stol(columns[1]);
    report.best_fitness = std::stod(columns[2]);
    report.mean_fitness = std::stod(columns[3]);
    report.rl_status = parse_status(columns[4]);
    report.critic_loss = std::stod(columns[5]);
    report.rl_slot = std::stoi(columns[6]);
    report.evaluation_only = columns[7] == "1";
    const auto split = [](const std::string& field, char sep) {
        std::vector<std::string> parts;
        if (field.empty()) {
            return parts;
        }
        std::string::size_type begin = 0;
        while (true) {
            const auto pos = field.find(sep, begin);
            parts.push_back(field.substr(begin, pos - begin));
            if (pos == std::string::npos) {
                break;
            }
            begin = pos + 1;
        }
        return parts;
    };
    for (const std::string& value : split(columns[8], ';')) {
        report.fitness.push_back(std::stod(value));
    }
    for (const std::string& entry : split(columns[9], ';')) {
        const std::vector<std::string> fields = split(entry, ':');
        if (fields.size() != 5) {
            throw std::invalid_argument("malformed slot audit '" + entry + "'");
        }
        report.audits.push_back(SlotAudit{std::stoi(fields[0]), fields[1], std::stoi(fields[2]),
                                          std::stoi(fields[3]), fields[4] == "1"});
    }
    return report;
}

void EngineConfig::validate() const {
    if (population_size < 2) {
        throw std::invalid_argument("population_size must be at least 2");
    }
    if (elite_fraction <= 0.0 || elite_fraction > 1.0 ||
        std::ceil(elite_fraction * population_size) < 1.0) {
        throw std::invalid_argument("elite_fraction must lie in (0, 1] with at least one elite");
    }
    if (trials < 1) {
        throw std::invalid_argument("trials must be at least 1");
    }
    if (sync_period < 1) {
        throw std::invalid_argument("sync_period must be at least 1");
    }
    if (mutation_probability < 0.0 || mutation_probability > 1.0) {
        throw std::invalid_argument("mutation_probability must lie in [0, 1]");
    }
    if (frame_budget < 0) {
        throw std::invalid_argument("frame_budget must be non-negative");
    }
    if (kappa == 0) {
        throw std::invalid_argument("kappa must be positive");
    }
    if (gaussian_fraction <= 0.0 || gaussian_fraction > 1.0) {
        throw std::invalid_argument("gaussian_fraction must lie in (0, 1]");
    }
    for (int h : hidden_dims) {
        if (h <= 0) {
            throw std::invalid_argument("hidden_dims entries must be positive");
        }
    }
}

std::pair<std::vector<int>, std::vector<int>> rank_and_elites(const std::vector<double>& fitnesses,
                                                              double psi, int k) {
    if (static_cast<int>(fitnesses.size()) != k) {
        throw std::invalid_argument("rank_and_elites: expected exactly k fitness values");
    }
    if (psi <= 0.0 || psi > 1.0) {
        throw std::invalid_argument("rank_and_elites: psi must lie in (0, 1]");
    }
    const int n_elites = std::min(k, static_cast<int>(std::ceil(psi * k)));
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&fitnesses](int a, int b) {
        if (fitnesses[static_cast<std::size_t>(a)] != fitnesses[static_cast<std::size_t>(b)]) {
            return fitnesses[static_cast<std::size_t>(a)] >
                   fitnesses[static_cast<std::size_t>(b)];
        }
        return a < b;
    });
    std::vector<int> elites(order.begin(), order.begin() + n_elites);
    std::vector<int> rest(order.begin() + n_elites, order.end());
    return {std::move(elites), std::move(rest)};
}

RlSelectionRates track_rl_status(const std::vector<GenerationReport>& reports) {
    RlSelectionRates rates;
    int elite = 0;
    int selected = 0;
    int discarded = 0;
    for (const GenerationReport& report : reports) {
        switch (report.rl_status) {
            case RlStatus::Elite: ++elite; break;
            case RlStatus::Selected: ++selected; break;
            case RlStatus::Discarded: ++discarded; break;
            case RlStatus::NotSynced: break;
        }
    }
    rates.synced_generations = elite + selected + discarded;
    if (rates.synced_generations > 0) {
        const double denom = rates.synced_generations;
        rates.elite_pct = 100.0 * elite / denom;
        rates.selected_pct = 100.0 * selected / denom;
        rates.discarded_pct = 100.0 * discarded / denom;
    }
    return rates;
}

EvolutionEngine::EvolutionEngine(const EngineConfig& cfg, EnvId env_id)
    : cfg_(cfg), env_(make_env(env_id)), rl_(make_rl_agent(cfg, env_->spec())) {
    cfg_.validate();
    const EnvSpec& env_spec = env_->spec();
    const NetworkSpec actor = policy_spec(env_spec.state_dim, env_spec.action_dim, cfg_.hidden_dims);
    population_.reserve(static_cast<std::size_t>(cfg_.population_size));
    for (int i = 0; i < cfg_.population_size; ++i) {
        Rng rng = make_rng(
            derive_seed(cfg_.master_seed, {kInitPopulation, static_cast<std::uint64_t>(i)}));
        population_.push_back(make_agent(actor, cfg_.kappa, rng));
    }
}

void EvolutionEngine::evaluate_population(int generation) {
    last_fitness_.assign(population_.size(), 0.0);
    for (std::size_t i = 0; i < population_.size(); ++i) {
        Agent& agent = population_[i];
        const std::uint64_t seed = derive_seed(
            cfg_.master_seed,
            {kEvaluation, static_cast<std::uint64_t>(generation), static_cast<std::uint64_t>(i)});
        agent.fitness = evaluate_fitness(*env_, network_policy(agent.spec, agent.params),
                                         cfg_.trials, seed, &agent.memory, &shared_buffer_,
                                         &frames_);
        agent.fitness_fresh = true;
        last_fitness_[i] = agent.fitness;
    }
}

int EvolutionEngine::champion_slot() const {
    if (last_fitness_.empty()) {
        throw std::logic_error("champion_slot: no generation has been evaluated yet");
    }
    return static_cast<int>(
        std::max_element(last_fitness_.begin(), last_fitness_.end()) - last_fitness_.begin());
}

GenerationReport EvolutionEngine::run_generation() {
    const int g = ++generation_;
    const auto gen_u64 = static_cast<std::uint64_t>(g);
    const int k = cfg_.population_size;

    GenerationReport report;
    report.generation = g;
    const long frames_at_gen_start = frames_;

    evaluate_population(g);
    report.fitness = last_fitness_;
    report.best_fitness = *std::max_element(last_fitness_.begin(), last_fitness_.end());
    report.mean_fitness =
        std::accumulate(last_fitness_.begin(), last_fitness_.end(), 0.0) / k;

    if (frames_ >= cfg_.frame_budget) {
        // Budget ran out: stop after the evaluation phase. No variation or
        // sync happens, so a pending clone's fate stays unresolved.
        report.evaluation_only = true;
        report.frames = frames_;
        return report;
    }

    const auto [elites, rest] = rank_and_elites(last_fitness_, cfg_.elite_fraction, k);
    const int n_children = k - static_cast<int>(elites.size());
    std::vector<std::pair<int, int>> pairs;
    if (n_children > 0) {
        pairs = select_parents(population_, cfg_.selection, n_children,
                               derive_seed(cfg_.master_seed, {kSelection, gen_u64}));
    }

    if (pending_rl_slot_ >= 0) {
        const bool is_elite =
            std::find(elites.begin(), elites.end(), pending_rl_slot_) != elites.end();
        const bool is_parent =
            std::any_of(pairs.begin(), pairs.end(), [this](const std::pair<int, int>& p) {
                return p.first == pending_rl_slot_ || p.second == pending_rl_slot_;
            });
        report.rl_status =
            is_elite ? RlStatus::Elite : (is_parent ? RlStatus::Selected : RlStatus::Discarded);
        pending_rl_slot_ = -1;
    }

    // Variation: elites keep their slots untouched; every other slot is
    // filled by a crossover child, each independently mutated with the
    // configured probability.
    const bool distill = cfg_.mode == Mode::Derl || cfg_.mode == Mode::Pderl;
    const bool proximal = cfg_.mode == Mode::Perl || cfg_.mode == Mode::Pderl;
    std::vector<Agent> next(population_.size());
    report.audits.reserve(population_.size());
    for (int slot : elites) {
        next[static_cast<std::size_t>(slot)] = population_[static_cast<std::size_t>(slot)];
        report.audits.push_back(SlotAudit{slot, "elite", -1, -1, false});
    }
    for (std::size_t c = 0; c < pairs.size(); ++c) {
        const int slot = rest[c];
        const auto [pa, pb] = pairs[c];
        Rng rng = make_rng(derive_seed(cfg_.master_seed,
                                       {kVariation, gen_u64, static_cast<std::uint64_t>(c)}));
        const Agent& parent_a = population_[static_cast<std::size_t>(pa)];
        const Agent& parent_b = population_[static_cast<std::size_t>(pb)];
        Agent child = distill
                          ? distillation_crossover(parent_a, parent_b, rl_, cfg_.crossover,
                                                   cfg_.kappa, rng)
                          : npoint_crossover(parent_a, parent_b, cfg_.kappa, rng);
        bool mutated = false;
        if (uniform_real(rng, 0.0, 1.0) < cfg_.mutation_probability) {
            mutated = true;
            child = proximal ? proximal_mutation(child, cfg_.mutation, rng)
                             : gaussian_mutation(child, cfg_.mutation.sigma,
                                                 cfg_.gaussian_fraction, rng);
        }
        next[static_cast<std::size_t>(slot)] = std::move(child);
        report.audits.push_back(SlotAudit{slot, "crossover", pa, pb, mutated});
    }
    population_ = std::move(next);

    // RL phase: one exploration episode feeds the shared buffer and the
    // agent's personal memory, then one train step per frame collected this
    // generation (population evaluations plus the exploration episode).
    {
        Vector state = env_->reset(derive_seed(cfg_.master_seed, {kRlRollout, gen_u64}));
        Rng noise_rng = make_rng(derive_seed(cfg_.master_seed, {kRlNoise, gen_u64}));
        bool done = false;
        while (!done) {
            Vector action =
                rl_.exploration_action(state, cfg_.rl.exploration_noise, noise_rng);
            StepResult step = env_->step(action);
            Transition transition{state, std::move(action), step.reward, step.next_state,
                                  step.done};
            rl_.personal_memory().push(transition);
            shared_buffer_.push(std::move(transition));
            state = std::move(step.next_state);
            done = step.done;
            ++frames_;
        }
    }
    {
        Rng train_rng = make_rng(derive_seed(cfg_.master_seed, {kRlTraining, gen_u64}));
        const long frames_this_generation = frames_ - frames_at_gen_start;
        for (long t = 0; t < frames_this_generation; ++t) {
            const TrainDiagnostics diag = rl_.train_step(shared_buffer_, train_rng);
            if (diag.trained) {
                report.critic_loss = diag.critic_loss;
            }
        }
    }

    if (g % cfg_.sync_period == 0) {
        const int worst = static_cast<int>(
            std::min_element(last_fitness_.begin(), last_fitness_.end()) - last_fitness_.begin());
        Agent clone;
        clone.spec = rl_.actor_spec();
        clone.params = rl_.actor_params();
        clone.memory = rl_.personal_memory();
        population_[static_cast<std::size_t>(worst)] = std::move(clone);
        for (SlotAudit& audit : report.audits) {
            if (audit.slot == worst) {
                audit = SlotAudit{worst, "rl_clone", -1, -1, false};
            }
        }
        pending_rl_slot_ = worst;
        report.rl_slot = worst;
    }

    report.frames = frames_;
    return report;
}

std::vector<GenerationReport> EvolutionEngine::run() {
    std::vector<GenerationReport> reports;
    while (!done()) {
        reports.push_back(run_generation());
    }
    return reports;
}

}  // namespace pderl
