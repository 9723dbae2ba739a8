#include "pderl/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pderl {
namespace {

std::string trim(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
    throw std::invalid_argument("config key '" + key + "': cannot parse '" + value + "' as " +
                                expected);
}

long long parse_integer(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long parsed = std::stoll(value, &pos);
        if (pos != value.size()) {
            bad_value(key, value, "an integer");
        }
        return parsed;
    } catch (const std::invalid_argument&) {
        bad_value(key, value, "an integer");
    } catch (const std::out_of_range&) {
        bad_value(key, value, "an integer");
    }
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long parsed = std::stoull(value, &pos);
        if (pos != value.size() || value.front() == '-') {
            bad_value(key, value, "an unsigned integer");
        }
        return parsed;
    } catch (const std::invalid_argument&) {
        bad_value(key, value, "an unsigned integer");
    } catch (const std::out_of_range&) {
        bad_value(key, value, "an unsigned integer");
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double parsed = std::stod(value, &pos);
        if (pos != value.size()) {
            bad_value(key, value, "a real number");
        }
        return parsed;
    } catch (const std::invalid_argument&) {
        bad_value(key, value, "a real number");
    } catch (const std::out_of_range&) {
        bad_value(key, value, "a real number");
    }
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> result;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ',')) {
        result.push_back(static_cast<int>(parse_integer(key, trim(item))));
    }
    if (result.empty()) {
        bad_value(key, value, "a comma-separated integer list");
    }
    return result;
}

std::string fmt_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    EngineConfig& e = cfg.engine;
    if (key == "env.id") {
        cfg.env_id = parse_env_id(value);
    } else if (key == "run.out_dir") {
        cfg.out_dir = value;
    } else if (key == "run.seeds") {
        cfg.seeds = static_cast<int>(parse_integer(key, value));
    } else if (key == "run.master_seed") {
        e.master_seed = parse_unsigned(key, value);
    } else if (key == "run.frame_budget") {
        e.frame_budget = parse_integer(key, value);
    } else if (key == "evolution.population_size") {
        e.population_size = static_cast<int>(parse_integer(key, value));
    } else if (key == "evolution.elite_fraction") {
        e.elite_fraction = parse_real(key, value);
    } else if (key == "evolution.trials") {
        e.trials = static_cast<int>(parse_integer(key, value));
    } else if (key == "evolution.sync_period") {
        e.sync_period = static_cast<int>(parse_integer(key, value));
    } else if (key == "evolution.mutation_probability") {
        e.mutation_probability = parse_real(key, value);
    } else if (key == "evolution.mode") {
        e.mode = parse_mode(value);
    } else if (key == "evolution.selection") {
        if (value == "greedy") {
            e.selection = SelectionMode::Greedy;
        } else if (value == "distance") {
            e.selection = SelectionMode::Distance;
        } else {
            bad_value(key, value, "greedy or distance");
        }
    } else if (key == "evolution.kappa") {
        e.kappa = static_cast<std::size_t>(parse_unsigned(key, value));
    } else if (key == "evolution.gaussian_fraction") {
        e.gaussian_fraction = parse_real(key, value);
    } else if (key == "network.hidden_dims") {
        e.hidden_dims = parse_int_list(key, value);
    } else if (key == "crossover.batch_size") {
        e.crossover.batch_size = static_cast<int>(parse_integer(key, value));
    } else if (key == "crossover.epochs") {
        e.crossover.epochs = static_cast<int>(parse_integer(key, value));
    } else if (key == "crossover.learning_rate") {
        e.crossover.learning_rate = parse_real(key, value);
    } else if (key == "crossover.reg_weight") {
        e.crossover.reg_weight = parse_real(key, value);
    } else if (key == "mutation.sigma") {
        e.mutation.sigma = parse_real(key, value);
    } else if (key == "mutation.batch_size") {
        e.mutation.batch_size = static_cast<int>(parse_integer(key, value));
    } else if (key == "mutation.sensitivity_floor") {
        e.mutation.sensitivity_floor = parse_real(key, value);
    } else if (key == "rl.actor_lr") {
        e.rl.actor_lr = parse_real(key, value);
    } else if (key == "rl.critic_lr") {
        e.rl.critic_lr = parse_real(key, value);
    } else if (key == "rl.discount") {
        e.rl.discount = parse_real(key, value);
    } else if (key == "rl.tau") {
        e.rl.tau = parse_real(key, value);
    } else if (key == "rl.batch_size") {
        e.rl.batch_size = static_cast<int>(parse_integer(key, value));
    } else if (key == "rl.exploration_noise") {
        e.rl.exploration_noise = parse_real(key, value);
    } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream stream(text);
    std::string line;
    int line_number = 0;
    while (std::getline(stream, line)) {
        ++line_number;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') {
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_number) +
                                        ": expected 'key = value', got '" + stripped + "'");
        }
        try {
            apply_config_entry(cfg, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
        } catch (const std::invalid_argument& err) {
            throw std::invalid_argument("config line " + std::to_string(line_number) + ": " +
                                        err.what());
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

std::string serialize_config(const RunConfig& cfg) {
    const EngineConfig& e = cfg.engine;
    std::ostringstream out;
    out << "env.id = " << to_string(cfg.env_id) << "\n";
    out << "run.out_dir = " << cfg.out_dir << "\n";
    out << "run.seeds = " << cfg.seeds << "\n";
    out << "run.master_seed = " << e.master_seed << "\n";
    out << "run.frame_budget = " << e.frame_budget << "\n";
    out << "evolution.population_size = " << e.population_size << "\n";
    out << "evolution.elite_fraction = " << fmt_double(e.elite_fraction) << "\n";
    out << "evolution.trials = " << e.trials << "\n";
    out << "evolution.sync_period = " << e.sync_period << "\n";
    out << "evolution.mutation_probability = " << fmt_double(e.mutation_probability) << "\n";
    out << "evolution.mode = " << to_string(e.mode) << "\n";
    out << "evolution.selection = "
        << (e.selection == SelectionMode::Greedy ? "greedy" : "distance") << "\n";
    out << "evolution.kappa = " << e.kappa << "\n";
    out << "evolution.gaussian_fraction = " << fmt_double(e.gaussian_fraction) << "\n";
    out << "network.hidden_dims = ";
    for (std::size_t i = 0; i < e.hidden_dims.size(); ++i) {
        if (i > 0) out << ",";
        out << e.hidden_dims[i];
    }
    out << "\n";
    out << "crossover.batch_size = " << e.crossover.batch_size << "\n";
    out << "crossover.epochs = " << e.crossover.epochs << "\n";
    out << "crossover.learning_rate = " << fmt_double(e.crossover.learning_rate) << "\n";
    out << "crossover.reg_weight = " << fmt_double(e.crossover.reg_weight) << "\n";
    out << "mutation.sigma = " << fmt_double(e.mutation.sigma) << "\n";
    out << "mutation.batch_size = " << e.mutation.batch_size << "\n";
    out << "mutation.sensitivity_floor = " << fmt_double(e.mutation.sensitivity_floor) << "\n";
    out << "rl.actor_lr = " << fmt_double(e.rl.actor_lr) << "\n";
    out << "rl.critic_lr = " << fmt_double(e.rl.critic_lr) << "\n";
    out << "rl.discount = " << fmt_double(e.rl.discount) << "\n";
    out << "rl.tau = " << fmt_double(e.rl.tau) << "\n";
    out << "rl.batch_size = " << e.rl.batch_size << "\n";
    out << "rl.exploration_noise = " << fmt_double(e.rl.exploration_noise) << "\n";
    return out.str();
}

void save_config(const std::string& path, const RunConfig& cfg) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << serialize_config(cfg);
}

}  // namespace pderl
