#include "pderl/checkpoint.hpp"

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pderl {
namespace {

constexpr char kNetworkMagic[8] = {'P', 'D', 'N', 'E', 'T', '0', '0', '1'};

void write_i32(std::ostream& out, std::int32_t value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

std::int32_t read_i32(std::istream& in) {
    std::int32_t value = 0;
    in.read(reinterpret_cast<char*>(&value), sizeof(value));
    if (!in) {
        throw std::runtime_error("network record truncated");
    }
    return value;
}

void write_i64(std::ostream& out, std::int64_t value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

std::int64_t read_i64(std::istream& in) {
    std::int64_t value = 0;
    in.read(reinterpret_cast<char*>(&value), sizeof(value));
    if (!in) {
        throw std::runtime_error("network record truncated");
    }
    return value;
}

void write_doubles(std::ostream& out, const Vector& values) {
    write_i64(out, values.size());
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(sizeof(double)) * values.size());
}

Vector read_doubles(std::istream& in) {
    const std::int64_t n = read_i64(in);
    if (n < 0) {
        throw std::runtime_error("network record corrupt: negative vector length");
    }
    Vector values(n);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(sizeof(double)) * n);
    if (!in) {
        throw std::runtime_error("network record truncated");
    }
    return values;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode) {
    std::ifstream in(path, mode);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "' for reading");
    }
    return in;
}

}  // namespace

void write_network(std::ostream& out, const NetworkSpec& spec, const Vector& params) {
    if (params.size() != spec.param_count()) {
        throw std::invalid_argument("write_network: parameter length does not match spec");
    }
    out.write(kNetworkMagic, sizeof(kNetworkMagic));
    write_i32(out, spec.input_dim);
    write_i32(out, static_cast<std::int32_t>(spec.hidden_dims.size()));
    for (int h : spec.hidden_dims) {
        write_i32(out, h);
    }
    write_i32(out, spec.output_dim);
    write_i32(out, spec.output_activation == Activation::Tanh ? 0 : 1);
    write_doubles(out, params);
    if (!out) {
        throw std::runtime_error("write_network: stream write failed");
    }
}

std::pair<NetworkSpec, Vector> read_network(std::istream& in) {
    char magic[sizeof(kNetworkMagic)] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::string(magic, sizeof(magic)) != std::string(kNetworkMagic, sizeof(kNetworkMagic))) {
        throw std::runtime_error("not a network record (bad magic)");
    }
    NetworkSpec spec;
    spec.input_dim = read_i32(in);
    const std::int32_t hidden_count = read_i32(in);
    if (hidden_count < 0) {
        throw std::runtime_error("network record corrupt: negative hidden-layer count");
    }
    spec.hidden_dims.resize(static_cast<std::size_t>(hidden_count));
    for (auto& h : spec.hidden_dims) {
        h = read_i32(in);
    }
    spec.output_dim = read_i32(in);
    spec.output_activation = read_i32(in) == 0 ? Activation::Tanh : Activation::Linear;
    spec.validate();
    Vector params = read_doubles(in);
    if (params.size() != spec.param_count()) {
        throw std::runtime_error("network record corrupt: parameter count mismatch");
    }
    return {spec, std::move(params)};
}

void save_network(const std::string& path, const NetworkSpec& spec, const Vector& params) {
    auto out = open_out(path, std::ios::binary);
    write_network(out, spec, params);
}

std::pair<NetworkSpec, Vector> load_network(const std::string& path) {
    auto in = open_in(path, std::ios::binary);
    return read_network(in);
}

void write_adam_state(std::ostream& out, const AdamState& state) {
    write_i64(out, state.step);
    const auto write_scalar = [&out](double v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    };
    write_scalar(state.learning_rate);
    write_scalar(state.beta1);
    write_scalar(state.beta2);
    write_scalar(state.epsilon);
    write_doubles(out, state.first_moment);
    write_doubles(out, state.second_moment);
}

AdamState read_adam_state(std::istream& in) {
    AdamState state;
    state.step = read_i64(in);
    const auto read_scalar = [&in]() {
        double v = 0.0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        if (!in) {
            throw std::runtime_error("optimizer record truncated");
        }
        return v;
    };
    state.learning_rate = read_scalar();
    state.beta1 = read_scalar();
    state.beta2 = read_scalar();
    state.epsilon = read_scalar();
    state.first_moment = read_doubles(in);
    state.second_moment = read_doubles(in);
    return state;
}

void save_memory(const std::string& path, const TransitionRing& memory) {
    auto out = open_out(path, std::ios::out);
    out << "pderl-memory 1\n";
    out << "capacity " << memory.capacity() << "\n";
    const Eigen::Index state_dim = memory.empty() ? 0 : memory[0].state.size();
    const Eigen::Index action_dim = memory.empty() ? 0 : memory[0].action.size();
    out << "dims " << state_dim << " " << action_dim << "\n";
    out << "count " << memory.size() << "\n";
    out << std::hexfloat;
    for (std::size_t i = 0; i < memory.size(); ++i) {
        const Transition& t = memory[i];
        for (Eigen::Index j = 0; j < t.state.size(); ++j) out << t.state[j] << " ";
        for (Eigen::Index j = 0; j < t.action.size(); ++j) out << t.action[j] << " ";
        out << t.reward << " ";
        for (Eigen::Index j = 0; j < t.next_state.size(); ++j) out << t.next_state[j] << " ";
        out << (t.done ? 1 : 0) << "\n";
    }
    if (!out) {
        throw std::runtime_error("save_memory: write to '" + path + "' failed");
    }
}

GeneticMemory load_memory(const std::string& path) {
    auto in = open_in(path, std::ios::in);
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "pderl-memory" || version != 1) {
        throw std::runtime_error("'" + path + "' is not a memory dump");
    }
    std::size_t capacity = 0;
    Eigen::Index state_dim = 0;
    Eigen::Index action_dim = 0;
    std::size_t count = 0;
    in >> tag >> capacity;
    if (tag != "capacity") throw std::runtime_error("memory dump corrupt: missing capacity");
    in >> tag >> state_dim >> action_dim;
    if (tag != "dims") throw std::runtime_error("memory dump corrupt: missing dims");
    in >> tag >> count;
    if (tag != "count") throw std::runtime_error("memory dump corrupt: missing count");

    GeneticMemory memory(capacity);
    // operator>> does not parse hexfloat portably; read tokens and strtod them.
    const auto read_value = [&in, &path]() {
        std::string token;
        if (!(in >> token)) {
            throw std::runtime_error("memory dump '" + path + "' truncated");
        }
        return std::strtod(token.c_str(), nullptr);
    };
    for (std::size_t i = 0; i < count; ++i) {
        Transition t;
        t.state.resize(state_dim);
        for (Eigen::Index j = 0; j < state_dim; ++j) t.state[j] = read_value();
        t.action.resize(action_dim);
        for (Eigen::Index j = 0; j < action_dim; ++j) t.action[j] = read_value();
        t.reward = read_value();
        t.next_state.resize(state_dim);
        for (Eigen::Index j = 0; j < state_dim; ++j) t.next_state[j] = read_value();
        t.done = read_value() != 0.0;
        memory.push(std::move(t));
    }
    return memory;
}

}  // namespace pderl
