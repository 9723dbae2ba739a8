#pragma once

#include <iosfwd>
#include <string>
#include <utility>

#include "pderl/adam.hpp"
#include "pderl/memory.hpp"
#include "pderl/net.hpp"

namespace pderl {

// Binary network record: a self-describing header (spec) followed by the raw
// canonical parameter list. Round trips are bit-exact.
void write_network(std::ostream& out, const NetworkSpec& spec, const Vector& params);
std::pair<NetworkSpec, Vector> read_network(std::istream& in);

void save_network(const std::string& path, const NetworkSpec& spec, const Vector& params);
std::pair<NetworkSpec, Vector> load_network(const std::string& path);

// Optimizer state embedded alongside its network in agent checkpoints.
void write_adam_state(std::ostream& out, const AdamState& state);
AdamState read_adam_state(std::istream& in);

// Line-delimited text dump of a transition ring; values are written as
// hexadecimal floating point so round trips are exact.
void save_memory(const std::string& path, const TransitionRing& memory);
GeneticMemory load_memory(const std::string& path);

}  // namespace pderl
