#pragma once

#include <string>

#include "pderl/env.hpp"
#include "pderl/evolution.hpp"

namespace pderl {

/// Everything a run needs, with paper-table defaults pre-filled. Files use a
/// flat `section.key = value` format; unknown keys are hard errors so typos
/// cannot silently corrupt a comparison.
struct RunConfig {
    EngineConfig engine;
    EnvId env_id = EnvId::PointMass2d;
    std::string out_dir = "out";
    int seeds = 1;  // seeded repetitions; repetition r uses master_seed + r
};

// Parses one `key = value` assignment into the config; throws
// std::invalid_argument naming the key on unknown keys or bad values.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical echo: parsing the output reproduces the config exactly.
std::string serialize_config(const RunConfig& cfg);
void save_config(const std::string& path, const RunConfig& cfg);

}  // namespace pderl
