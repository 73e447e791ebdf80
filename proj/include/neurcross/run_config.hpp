#pragma once

#include "neurcross/trainer.hpp"

#include <filesystem>
#include <string>

namespace neurcross {

/// Everything needed to reproduce a fit.  Serialized as JSON; unknown keys
/// are rejected so typos do not silently fall back to defaults.
struct RunConfig {
    std::filesystem::path mesh;
    TrainConfig train;
    bool feature_lines = true;  // honor `l` records of the mesh OBJ
};

RunConfig run_config_from_json(const std::string& text, const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);
/// Complete effective configuration, every field explicit.
std::string run_config_to_json(const RunConfig& cfg, int indent = 2);

} // namespace neurcross
