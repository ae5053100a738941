#pragma once

#include <string>

#include "factorizenet/arch.hpp"
#include "factorizenet/train.hpp"

namespace fznet {

/// CLI-facing configuration: macroarchitecture plus training recipe.
struct ToolConfig {
    MacroArchConfig arch;
    TrainConfig train;
};

/// Reads a JSON config file. Both top-level sections ("arch", "train") and
/// every key are optional; unknown keys are rejected.
ToolConfig load_config(const std::string& path);

ToolConfig parse_config_json(const std::string& text);

}  // namespace fznet
