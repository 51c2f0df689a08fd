#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metatune/meta_optimizer.hpp"

namespace metatune {

/// Everything needed to reproduce an experiment.
struct ExperimentConfig {
    std::string name;
    Problem problem;
    /// Named range set the space came from ("original", "broader", "ample"), if any.
    std::optional<std::string> space_preset;
    std::vector<OptimizerKind> optimizers{OptimizerKind::rlopt_bc, OptimizerKind::rlopt, OptimizerKind::random_search};
    OptimizerSettings settings;
    std::vector<std::uint64_t> seeds{0};

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Shipped range sets per agent kind: "original", "broader", "ample".
HyperparamSpace preset_space(AgentKind agent, const std::string& preset);
const std::vector<std::string>& preset_names();

/// Parses and validates a JSON config. Unknown keys are rejected.
/// Syntax errors throw ConfigError with line and column; semantic errors
/// throw ConfigError naming the offending field.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON with every default spelled out; parse_config inverts it.
std::string dump_config(const ExperimentConfig& config);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

/// Throws ConfigError naming the first violated field.
void validate(const ExperimentConfig& config);

/// FNV-1a of the canonical JSON.
std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace metatune
