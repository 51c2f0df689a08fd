#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "metatune/config.hpp"
#include "metatune/meta_optimizer.hpp"

namespace metatune {

struct RunOptions {
    std::optional<std::filesystem::path> out_root;  ///< --out; falls back to METATUNE_OUT, then "results"
    std::uint64_t seed_offset = 0;
    bool record_timing = true;  ///< false writes wallclock as 0 so output trees compare byte for byte
    int jobs = 1;
};

/// One finished execution and where it was written.
struct ExecutionRecord {
    std::uint64_t config_hash = 0;
    OptimizerKind optimizer = OptimizerKind::rlopt_bc;
    std::uint64_t seed = 0;
    std::vector<MetaEpisodeRecord> records;
    ThetaVector best_theta;
    double best_y = 0.0;
    std::uint64_t total_train_steps = 0;
    std::uint64_t total_rollout_steps = 0;
    double total_wallclock_ms = 0.0;
    std::filesystem::path dir;
};

std::filesystem::path resolve_output_root(const std::optional<std::filesystem::path>& flag);

/// <root>/<name>/<optimizer>/seed<k>
std::filesystem::path execution_dir(const std::filesystem::path& root, const std::string& name, OptimizerKind kind,
                                    std::uint64_t seed);

/// Runs every optimizer for every seed (+ offset) and writes records.csv,
/// summary.json, dataset.json and demos.jsonl per execution. The output
/// directory is checked for writability before anything is computed.
std::vector<ExecutionRecord> run_experiment(const ExperimentConfig& config, const RunOptions& options);

/// records.csv content: meta_episode, one column per searched hyperparameter
/// (native units), y, best_so_far, is_new_max, train_steps, rollout_steps, wallclock_ms.
std::string records_csv(const HyperparamSpace& space, const std::vector<MetaEpisodeRecord>& records);

/// Shortest round-trip decimal text.
std::string format_number(double value);

/// Writes to a sibling temp file then renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct ReportResult {
    std::vector<ComparisonRow> rows;
    std::size_t executions_used = 0;
    std::vector<std::string> warnings;  ///< one per excluded or missing execution
    std::filesystem::path comparison_csv;
    std::filesystem::path long_csv;
};

/// Collects executions under the given directories (searched recursively),
/// excludes partial ones, aggregates per optimizer and writes comparison.csv
/// (optimizer, meta_episode, mean_best, ci_low, ci_high, mean_reward) and
/// comparison_long.csv into out_dir.
ReportResult report(const std::vector<std::filesystem::path>& dirs, const std::filesystem::path& out_dir);

/// comparison.csv content for already aggregated rows.
std::string comparison_csv(const std::vector<ComparisonRow>& rows);
std::string comparison_long_csv(const std::vector<ComparisonRow>& rows);

}  // namespace metatune
