#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "metatune/agents.hpp"
#include "metatune/behavioral_cloning.hpp"
#include "metatune/environments.hpp"
#include "metatune/rl_core.hpp"
#include "metatune/rng.hpp"

namespace metatune {

enum class MetricKind { mean_eval_reward, max_eval_reward, best_eval_score };

std::string to_string(MetricKind kind);
MetricKind parse_metric_kind(const std::string& text);

/// Score of one meta-episode from its periodic greedy evaluations.
///   mean_eval_reward: mean over every evaluation episode
///   max_eval_reward:  best single evaluation episode
///   best_eval_score:  best per-evaluation mean
double compute_metric(MetricKind kind, std::span<const EvaluationResult> evaluations);

struct TrainingBudget {
    int episodes = 1000;
    int eval_interval = 50;  ///< evaluate after every this many training episodes (and at the end)
    int eval_episodes = 5;

    friend bool operator==(const TrainingBudget&, const TrainingBudget&) = default;
};

struct MetaEpisodeResult {
    double y = 0.0;
    bool diverged = false;
    std::unique_ptr<Agent> final_agent;
    std::vector<EvaluationResult> evaluations;
    std::vector<double> training_returns;
    std::uint64_t train_steps = 0;
    std::uint64_t eval_steps = 0;
};

/// One query of the objective: a fresh agent built from `hyperparams`,
/// optionally BC-pretrained on `pretrain_demos`, trained for the budget with
/// periodic greedy evaluation, scored by `metric`. A zero-episode budget
/// still evaluates the untrained agent once. Non-finite learning sets
/// y to the environment's minimum return and flags `diverged`.
///
/// All randomness comes from sub-streams of `rng`, so the result is a pure
/// function of its arguments.
MetaEpisodeResult run_meta_episode(AgentKind kind, const std::map<std::string, double>& hyperparams,
                                   const EnvConfig& env_config, const TrainingBudget& budget, MetricKind metric,
                                   std::span<const Trajectory> pretrain_demos, const BcSettings& bc,
                                   const ReplaySettings& replay, const Rng& rng);

}  // namespace metatune
