#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metatune/acquisition.hpp"
#include "metatune/agents.hpp"
#include "metatune/behavioral_cloning.hpp"
#include "metatune/environments.hpp"
#include "metatune/gp.hpp"
#include "metatune/hparam_space.hpp"
#include "metatune/meta_episode.hpp"

namespace metatune {

enum class OptimizerKind { rlopt_bc, rlopt, random_search };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(const std::string& text);

/// What is being tuned: agent, environment, searched dimensions and the
/// fixed values of any pinned hyperparameters.
struct Problem {
    AgentKind agent = AgentKind::tabular_q_per;
    EnvConfig env;
    HyperparamSpace space;
    std::map<std::string, double> pinned;
    TrainingBudget budget;
    MetricKind metric = MetricKind::best_eval_score;
    ReplaySettings replay;

    /// Full hyperparameter assignment: searched values plus pinned ones.
    [[nodiscard]] std::map<std::string, double> resolve(const ThetaVector& theta) const;

    friend bool operator==(const Problem&, const Problem&) = default;
};

struct OptimizerSettings {
    int meta_episodes = 10;
    int n_init = 2;                   ///< LHS bootstrap points before the GP path starts
    int m = 10;                       ///< top-EI candidates rolled out per acquisition
    int batch_size = static_cast<int>(kDefaultCandidateBatch);
    CandidateSampler sampler = CandidateSampler::lhs;
    int rollout_episodes = 0;         ///< 0 = 2.5% of the training budget, at least 3
    bool bc_enabled = true;
    bool skip_rollouts = false;
    int psi_size = 5;
    int demo_sample = 3;
    BcSettings bc;
    double random_search_radius = 0.2;

    [[nodiscard]] int effective_rollout_episodes(const TrainingBudget& budget) const;

    friend bool operator==(const OptimizerSettings&, const OptimizerSettings&) = default;
};

/// Per-candidate log of one EI-BC acquisition call.
struct CandidateTrace {
    ThetaVector theta;
    double gp_ei = 0.0;
    double predicted_mean = 0.0;
    double predicted_std = 0.0;
    double rollout_mean = 0.0;
    double rollout_std = 0.0;
    double rollout_ei = 0.0;
    bool diverged = false;
};

struct AcquisitionResult {
    ThetaVector theta;
    std::size_t chosen_rank = 0;  ///< position of the choice in the GP-EI ranking
    std::vector<CandidateTrace> trace;
    std::uint64_t rollout_steps = 0;
};

/// Two-step acquisition: shortlist the top-m GP-EI candidates from a fresh
/// batch, then BC-pretrain one agent per candidate on a shared demo subset,
/// train it for a few episodes, and score it by EI of the empirical return
/// moments. Returns the best candidate, ties going to the higher GP-EI rank.
/// With m = 1 or skip_rollouts the GP-EI winner is returned directly.
AcquisitionResult ei_bc_acquisition(const GPModel& model, const Problem& problem, const OptimizerSettings& settings,
                                    double f_star, const DemonstrationSet& psi, const Rng& rng);

struct MetaEpisodeRecord {
    int index = 0;  ///< 1-based
    ThetaVector theta;
    double y = 0.0;
    double best_so_far = 0.0;
    bool is_new_max = false;
    bool diverged = false;
    std::uint64_t train_steps = 0;
    std::uint64_t rollout_steps = 0;
    double wallclock_ms = 0.0;
    std::uint64_t seed = 0;
    std::vector<CandidateTrace> acquisition_trace;
};

struct OptimizationResult {
    OptimizerKind kind = OptimizerKind::rlopt_bc;
    ThetaVector best_theta;
    double best_y = 0.0;
    std::vector<MetaEpisodeRecord> records;
    ObservationDataset dataset;
    DemonstrationSet psi;
    std::uint64_t seed = 0;
};

/// One execution of any optimizer kind. All randomness derives from `seed`.
/// With record_timing = false, wallclock fields are written as zero.
OptimizationResult run_optimizer(OptimizerKind kind, const Problem& problem, const OptimizerSettings& settings,
                                 std::uint64_t seed, bool record_timing = true);

/// Bayesian optimization with the EI-BC acquisition and the demonstration
/// lifecycle: bootstrap by LHS, BC-pretrain every fresh agent from a sampled
/// demo subset, and regenerate the demonstrations whenever a new maximum appears.
OptimizationResult optimize(const Problem& problem, const OptimizerSettings& settings, std::uint64_t seed,
                            bool record_timing = true);

/// Per-meta-episode aggregate over executions of one optimizer.
struct ComparisonRow {
    std::string optimizer;
    int meta_episode = 0;  ///< 1-based
    std::size_t executions = 0;
    double mean_best = 0.0;
    double best_ci_half_width = 0.0;    ///< 1.96 s / sqrt(k); 0 for a single execution
    double mean_reward = 0.0;
    double reward_ci_half_width = 0.0;
};

using ExecutionScores = std::vector<std::vector<double>>;  ///< y per meta-episode, one row per execution

/// Throws ShapeError when executions of an optimizer differ in length.
std::vector<ComparisonRow> aggregate_executions(const std::vector<std::pair<std::string, ExecutionScores>>& scores);

std::vector<double> running_max(std::span<const double> ys);

/// Runs every optimizer for every seed and aggregates.
std::vector<ComparisonRow> run_comparison(const std::vector<OptimizerKind>& optimizers, const Problem& problem,
                                          const OptimizerSettings& settings, std::span<const std::uint64_t> seeds);

}  // namespace metatune
