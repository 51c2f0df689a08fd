#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "metatune/agents.hpp"
#include "metatune/rl_core.hpp"
#include "metatune/rng.hpp"

namespace metatune {

/// Demonstrations from the best policy found so far.
struct DemonstrationSet {
    std::vector<Trajectory> trajectories;
    int source_meta_episode = -1;
    double source_score = 0.0;

    [[nodiscard]] bool empty() const noexcept { return trajectories.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return trajectories.size(); }
};

/// Runs `policy` greedily for `episodes` full episodes and keeps the trajectories.
DemonstrationSet record_demonstrations(const Policy& policy, Environment& env, int episodes);

/// min(count, |psi|) trajectories drawn uniformly without replacement.
std::vector<Trajectory> sample_demos(const DemonstrationSet& psi, std::size_t count, Rng& rng);

struct StateActionPair {
    Observation state;
    int action = 0;
};

std::vector<StateActionPair> state_action_pairs(std::span<const Trajectory> demos);

using ActionDistribution = std::function<std::vector<double>(const Observation&)>;

/// Mean of -log pi(a|s) over the pairs. Throws DomainError for an empty set.
double bc_loss(const ActionDistribution& policy, std::span<const StateActionPair> pairs);
double bc_loss(const PGAgent& agent, std::span<const StateActionPair> pairs);

struct BcSettings {
    double learning_rate = 0.05;
    int max_epochs = 50;
    int patience = 3;                  ///< consecutive validation-loss increases before stopping
    double validation_fraction = 0.2;
    double margin = 0.1;               ///< tabular large-margin bump
    bool use_theta_lr = false;         ///< use the agent's alpha_lr instead of learning_rate

    friend bool operator==(const BcSettings&, const BcSettings&) = default;
};

struct PretrainReport {
    int epochs = 0;
    double train_loss = 0.0;
    double validation_loss = 0.0;
    bool stopped_early = false;
};

/// Supervised cross-entropy fit of the softmax policy to demonstrated pairs:
/// shuffled train/validation split, per-pair SGD epochs, early stop on
/// `patience` consecutive validation-loss increases.
PretrainReport pretrain_linear(PGAgent& agent, std::span<const Trajectory> demos, const BcSettings& settings, Rng& rng);

/// Q(s,a) <- max(Q(s,a), max_{a' != a} Q(s,a') + margin) for each demonstrated pair.
void pretrain_tabular(QAgent& agent, std::span<const Trajectory> demos, const BcSettings& settings);

/// Dispatches on the agent type. Empty demos leave the agent untouched.
void pretrain(Agent& agent, std::span<const Trajectory> demos, const BcSettings& settings, Rng& rng);

/// One JSON object per transition:
/// {"episode","step","state":{"id","features"},"action","reward","next_state":{...},"done"}.
void write_demos_jsonl(std::ostream& out, const DemonstrationSet& psi);
DemonstrationSet read_demos_jsonl(std::istream& in);

}  // namespace metatune
