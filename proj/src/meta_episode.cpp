#include "metatune/meta_episode.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "metatune/errors.hpp"

namespace metatune {

std::string to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::mean_eval_reward: return "mean_eval_reward";
        case MetricKind::max_eval_reward: return "max_eval_reward";
        case MetricKind::best_eval_score: return "best_eval_score";
    }
    return "unknown";
}

MetricKind parse_metric_kind(const std::string& text) {
    if (text == "mean_eval_reward") return MetricKind::mean_eval_reward;
    if (text == "max_eval_reward") return MetricKind::max_eval_reward;
    if (text == "best_eval_score") return MetricKind::best_eval_score;
    throw ConfigError("metric", "unknown metric '" + text + "'");
}

double compute_metric(MetricKind kind, std::span<const EvaluationResult> evaluations) {
    std::size_t count = 0;
    for (const auto& e : evaluations) count += e.episode_returns.size();
    if (count == 0) throw DomainError("compute_metric: no evaluation episodes");

    switch (kind) {
        case MetricKind::mean_eval_reward: {
            double total = 0.0;
            for (const auto& e : evaluations)
                total += std::accumulate(e.episode_returns.begin(), e.episode_returns.end(), 0.0);
            return total / static_cast<double>(count);
        }
        case MetricKind::max_eval_reward: {
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& e : evaluations)
                for (const double r : e.episode_returns) best = std::max(best, r);
            return best;
        }
        case MetricKind::best_eval_score: {
            bool seen = false;
            double best = 0.0;
            for (const auto& e : evaluations) {
                if (e.episode_returns.empty()) continue;
                best = seen ? std::max(best, e.mean) : e.mean;
                seen = true;
            }
            return best;
        }
    }
    throw DomainError("compute_metric: unknown metric");
}

MetaEpisodeResult run_meta_episode(AgentKind kind, const std::map<std::string, double>& hyperparams,
                                   const EnvConfig& env_config, const TrainingBudget& budget, MetricKind metric,
                                   std::span<const Trajectory> pretrain_demos, const BcSettings& bc,
                                   const ReplaySettings& replay, const Rng& rng) {
    Rng agent_rng = rng.derive("agent");
    Rng bc_rng = rng.derive("bc");
    auto env = make_environment(env_config, rng.derive("env"));
    auto eval_env = make_environment(env_config, rng.derive("eval"));
    const int episodes = std::max(budget.episodes, 0);

    MetaEpisodeResult result;
    result.final_agent = make_agent(kind, hyperparams, *env, std::max(episodes, 1), replay);
    auto& agent = *result.final_agent;

    const auto evaluate = [&] {
        result.evaluations.push_back(evaluate_policy(*eval_env, agent.greedy_policy(), std::max(budget.eval_episodes, 1)));
    };

    try {
        pretrain(agent, pretrain_demos, bc, bc_rng);
        if (episodes == 0) evaluate();
        for (int e = 1; e <= episodes; ++e) {
            result.training_returns.push_back(agent.train_episode(*env, agent_rng));
            if (e == episodes || (budget.eval_interval > 0 && e % budget.eval_interval == 0)) evaluate();
        }
        if (!agent.is_finite()) throw NumericalError("non-finite agent parameters");
        result.y = compute_metric(metric, result.evaluations);
    } catch (const NumericalError&) {
        result.diverged = true;
        result.y = env->min_return();
    }
    result.train_steps = env->total_steps();
    result.eval_steps = eval_env->total_steps();
    return result;
}

}  // namespace metatune
