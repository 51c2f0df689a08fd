#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "metatune/replay_buffer.hpp"
#include "metatune/rl_core.hpp"
#include "metatune/rng.hpp"

namespace metatune {

enum class AgentKind { tabular_q_per, linear_pg };

std::string to_string(AgentKind kind);
AgentKind parse_agent_kind(const std::string& text);

/// Names of the tuned hyperparameters each agent expects, in canonical order.
const std::vector<std::string>& hyperparameter_names(AgentKind kind);

/// Linear interpolation from `start` at t = 0 to `end` at t >= horizon.
class LinearSchedule {
public:
    LinearSchedule(double start, double end, std::int64_t horizon);
    [[nodiscard]] double value(std::int64_t t) const;

private:
    double start_;
    double end_;
    std::int64_t horizon_;
};

/// Common surface of the tunable learners.
class Agent {
public:
    virtual ~Agent() = default;

    [[nodiscard]] virtual int greedy_action(const Observation& obs) const = 0;
    /// Runs and learns from one episode; returns its undiscounted return.
    /// Throws NumericalError when parameters become non-finite.
    virtual double train_episode(Environment& env, Rng& rng) = 0;
    [[nodiscard]] virtual bool is_finite() const = 0;
    [[nodiscard]] virtual std::unique_ptr<Agent> clone() const = 0;

    /// Greedy policy bound to this agent; the agent must outlive it.
    [[nodiscard]] Policy greedy_policy() const;
};

// ---- tabular Q-learning with prioritized replay ----

struct QAgentConfig {
    double alpha_lr = 0.1;
    double gamma = 0.99;
    double epsilon0 = 0.3;   ///< annealed linearly to 0 over the training episodes
    double per_alpha = 0.6;
    double per_beta0 = 0.4;  ///< annealed linearly to 1 over the training episodes

    static QAgentConfig from_named(const std::map<std::string, double>& values);
};

struct ReplaySettings {
    std::size_t batch_size = 32;
    std::size_t capacity = 10000;
    std::size_t warmup = 100;

    friend bool operator==(const ReplaySettings&, const ReplaySettings&) = default;
};

/// q + alpha_lr * (reward + gamma * max_next_q - q). Pass max_next_q = 0 for terminal transitions.
double q_update(double q, double reward, double max_next_q, double alpha_lr, double gamma);

/// Argmax with lowest-index tie-break.
int argmax_action(std::span<const double> values);

/// Uniform random action with probability epsilon, else argmax_action.
int epsilon_greedy(std::span<const double> q_row, double epsilon, Rng& rng);

/// Learns only from replayed batches: every environment step after the
/// warmup triggers one prioritized batch of Q-learning updates scaled by the
/// normalized importance weights.
class QAgent final : public Agent {
public:
    QAgent(int state_count, int action_count, QAgentConfig config, std::int64_t training_episodes,
           ReplaySettings replay = {});

    [[nodiscard]] int greedy_action(const Observation& obs) const override;
    double train_episode(Environment& env, Rng& rng) override;
    [[nodiscard]] bool is_finite() const override;
    [[nodiscard]] std::unique_ptr<Agent> clone() const override { return std::make_unique<QAgent>(*this); }

    [[nodiscard]] std::span<const double> q_row(int state) const;
    [[nodiscard]] double q(int state, int action) const;
    void set_q(int state, int action, double value);
    [[nodiscard]] int state_count() const noexcept { return states_; }
    [[nodiscard]] int action_count() const noexcept { return actions_; }
    [[nodiscard]] const QAgentConfig& config() const noexcept { return config_; }
    [[nodiscard]] const std::vector<double>& table() const noexcept { return table_; }
    [[nodiscard]] std::int64_t episodes_trained() const noexcept { return episode_; }
    [[nodiscard]] double current_epsilon() const { return epsilon_.value(episode_); }
    [[nodiscard]] double current_beta() const { return beta_.value(episode_); }
    [[nodiscard]] const ReplayBuffer& buffer() const noexcept { return buffer_; }

private:
    void replay(double beta, Rng& rng);
    [[nodiscard]] std::size_t slot(int state, int action) const;

    int states_;
    int actions_;
    QAgentConfig config_;
    ReplaySettings replay_;
    LinearSchedule epsilon_;
    LinearSchedule beta_;
    std::vector<double> table_;
    ReplayBuffer buffer_;
    std::int64_t episode_ = 0;
};

// ---- linear softmax policy gradient ----

struct PGAgentConfig {
    double alpha_lr = 0.01;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double entropy_coef = 0.0;
    double value_coef = 0.5;

    static PGAgentConfig from_named(const std::map<std::string, double>& values);
};

/// Softmax policy with logits theta^T x and linear value phi^T x.
struct LinearPolicyParams {
    int features = 0;
    int actions = 0;
    std::vector<double> theta;  ///< features x actions, row-major
    std::vector<double> phi;    ///< features

    LinearPolicyParams() = default;
    LinearPolicyParams(int features, int actions);

    [[nodiscard]] std::vector<double> logits(std::span<const double> x) const;
    [[nodiscard]] std::vector<double> probabilities(std::span<const double> x) const;
    [[nodiscard]] double value(std::span<const double> x) const;
    [[nodiscard]] bool is_finite() const;

    friend bool operator==(const LinearPolicyParams&, const LinearPolicyParams&) = default;
};

/// A_t = sum_l (gamma*lambda)^l delta_{t+l}, delta_t = r_t + gamma V(s_{t+1})(1 - done_t) - V(s_t).
/// The accumulator resets after every done flag.
std::vector<double> gae_advantages(std::span<const double> rewards, std::span<const double> values,
                                   std::span<const double> next_values, std::span<const bool> dones, double gamma,
                                   double lambda);

/// Gradients of the per-batch objectives used by pg_update:
///   policy:  (1/M) sum_traj sum_t [A_t log pi(a_t|x_t) + c_H H(pi(.|x_t))]    (ascent)
///   value:   (1/T) sum_t (phi^T x_t - R_t)^2                                   (descent)
/// where M is the trajectory count, T the total step count, A_t the GAE
/// advantages and R_t the discounted return-to-go, both computed from the
/// current phi.
struct PolicyGradients {
    std::vector<double> theta;
    std::vector<double> phi;
};

PolicyGradients pg_gradients(const LinearPolicyParams& params, std::span<const Trajectory> trajectories,
                             const PGAgentConfig& config, int state_count);

/// theta += alpha_lr * policy gradient; phi -= alpha_lr * value_coef * value gradient.
/// Throws NumericalError if the result is not finite.
LinearPolicyParams pg_update(const LinearPolicyParams& params, std::span<const Trajectory> trajectories,
                             const PGAgentConfig& config, int state_count);

/// On-policy learner: one pg_update per sampled episode.
class PGAgent final : public Agent {
public:
    PGAgent(int state_count, int feature_dim, int action_count, PGAgentConfig config);

    [[nodiscard]] int greedy_action(const Observation& obs) const override;
    double train_episode(Environment& env, Rng& rng) override;
    [[nodiscard]] bool is_finite() const override { return params_.is_finite(); }
    [[nodiscard]] std::unique_ptr<Agent> clone() const override { return std::make_unique<PGAgent>(*this); }

    [[nodiscard]] std::vector<double> action_probabilities(const Observation& obs) const;
    [[nodiscard]] std::vector<double> features(const Observation& obs) const;
    [[nodiscard]] int sample_action(const Observation& obs, Rng& rng) const;

    [[nodiscard]] const LinearPolicyParams& params() const noexcept { return params_; }
    [[nodiscard]] LinearPolicyParams& params() noexcept { return params_; }
    [[nodiscard]] const PGAgentConfig& config() const noexcept { return config_; }
    [[nodiscard]] int state_count() const noexcept { return states_; }

private:
    int states_;
    PGAgentConfig config_;
    LinearPolicyParams params_;
};

/// Fresh, untrained agent for the environment. `hyperparams` must name
/// every entry of hyperparameter_names(kind).
std::unique_ptr<Agent> make_agent(AgentKind kind, const std::map<std::string, double>& hyperparams,
                                  const Environment& env, std::int64_t training_episodes,
                                  const ReplaySettings& replay = {});

}  // namespace metatune
