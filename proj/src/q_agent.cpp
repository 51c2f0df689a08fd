#include <algorithm>
#include <cmath>
#include <sstream>

#include "metatune/agents.hpp"
#include "metatune/errors.hpp"

namespace metatune {

std::string to_string(AgentKind kind) { return kind == AgentKind::linear_pg ? "linear_pg" : "tabular_q_per"; }

AgentKind parse_agent_kind(const std::string& text) {
    if (text == "tabular_q_per") return AgentKind::tabular_q_per;
    if (text == "linear_pg") return AgentKind::linear_pg;
    throw ConfigError("agent", "unknown agent kind '" + text + "'");
}

const std::vector<std::string>& hyperparameter_names(AgentKind kind) {
    static const std::vector<std::string> q{"alpha_lr", "gamma", "epsilon", "per_alpha", "per_beta"};
    static const std::vector<std::string> pg{"alpha_lr", "gamma", "gae_lambda", "entropy_coef", "value_coef"};
    return kind == AgentKind::linear_pg ? pg : q;
}

LinearSchedule::LinearSchedule(double start, double end, std::int64_t horizon)
    : start_(start), end_(end), horizon_(std::max<std::int64_t>(horizon, 1)) {}

double LinearSchedule::value(std::int64_t t) const {
    if (t <= 0) return start_;
    if (t >= horizon_) return end_;
    return start_ + (end_ - start_) * (static_cast<double>(t) / static_cast<double>(horizon_));
}

Policy Agent::greedy_policy() const {
    return [this](const Observation& obs) { return greedy_action(obs); };
}

namespace {

double require(const std::map<std::string, double>& values, const std::string& name) {
    const auto it = values.find(name);
    if (it == values.end()) throw ConfigError(name, "missing hyperparameter");
    return it->second;
}

}  // namespace

QAgentConfig QAgentConfig::from_named(const std::map<std::string, double>& values) {
    QAgentConfig c;
    c.alpha_lr = require(values, "alpha_lr");
    c.gamma = require(values, "gamma");
    c.epsilon0 = require(values, "epsilon");
    c.per_alpha = require(values, "per_alpha");
    c.per_beta0 = require(values, "per_beta");
    if (!(c.gamma >= 0.0 && c.gamma < 1.0)) throw ConfigError("gamma", "must lie in [0, 1)");
    if (!(c.epsilon0 >= 0.0 && c.epsilon0 <= 1.0)) throw ConfigError("epsilon", "must lie in [0, 1]");
    if (!(c.alpha_lr >= 0.0)) throw ConfigError("alpha_lr", "must be non-negative");
    return c;
}

double q_update(double q, double reward, double max_next_q, double alpha_lr, double gamma) {
    if (!(gamma < 1.0)) throw DomainError("q_update: gamma must be < 1");
    return q + alpha_lr * (reward + gamma * max_next_q - q);
}

int argmax_action(std::span<const double> values) {
    if (values.empty()) throw ShapeError("argmax_action: empty value row");
    return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

int epsilon_greedy(std::span<const double> q_row, double epsilon, Rng& rng) {
    if (q_row.empty()) throw ShapeError("epsilon_greedy: empty q row");
    if (rng.uniform() < epsilon) return static_cast<int>(rng.uniform_index(q_row.size()));
    return argmax_action(q_row);
}

QAgent::QAgent(int state_count, int action_count, QAgentConfig config, std::int64_t training_episodes,
               ReplaySettings replay)
    : states_(state_count),
      actions_(action_count),
      config_(config),
      replay_(replay),
      epsilon_(config.epsilon0, 0.0, training_episodes - 1),
      beta_(config.per_beta0, 1.0, training_episodes - 1),
      table_(static_cast<std::size_t>(state_count) * static_cast<std::size_t>(action_count), 0.0),
      buffer_(replay.capacity, config.per_alpha) {
    if (state_count < 1 || action_count < 1) throw ShapeError("QAgent: empty state or action space");
}

std::size_t QAgent::slot(int state, int action) const {
    if (state < 0 || state >= states_ || action < 0 || action >= actions_) throw ShapeError("QAgent: index out of range");
    return static_cast<std::size_t>(state) * static_cast<std::size_t>(actions_) + static_cast<std::size_t>(action);
}

std::span<const double> QAgent::q_row(int state) const {
    return std::span<const double>(table_).subspan(slot(state, 0), static_cast<std::size_t>(actions_));
}

double QAgent::q(int state, int action) const { return table_[slot(state, action)]; }

void QAgent::set_q(int state, int action, double value) { table_[slot(state, action)] = value; }

int QAgent::greedy_action(const Observation& obs) const { return argmax_action(q_row(obs.id)); }

bool QAgent::is_finite() const {
    return std::all_of(table_.begin(), table_.end(), [](double v) { return std::isfinite(v); });
}

void QAgent::replay(double beta, Rng& rng) {
    const auto batch = buffer_.sample(replay_.batch_size, beta, rng);
    for (std::size_t k = 0; k < batch.indices.size(); ++k) {
        const auto& t = buffer_.at(batch.indices[k]);
        const double max_next = t.done ? 0.0 : *std::max_element(q_row(t.next_state.id).begin(), q_row(t.next_state.id).end());
        double& q = table_[slot(t.state.id, t.action)];
        const double td = t.reward + config_.gamma * max_next - q;
        q = q_update(q, t.reward, max_next, config_.alpha_lr * batch.weights[k], config_.gamma);
        if (!std::isfinite(q)) throw NumericalError("QAgent: non-finite Q value");
        buffer_.update_priority(batch.indices[k], std::abs(td) + 1e-3);
    }
}

double QAgent::train_episode(Environment& env, Rng& rng) {
    const double epsilon = epsilon_.value(episode_);
    const double beta = beta_.value(episode_);
    Observation obs = env.reset();
    double total = 0.0;
    bool done = false;
    while (!done) {
        const int action = epsilon_greedy(q_row(obs.id), epsilon, rng);
        auto step = env.step(action);
        done = step.done;
        total += step.reward;
        buffer_.add({obs, action, step.reward, step.observation, done});
        if (buffer_.size() >= replay_.warmup) replay(beta, rng);
        obs = std::move(step.observation);
    }
    ++episode_;
    return total;
}

}  // namespace metatune
