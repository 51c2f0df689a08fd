#include <algorithm>
#include <cmath>
#include <numeric>

#include "metatune/agents.hpp"
#include "metatune/errors.hpp"

namespace metatune {

namespace {

std::vector<double> log_softmax(std::span<const double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (const double v : z) s += std::exp(v - m);
    const double lse = m + std::log(s);
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - lse;
    return out;
}

double require(const std::map<std::string, double>& values, const std::string& name) {
    const auto it = values.find(name);
    if (it == values.end()) throw ConfigError(name, "missing hyperparameter");
    return it->second;
}

}  // namespace

PGAgentConfig PGAgentConfig::from_named(const std::map<std::string, double>& values) {
    PGAgentConfig c;
    c.alpha_lr = require(values, "alpha_lr");
    c.gamma = require(values, "gamma");
    c.gae_lambda = require(values, "gae_lambda");
    c.entropy_coef = require(values, "entropy_coef");
    c.value_coef = require(values, "value_coef");
    if (!(c.gamma >= 0.0 && c.gamma < 1.0)) throw ConfigError("gamma", "must lie in [0, 1)");
    if (!(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0)) throw ConfigError("gae_lambda", "must lie in [0, 1]");
    return c;
}

LinearPolicyParams::LinearPolicyParams(int features_, int actions_)
    : features(features_),
      actions(actions_),
      theta(static_cast<std::size_t>(features_) * static_cast<std::size_t>(actions_), 0.0),
      phi(static_cast<std::size_t>(features_), 0.0) {}

std::vector<double> LinearPolicyParams::logits(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != features) throw ShapeError("LinearPolicyParams: feature dimension mismatch");
    std::vector<double> z(static_cast<std::size_t>(actions), 0.0);
    for (int f = 0; f < features; ++f) {
        const double xf = x[static_cast<std::size_t>(f)];
        if (xf == 0.0) continue;
        const double* row = theta.data() + static_cast<std::ptrdiff_t>(f) * actions;
        for (int a = 0; a < actions; ++a) z[static_cast<std::size_t>(a)] += xf * row[a];
    }
    return z;
}

std::vector<double> LinearPolicyParams::probabilities(std::span<const double> x) const {
    auto lp = log_softmax(logits(x));
    for (auto& v : lp) v = std::exp(v);
    return lp;
}

double LinearPolicyParams::value(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != features) throw ShapeError("LinearPolicyParams: feature dimension mismatch");
    return std::inner_product(x.begin(), x.end(), phi.begin(), 0.0);
}

bool LinearPolicyParams::is_finite() const {
    const auto finite = [](double v) { return std::isfinite(v); };
    return std::all_of(theta.begin(), theta.end(), finite) && std::all_of(phi.begin(), phi.end(), finite);
}

std::vector<double> gae_advantages(std::span<const double> rewards, std::span<const double> values,
                                   std::span<const double> next_values, std::span<const bool> dones, double gamma,
                                   double lambda) {
    const std::size_t n = rewards.size();
    if (values.size() != n || next_values.size() != n || dones.size() != n)
        throw ShapeError("gae_advantages: input lengths differ");
    if (!(gamma < 1.0)) throw DomainError("gae_advantages: gamma must be < 1");
    std::vector<double> adv(n, 0.0);
    double acc = 0.0;
    for (std::size_t k = n; k-- > 0;) {
        const double live = dones[k] ? 0.0 : 1.0;
        const double delta = rewards[k] + gamma * next_values[k] * live - values[k];
        acc = delta + gamma * lambda * live * acc;
        adv[k] = acc;
    }
    return adv;
}

PolicyGradients pg_gradients(const LinearPolicyParams& params, std::span<const Trajectory> trajectories,
                             const PGAgentConfig& config, int state_count) {
    if (trajectories.empty()) throw DomainError("pg_gradients: need at least one trajectory");
    const auto nf = static_cast<std::size_t>(params.features);
    const auto na = static_cast<std::size_t>(params.actions);
    PolicyGradients g{std::vector<double>(params.theta.size(), 0.0), std::vector<double>(nf, 0.0)};
    std::size_t total_steps = 0;

    for (const auto& traj : trajectories) {
        const std::size_t n = traj.size();
        if (n == 0) continue;
        total_steps += n;
        std::vector<std::vector<double>> xs;
        xs.reserve(n);
        std::vector<double> rewards(n), values(n), next_values(n);
        std::unique_ptr<bool[]> dones(new bool[n]);
        for (std::size_t t = 0; t < n; ++t) {
            const auto& tr = traj.transitions[t];
            xs.push_back(feature_vector(tr.state, state_count));
            rewards[t] = tr.reward;
            values[t] = params.value(xs.back());
            next_values[t] = tr.done ? 0.0 : params.value(feature_vector(tr.next_state, state_count));
            dones[t] = tr.done;
        }
        const auto adv = gae_advantages(rewards, values, next_values, std::span<const bool>(dones.get(), n),
                                        config.gamma, config.gae_lambda);
        std::vector<double> returns(n);
        double running = 0.0;
        for (std::size_t t = n; t-- > 0;) {
            running = rewards[t] + (dones[t] ? 0.0 : config.gamma * running);
            returns[t] = running;
        }
        for (std::size_t t = 0; t < n; ++t) {
            const auto logp = log_softmax(params.logits(xs[t]));
            double entropy = 0.0;
            for (const double lp : logp) entropy -= std::exp(lp) * lp;
            const auto action = static_cast<std::size_t>(traj.transitions[t].action);
            std::vector<double> dz(na);
            for (std::size_t b = 0; b < na; ++b) {
                const double pb = std::exp(logp[b]);
                dz[b] = adv[t] * ((b == action ? 1.0 : 0.0) - pb) - config.entropy_coef * pb * (logp[b] + entropy);
            }
            const double dv = 2.0 * (values[t] - returns[t]);
            for (std::size_t f = 0; f < nf; ++f) {
                const double xf = xs[t][f];
                if (xf == 0.0) continue;
                for (std::size_t b = 0; b < na; ++b) g.theta[f * na + b] += dz[b] * xf;
                g.phi[f] += dv * xf;
            }
        }
    }
    const double inv_m = 1.0 / static_cast<double>(trajectories.size());
    for (auto& v : g.theta) v *= inv_m;
    if (total_steps > 0)
        for (auto& v : g.phi) v /= static_cast<double>(total_steps);
    return g;
}

LinearPolicyParams pg_update(const LinearPolicyParams& params, std::span<const Trajectory> trajectories,
                             const PGAgentConfig& config, int state_count) {
    const auto g = pg_gradients(params, trajectories, config, state_count);
    LinearPolicyParams next = params;
    for (std::size_t i = 0; i < next.theta.size(); ++i) next.theta[i] += config.alpha_lr * g.theta[i];
    for (std::size_t i = 0; i < next.phi.size(); ++i) next.phi[i] -= config.alpha_lr * config.value_coef * g.phi[i];
    if (!next.is_finite()) throw NumericalError("pg_update: non-finite policy parameters");
    return next;
}

PGAgent::PGAgent(int state_count, int feature_dim, int action_count, PGAgentConfig config)
    : states_(state_count), config_(config), params_(feature_dim > 0 ? feature_dim : state_count, action_count) {}

std::vector<double> PGAgent::features(const Observation& obs) const { return feature_vector(obs, states_); }

std::vector<double> PGAgent::action_probabilities(const Observation& obs) const {
    return params_.probabilities(features(obs));
}

int PGAgent::greedy_action(const Observation& obs) const { return argmax_action(params_.logits(features(obs))); }

int PGAgent::sample_action(const Observation& obs, Rng& rng) const {
    const auto p = action_probabilities(obs);
    double u = rng.uniform();
    for (std::size_t a = 0; a + 1 < p.size(); ++a) {
        if (u < p[a]) return static_cast<int>(a);
        u -= p[a];
    }
    return static_cast<int>(p.size()) - 1;
}

double PGAgent::train_episode(Environment& env, Rng& rng) {
    const Trajectory traj = run_episode(env, [&](const Observation& obs) { return sample_action(obs, rng); });
    params_ = pg_update(params_, std::span<const Trajectory>(&traj, 1), config_, states_);
    return traj.episode_return;
}

std::unique_ptr<Agent> make_agent(AgentKind kind, const std::map<std::string, double>& hyperparams,
                                  const Environment& env, std::int64_t training_episodes,
                                  const ReplaySettings& replay) {
    if (kind == AgentKind::linear_pg)
        return std::make_unique<PGAgent>(env.state_count(), env.feature_dim(), env.action_count(),
                                         PGAgentConfig::from_named(hyperparams));
    return std::make_unique<QAgent>(env.state_count(), env.action_count(), QAgentConfig::from_named(hyperparams),
                                    training_episodes, replay);
}

}  // namespace metatune
