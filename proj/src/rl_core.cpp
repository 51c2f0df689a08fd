#include "metatune/rl_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "metatune/errors.hpp"

namespace metatune {

void Trajectory::append(Transition t) {
    episode_return += t.reward;
    transitions.push_back(std::move(t));
}

Observation Environment::reset() {
    done_ = false;
    episode_steps_ = 0;
    return do_reset();
}

StepResult Environment::step(int action) {
    if (done_) throw DomainError(name() + ": step() called on a finished episode; call reset()");
    if (action < 0 || action >= action_count()) {
        std::ostringstream os;
        os << name() << ": action " << action << " outside [0, " << action_count() << ")";
        throw DomainError(os.str());
    }
    auto result = do_step(action);
    ++total_steps_;
    ++episode_steps_;
    if (episode_steps_ >= step_cap()) result.done = true;
    done_ = result.done;
    return result;
}

double discounted_return(std::span<const double> rewards, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("discounted_return: gamma must lie in [0, 1)");
    double total = 0.0;
    double discount = 1.0;
    for (const double r : rewards) {
        total += discount * r;
        discount *= gamma;
    }
    return total;
}

Trajectory run_episode(Environment& env, const Policy& policy) {
    Trajectory traj;
    Observation obs = env.reset();
    bool done = false;
    while (!done) {
        const int action = policy(obs);
        auto step = env.step(action);
        done = step.done;
        traj.append({obs, action, step.reward, step.observation, done});
        obs = std::move(step.observation);
    }
    return traj;
}

EvaluationResult EvaluationResult::from_returns(std::vector<double> returns) {
    EvaluationResult r;
    r.episode_returns = std::move(returns);
    if (!r.episode_returns.empty()) {
        r.mean = std::accumulate(r.episode_returns.begin(), r.episode_returns.end(), 0.0) /
                 static_cast<double>(r.episode_returns.size());
        r.max = *std::max_element(r.episode_returns.begin(), r.episode_returns.end());
    }
    return r;
}

EvaluationResult evaluate_policy(Environment& env, const Policy& policy, int episodes) {
    if (episodes < 1) throw DomainError("evaluate_policy: episodes must be at least 1");
    std::vector<double> returns;
    returns.reserve(static_cast<std::size_t>(episodes));
    for (int e = 0; e < episodes; ++e) returns.push_back(run_episode(env, policy).episode_return);
    return EvaluationResult::from_returns(std::move(returns));
}

std::vector<double> feature_vector(const Observation& obs, int state_count) {
    if (!obs.features.empty()) return obs.features;
    if (obs.id < 0 || obs.id >= state_count) throw ShapeError("feature_vector: state id out of range");
    std::vector<double> x(static_cast<std::size_t>(state_count), 0.0);
    x[static_cast<std::size_t>(obs.id)] = 1.0;
    return x;
}

}  // namespace metatune
