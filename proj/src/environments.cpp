#include "metatune/environments.hpp"

#include <algorithm>

#include "metatune/errors.hpp"

namespace metatune {

// ---- GridWorld ----

GridWorld::GridWorld(int width, int height, double goal_reward, double step_reward)
    : width_(width), height_(height), goal_reward_(goal_reward), step_reward_(step_reward) {
    if (width < 2 || height < 2) throw ConfigError("env", "gridworld needs width, height >= 2");
}

double GridWorld::min_return() const {
    return step_cap() * std::min(step_reward_, 0.0) + std::min(goal_reward_, 0.0);
}

double GridWorld::optimal_return() const {
    const int path = (width_ - 1) + (height_ - 1);
    return (path - 1) * step_reward_ + goal_reward_;
}

int GridWorld::successor(int state, int action) const {
    int row = state / width_;
    int col = state % width_;
    switch (action) {
        case 0: row = std::max(row - 1, 0); break;
        case 1: col = std::min(col + 1, width_ - 1); break;
        case 2: row = std::min(row + 1, height_ - 1); break;
        case 3: col = std::max(col - 1, 0); break;
        default: throw DomainError("gridworld: invalid action");
    }
    return row * width_ + col;
}

Observation GridWorld::do_reset() {
    state_ = 0;
    return {state_, {}};
}

StepResult GridWorld::do_step(int action) {
    state_ = successor(state_, action);
    const bool at_goal = state_ == goal_state();
    return {{state_, {}}, at_goal ? goal_reward_ : step_reward_, at_goal};
}

// ---- DeepSea ----

DeepSea::DeepSea(int size, bool stochastic, Rng rng) : size_(size), stochastic_(stochastic), rng_(rng) {
    if (size < 2) throw ConfigError("env.size", "deep_sea needs N >= 2");
}

double DeepSea::min_return() const {
    const double worst = -move_cost() * (size_ - 1);
    // Stochastic final rewards are unbounded below; the floor sits four noise std devs down.
    return stochastic_ ? worst - 4.0 : worst;
}

double DeepSea::optimal_return() const {
    if (!stochastic_) return 1.0 - move_cost() * (size_ - 1);
    // Down-right succeeds with probability 1 - 1/N on each of the N-1 moves.
    double p = 1.0;
    for (int i = 0; i < size_ - 1; ++i) p *= 1.0 - 1.0 / size_;
    return p - move_cost() * (size_ - 1);
}

Observation DeepSea::do_reset() {
    row_ = 0;
    col_ = 0;
    return {0, {}};
}

StepResult DeepSea::do_step(int action) {
    double reward = 0.0;
    bool right = action == 1;
    if (right) {
        reward -= move_cost();
        if (stochastic_ && rng_.uniform() < 1.0 / size_) right = false;
    }
    col_ = right ? std::min(col_ + 1, size_ - 1) : std::max(col_ - 1, 0);
    ++row_;
    const bool done = row_ == size_ - 1;
    if (done && right && col_ == size_ - 1) reward += 1.0;
    if (done && stochastic_) reward += rng_.normal();
    return {{row_ * size_ + col_, {}}, reward, done};
}

// ---- Umbrella ----

Umbrella::Umbrella(int chain_length, int n_distractors, Rng rng)
    : chain_length_(chain_length), n_distractors_(n_distractors), rng_(rng) {
    if (chain_length < 1) throw ConfigError("env.chain_length", "umbrella needs chain_length >= 1");
    if (n_distractors < 0) throw ConfigError("env.n_distractors", "must be non-negative");
}

Observation Umbrella::observe() {
    const int remaining = chain_length_ - t_;
    Observation obs;
    obs.id = (remaining * 2 + (has_umbrella_ ? 1 : 0)) * 2 + (need_umbrella_ ? 1 : 0);
    obs.features.reserve(static_cast<std::size_t>(feature_dim()));
    obs.features.push_back(need_umbrella_ ? 1.0 : 0.0);
    obs.features.push_back(has_umbrella_ ? 1.0 : 0.0);
    obs.features.push_back(static_cast<double>(remaining) / chain_length_);
    for (int i = 0; i < n_distractors_; ++i) obs.features.push_back(rng_.bernoulli(0.5) ? 1.0 : 0.0);
    return obs;
}

Observation Umbrella::do_reset() {
    t_ = 0;
    has_umbrella_ = false;
    need_umbrella_ = rng_.bernoulli(0.5);
    return observe();
}

StepResult Umbrella::do_step(int action) {
    if (t_ == 0) has_umbrella_ = action == 1;
    ++t_;
    const bool done = t_ == chain_length_;
    double reward;
    if (done)
        reward = has_umbrella_ == need_umbrella_ ? 1.0 : -1.0;
    else
        reward = rng_.bernoulli(0.5) ? 1.0 : -1.0;
    return {observe(), reward, done};
}

// ---- factory ----

std::string to_string(EnvKind kind) {
    switch (kind) {
        case EnvKind::gridworld: return "gridworld";
        case EnvKind::deep_sea: return "deep_sea";
        case EnvKind::umbrella: return "umbrella";
    }
    return "unknown";
}

EnvKind parse_env_kind(const std::string& text) {
    if (text == "gridworld") return EnvKind::gridworld;
    if (text == "deep_sea") return EnvKind::deep_sea;
    if (text == "umbrella") return EnvKind::umbrella;
    throw ConfigError("env.kind", "unknown environment '" + text + "'");
}

void validate(const EnvConfig& config) {
    switch (config.kind) {
        case EnvKind::gridworld:
            if (config.width < 2) throw ConfigError("env.width", "must be >= 2");
            if (config.height < 2) throw ConfigError("env.height", "must be >= 2");
            break;
        case EnvKind::deep_sea:
            if (config.size < 2) throw ConfigError("env.size", "must be >= 2");
            break;
        case EnvKind::umbrella:
            if (config.chain_length < 1) throw ConfigError("env.chain_length", "must be >= 1");
            if (config.n_distractors < 0) throw ConfigError("env.n_distractors", "must be >= 0");
            break;
    }
}

std::unique_ptr<Environment> make_environment(const EnvConfig& config, Rng rng) {
    validate(config);
    switch (config.kind) {
        case EnvKind::gridworld:
            return std::make_unique<GridWorld>(config.width, config.height, config.goal_reward, config.step_reward);
        case EnvKind::deep_sea: return std::make_unique<DeepSea>(config.size, config.stochastic, rng);
        case EnvKind::umbrella: return std::make_unique<Umbrella>(config.chain_length, config.n_distractors, rng);
    }
    throw ConfigError("env.kind", "unknown environment");
}

}  // namespace metatune
