#pragma once

#include <memory>
#include <string>

#include "metatune/rl_core.hpp"

namespace metatune {

/// Deterministic 4-action grid. Start top-left, absorbing goal bottom-right.
/// Actions: 0 up, 1 right, 2 down, 3 left. Bumping a wall keeps the position.
class GridWorld final : public Environment {
public:
    GridWorld(int width, int height, double goal_reward = 1.0, double step_reward = -0.1);

    [[nodiscard]] std::string name() const override { return "gridworld"; }
    [[nodiscard]] int state_count() const override { return width_ * height_; }
    [[nodiscard]] int feature_dim() const override { return 0; }
    [[nodiscard]] int action_count() const override { return 4; }
    [[nodiscard]] int step_cap() const override { return 4 * width_ * height_; }
    [[nodiscard]] double min_return() const override;
    [[nodiscard]] double optimal_return() const override;

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] int goal_state() const noexcept { return width_ * height_ - 1; }
    [[nodiscard]] double goal_reward() const noexcept { return goal_reward_; }
    [[nodiscard]] double step_reward() const noexcept { return step_reward_; }
    /// Successor of `state` under `action`, ignoring episode bookkeeping.
    [[nodiscard]] int successor(int state, int action) const;

protected:
    Observation do_reset() override;
    StepResult do_step(int action) override;

private:
    int width_;
    int height_;
    double goal_reward_;
    double step_reward_;
    int state_ = 0;
};

/// N x N exploration chain. Every step descends one row; action 0 moves
/// down-left at no cost, action 1 moves down-right at a cost of 0.01/N. The
/// move that lands on the bottom-right cell additionally pays +1. Columns
/// clamp at the grid edges and the episode ends on the bottom row.
///
/// Stochastic variant: a down-right move succeeds with probability 1 - 1/N
/// (otherwise the agent goes down-left) and the final reward carries N(0,1) noise.
class DeepSea final : public Environment {
public:
    DeepSea(int size, bool stochastic, Rng rng);

    [[nodiscard]] std::string name() const override { return "deep_sea"; }
    [[nodiscard]] int state_count() const override { return size_ * size_; }
    [[nodiscard]] int feature_dim() const override { return 0; }
    [[nodiscard]] int action_count() const override { return 2; }
    [[nodiscard]] int step_cap() const override { return size_; }
    [[nodiscard]] double min_return() const override;
    [[nodiscard]] double optimal_return() const override;

    [[nodiscard]] int size() const noexcept { return size_; }
    [[nodiscard]] double move_cost() const noexcept { return 0.01 / size_; }

protected:
    Observation do_reset() override;
    StepResult do_step(int action) override;

private:
    int size_;
    bool stochastic_;
    Rng rng_;
    int row_ = 0;
    int col_ = 0;
};

/// Umbrella credit-assignment chain.
///
/// Features: [forecast, umbrella_taken, remaining / chain_length, distractors...].
/// The first action fixes the umbrella choice. Every step before the last
/// pays a fair +/-1 coin regardless of action; the last pays +1 if the choice
/// matched the forecast and -1 otherwise.
class Umbrella final : public Environment {
public:
    Umbrella(int chain_length, int n_distractors, Rng rng);

    [[nodiscard]] std::string name() const override { return "umbrella"; }
    [[nodiscard]] int state_count() const override { return 4 * (chain_length_ + 1); }
    [[nodiscard]] int feature_dim() const override { return 3 + n_distractors_; }
    [[nodiscard]] int action_count() const override { return 2; }
    [[nodiscard]] int step_cap() const override { return chain_length_ + 1; }
    [[nodiscard]] double min_return() const override { return -static_cast<double>(chain_length_); }
    [[nodiscard]] double optimal_return() const override { return 1.0; }

    [[nodiscard]] int chain_length() const noexcept { return chain_length_; }
    [[nodiscard]] bool forecast() const noexcept { return need_umbrella_; }

protected:
    Observation do_reset() override;
    StepResult do_step(int action) override;

private:
    Observation observe();

    int chain_length_;
    int n_distractors_;
    Rng rng_;
    bool need_umbrella_ = false;
    bool has_umbrella_ = false;
    int t_ = 0;
};

enum class EnvKind { gridworld, deep_sea, umbrella };

std::string to_string(EnvKind kind);
EnvKind parse_env_kind(const std::string& text);

struct EnvConfig {
    EnvKind kind = EnvKind::deep_sea;
    int width = 5;
    int height = 5;
    double goal_reward = 1.0;
    double step_reward = -0.1;
    int size = 10;
    bool stochastic = false;
    int chain_length = 5;
    int n_distractors = 0;

    friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

/// Validates the parameters relevant to `config.kind`; throws ConfigError.
void validate(const EnvConfig& config);

std::unique_ptr<Environment> make_environment(const EnvConfig& config, Rng rng);

}  // namespace metatune
