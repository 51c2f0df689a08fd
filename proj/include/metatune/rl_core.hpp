#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "metatune/rng.hpp"

namespace metatune {

/// What the agent sees. Tabular environments leave `features` empty; learners
/// that need a vector one-hot encode `id` instead.
struct Observation {
    int id = 0;
    std::vector<double> features;

    friend bool operator==(const Observation&, const Observation&) = default;
};

struct Transition {
    Observation state;
    int action = 0;
    double reward = 0.0;
    Observation next_state;
    bool done = false;

    friend bool operator==(const Transition&, const Transition&) = default;
};

struct Trajectory {
    std::vector<Transition> transitions;
    double episode_return = 0.0;

    void append(Transition t);
    [[nodiscard]] std::size_t size() const noexcept { return transitions.size(); }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool done = false;
};

/// Episodic MDP with its own seeded random stream.
///
/// reset()/step() are non-virtual: they enforce the per-episode step cap,
/// validate actions and count steps, then delegate to the implementation.
class Environment {
public:
    virtual ~Environment() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] virtual int state_count() const = 0;
    /// Length of Observation::features, or 0 for tabular observations.
    [[nodiscard]] virtual int feature_dim() const = 0;
    [[nodiscard]] virtual int action_count() const = 0;
    [[nodiscard]] virtual int step_cap() const = 0;
    /// Lower bound on an episode's return; used as the divergence floor.
    [[nodiscard]] virtual double min_return() const = 0;
    /// Expected return of an optimal policy.
    [[nodiscard]] virtual double optimal_return() const = 0;

    Observation reset();
    StepResult step(int action);

    [[nodiscard]] std::uint64_t total_steps() const noexcept { return total_steps_; }
    [[nodiscard]] bool episode_over() const noexcept { return done_; }

protected:
    virtual Observation do_reset() = 0;
    virtual StepResult do_step(int action) = 0;

private:
    std::uint64_t total_steps_ = 0;
    int episode_steps_ = 0;
    bool done_ = true;
};

using Policy = std::function<int(const Observation&)>;

/// Sum of gamma^k * r_k. Throws DomainError unless 0 <= gamma < 1.
double discounted_return(std::span<const double> rewards, double gamma);

/// Runs one episode and records every transition.
Trajectory run_episode(Environment& env, const Policy& policy);

struct EvaluationResult {
    std::vector<double> episode_returns;
    double mean = 0.0;
    double max = 0.0;

    static EvaluationResult from_returns(std::vector<double> returns);
};

/// Undiscounted returns of `episodes` runs of a fixed (greedy) policy.
EvaluationResult evaluate_policy(Environment& env, const Policy& policy, int episodes);

/// Agent-side input vector: the observation's features, or a one-hot of its id.
std::vector<double> feature_vector(const Observation& obs, int state_count);

}  // namespace metatune
