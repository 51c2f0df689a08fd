#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "metatune/rl_core.hpp"
#include "metatune/rng.hpp"

namespace metatune {

/// P(j) = p_j^alpha / sum_i p_i^alpha. Throws DomainError for any p_j <= 0.
std::vector<double> per_probabilities(std::span<const double> priorities, double alpha);

/// Importance-sampling weight (N * P(j))^-beta, before batch-max normalization.
double per_is_weight(std::size_t buffer_size, double prob, double beta);

/// Fixed-capacity ring buffer with proportional prioritized sampling.
///
/// Stores p^alpha in a sum tree (and p in a max tree) so sampling and
/// priority updates are O(log N). New transitions enter at the current
/// maximum priority, 1.0 when the buffer is empty.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, double alpha);

    void add(Transition t);

    struct Batch {
        std::vector<std::size_t> indices;
        std::vector<double> probabilities;
        /// (N * P)^-beta divided by the batch maximum, so all lie in (0, 1].
        std::vector<double> weights;
    };

    /// i.i.d. draws with replacement. Requires a non-empty buffer.
    [[nodiscard]] Batch sample(std::size_t batch_size, double beta, Rng& rng) const;
    void update_priority(std::size_t index, double priority);

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] const Transition& at(std::size_t index) const { return data_.at(index); }
    [[nodiscard]] double priority(std::size_t index) const { return max_tree_[leaf(index)]; }
    [[nodiscard]] double max_priority() const noexcept { return size_ == 0 ? 1.0 : max_tree_[1]; }
    [[nodiscard]] double total_mass() const noexcept { return sum_tree_[1]; }

private:
    [[nodiscard]] std::size_t leaf(std::size_t index) const noexcept { return leaves_ + index; }
    void set(std::size_t index, double priority);
    [[nodiscard]] std::size_t find_prefix(double mass) const;

    std::size_t capacity_;
    double alpha_;
    std::size_t leaves_;
    std::vector<double> sum_tree_;
    std::vector<double> max_tree_;
    std::vector<Transition> data_;
    std::size_t cursor_ = 0;
    std::size_t size_ = 0;
};

}  // namespace metatune
