#include "metatune/replay_buffer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "metatune/errors.hpp"

namespace metatune {

std::vector<double> per_probabilities(std::span<const double> priorities, double alpha) {
    std::vector<double> p;
    p.reserve(priorities.size());
    for (const double v : priorities) {
        if (!(v > 0.0)) throw DomainError("per_probabilities: priorities must be positive");
        p.push_back(std::pow(v, alpha));
    }
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& v : p) v /= total;
    return p;
}

double per_is_weight(std::size_t buffer_size, double prob, double beta) {
    if (!(prob > 0.0)) throw DomainError("per_is_weight: probability must be positive");
    if (buffer_size == 0) throw DomainError("per_is_weight: buffer size must be at least 1");
    return std::pow(static_cast<double>(buffer_size) * prob, -beta);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, double alpha) : capacity_(capacity), alpha_(alpha) {
    if (capacity == 0) throw ConfigError("replay.capacity", "must be at least 1");
    leaves_ = std::bit_ceil(capacity);
    sum_tree_.assign(2 * leaves_, 0.0);
    max_tree_.assign(2 * leaves_, 0.0);
    data_.reserve(capacity);
}

void ReplayBuffer::set(std::size_t index, double priority) {
    std::size_t node = leaf(index);
    sum_tree_[node] = std::pow(priority, alpha_);
    max_tree_[node] = priority;
    for (node /= 2; node >= 1; node /= 2) {
        sum_tree_[node] = sum_tree_[2 * node] + sum_tree_[2 * node + 1];
        max_tree_[node] = std::max(max_tree_[2 * node], max_tree_[2 * node + 1]);
    }
}

void ReplayBuffer::add(Transition t) {
    const double p = max_priority();
    if (data_.size() < capacity_)
        data_.push_back(std::move(t));
    else
        data_[cursor_] = std::move(t);
    set(cursor_, p);
    cursor_ = (cursor_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
}

void ReplayBuffer::update_priority(std::size_t index, double priority) {
    if (index >= size_) throw ShapeError("ReplayBuffer: index out of range");
    if (!(priority > 0.0) || !std::isfinite(priority)) throw DomainError("ReplayBuffer: priority must be positive");
    set(index, priority);
}

std::size_t ReplayBuffer::find_prefix(double mass) const {
    std::size_t node = 1;
    while (node < leaves_) {
        const std::size_t left = 2 * node;
        if (mass < sum_tree_[left] || sum_tree_[left + 1] <= 0.0) {
            node = left;
        } else {
            mass -= sum_tree_[left];
            node = left + 1;
        }
    }
    // Rounding can land on an empty leaf past the end; step back to the last filled slot.
    return std::min(node - leaves_, size_ - 1);
}

ReplayBuffer::Batch ReplayBuffer::sample(std::size_t batch_size, double beta, Rng& rng) const {
    if (size_ == 0) throw DomainError("ReplayBuffer: cannot sample from an empty buffer");
    Batch batch;
    batch.indices.reserve(batch_size);
    batch.probabilities.reserve(batch_size);
    batch.weights.reserve(batch_size);
    const double total = sum_tree_[1];
    double max_w = 0.0;
    for (std::size_t k = 0; k < batch_size; ++k) {
        const std::size_t idx = find_prefix(rng.uniform() * total);
        const double prob = sum_tree_[leaf(idx)] / total;
        const double w = per_is_weight(size_, prob, beta);
        batch.indices.push_back(idx);
        batch.probabilities.push_back(prob);
        batch.weights.push_back(w);
        max_w = std::max(max_w, w);
    }
    for (auto& w : batch.weights) w /= max_w;
    return batch;
}

}  // namespace metatune
