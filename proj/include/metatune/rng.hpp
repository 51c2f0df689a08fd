#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace metatune {

/// Counter-based random stream.
///
/// Output i of a stream is a pure function of (key, i), so a stream can be
/// reproduced from its key alone and independent sub-streams are derived by
/// name without consuming draws from the parent. Satisfies
/// UniformRandomBitGenerator, but the members below are preferred because
/// their results do not depend on the standard library implementation.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double low, double high);
    /// Unbiased integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n);
    /// Standard normal via Box-Muller (no cached spare).
    double normal();
    bool bernoulli(double p);

    /// Independent stream keyed on this stream's key, a name and an index.
    /// Does not advance this stream.
    [[nodiscard]] Rng derive(std::string_view name, std::uint64_t index = 0) const;

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
    [[nodiscard]] std::uint64_t position() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Fisher-Yates shuffle driven by Rng::uniform_index.
template <typename Range>
void shuffle(Range& range, Rng& rng) {
    const auto n = static_cast<std::uint64_t>(range.size());
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = rng.uniform_index(i);
        using std::swap;
        swap(range[i - 1], range[j]);
    }
}

}  // namespace metatune
