#include "metatune/rng.hpp"

#include <cmath>
#include <numbers>

#include "metatune/errors.hpp"

namespace metatune {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t fmix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

Rng::Rng(std::uint64_t seed) : key_(fmix64(seed + kGolden)) {}

Rng::result_type Rng::operator()() {
    const std::uint64_t c = counter_++;
    return fmix64(fmix64(c * kGolden + key_) ^ (key_ >> 17 | key_ << 47));
}

double Rng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Rng::uniform(double low, double high) { return low + (high - low) * uniform(); }

__extension__ using u128 = unsigned __int128;

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    if (n == 0) throw DomainError("uniform_index: empty range");
    // Lemire's multiply-and-reject.
    u128 m = static_cast<u128>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<u128>((*this)()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double Rng::normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

Rng Rng::derive(std::string_view name, std::uint64_t index) const {
    Rng child(0);
    child.key_ = fmix64(key_ ^ fmix64(fnv1a64(name))) + fmix64(index * kGolden + 0x632BE59BD9B4E019ULL);
    return child;
}

}  // namespace metatune
