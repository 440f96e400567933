#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace modmetric {

/// Deterministic 64-bit generator (splitmix64). Same seed, same stream,
/// on every platform; no library distributions are involved anywhere.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * unit(); }

    /// Log-uniform over [lo, hi], lo > 0.
    double log_uniform(double lo, double hi) noexcept {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    std::size_t index(std::size_t n) noexcept {
        return static_cast<std::size_t>(next() % static_cast<std::uint64_t>(n));
    }

private:
    std::uint64_t state_;
};

namespace detail {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Independent per-sample stream: sweeps derive one generator per sample
/// index, so reports do not depend on how samples are split over workers.
inline SplitMix64 sample_stream(std::uint64_t seed, std::uint64_t sample_index) noexcept {
    return SplitMix64(detail::mix64(seed ^ (0x9E3779B97F4A7C15ull * (sample_index + 1))));
}

}  // namespace modmetric
