#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace featune {

__extension__ using uint128 = unsigned __int128;

/// Mixes a 64-bit value (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a child seed from a base seed and a sequence of indices.
/// Same inputs always give the same seed; different index tuples give
/// statistically unrelated streams.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> indices) noexcept;

/// A seeded random stream. Satisfies UniformRandomBitGenerator so it can
/// drive the standard distributions directly.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }

    result_type operator()() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound)
    {
        // Lemire's multiply-shift with rejection
        auto x = engine_();
        auto m = static_cast<uint128>(x) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            auto threshold = (0 - bound) % bound;
            while (low < threshold) {
                x = engine_();
                m = static_cast<uint128>(x) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform real in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace featune
