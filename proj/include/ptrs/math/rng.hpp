/**
 * @file rng.hpp
 * @brief Reproducible random streams: one independent generator per task index.
 *
 * Distributions are hand-rolled (Box-Muller for Gaussians, bit slicing for
 * discrete draws) because the standard library's distribution objects are
 * implementation-defined; the raw mt19937_64 sequence is the only part of
 * <random> with a pinned output, and that is all we rely on. This makes
 * fixed-seed outputs identical across compilers, platforms and thread counts.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace ptrs::math {

/// SplitMix64 step; the standard 64-bit finalizer used for seed mixing.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Collision-resistant seed for stream `index` of master seed `master`.
/// Streams are independent of scheduling: stream k always sees the same seed.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index ^ 0xA5A5A5A5DEADBEEFULL));
}

/// Per-task random stream with the handful of draws the library needs.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    RandomStream(std::uint64_t master, std::uint64_t index)
        : engine_(stream_seed(master, index)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal pair via Box-Muller.
    std::pair<double, double> normal_pair() {
        // 1 - u in (0, 1] keeps the log argument strictly positive.
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(th), r * std::sin(th)};
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        auto [g1, g2] = normal_pair();
        spare_ = g2;
        have_spare_ = true;
        return g1;
    }

    /// Circularly symmetric complex normal with E|z|^2 = 1.
    std::complex<double> complex_normal() {
        auto [g1, g2] = normal_pair();
        return {g1 * std::numbers::sqrt2 / 2.0, g2 * std::numbers::sqrt2 / 2.0};
    }

    /// Uniform integer in [0, n) using the top bits (n small, e.g. 4 for QPSK).
    std::uint32_t uniform_index(std::uint32_t n) {
        return static_cast<std::uint32_t>((engine_() >> 32) % n);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace ptrs::math
