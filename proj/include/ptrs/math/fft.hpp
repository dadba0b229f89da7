/**
 * @file fft.hpp
 * @brief Minimal iterative radix-2 FFT for power-of-two sizes.
 *
 * The library only ever transforms power-of-two grids (synthesis and
 * circulant embedding round sizes up), so a dependency-free ~60 line
 * implementation keeps the whole library header-only.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "ptrs/error.hpp"

namespace ptrs::math {

/// Smallest power of two that is >= x (x >= 1).
inline std::size_t next_pow2(std::size_t x) {
    std::size_t m = 1;
    while (m < x) m <<= 1;
    return m;
}

inline bool is_pow2(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

/**
 * In-place radix-2 transform. `inverse` selects the conjugate transform
 * including the 1/M normalization, so fft(fft(x), inverse=true) == x.
 */
inline void fft(std::vector<std::complex<double>>& data, bool inverse = false) {
    const std::size_t m = data.size();
    if (m == 0) return;
    if (!is_pow2(m)) throw DomainError("fft: size must be a power of two, got " + std::to_string(m));

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < m; ++i) {
        std::size_t bit = m >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= m; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < m; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = data[i + k];
                const std::complex<double> v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(m);
        for (auto& x : data) x *= inv;
    }
}

}  // namespace ptrs::math
