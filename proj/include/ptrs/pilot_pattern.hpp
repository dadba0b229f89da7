/**
 * @file pilot_pattern.hpp
 * @brief Equally-spaced pilot placement within a block of N samples.
 *
 * Pilots sit at positions p_j = p1 + (j-1) * delta for j = 1..n_pilots,
 * 1-based, with p_{n_pilots} <= n_total. Every routine that needs "which
 * pilots are at or before sample n" goes through kp().
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "ptrs/error.hpp"

namespace ptrs::wiener {

struct PilotPattern {
    long long n_total = 0;   ///< block length N
    long long p1 = 1;        ///< first pilot position, 1-based
    long long delta = 1;     ///< spacing between consecutive pilots
    long long n_pilots = 0;  ///< number of pilots N_P

    PilotPattern() = default;

    PilotPattern(long long n_total_, long long p1_, long long delta_,
                 long long n_pilots_)
        : n_total(n_total_), p1(p1_), delta(delta_), n_pilots(n_pilots_) {
        if (n_total < 1)
            throw DomainError("PilotPattern: block length must be >= 1, got " +
                              std::to_string(n_total));
        if (p1 < 1 || p1 > n_total)
            throw DomainError("PilotPattern: first pilot " + std::to_string(p1) +
                              " outside block of length " + std::to_string(n_total));
        if (delta < 1)
            throw DomainError("PilotPattern: spacing must be >= 1, got " +
                              std::to_string(delta));
        if (n_pilots < 1)
            throw DomainError("PilotPattern: need at least one pilot, got " +
                              std::to_string(n_pilots));
        if (last_pilot() > n_total)
            throw DomainError("PilotPattern: last pilot " +
                              std::to_string(last_pilot()) +
                              " exceeds block length " + std::to_string(n_total));
    }

    /// Position of pilot j, 1-based in both argument and result.
    long long pilot(long long j) const { return p1 + (j - 1) * delta; }

    long long last_pilot() const { return pilot(n_pilots); }

    /// Number of pilots at or before sample n (the count K used by the
    /// piecewise closed forms). Clamped to [0, n_pilots].
    long long kp(long long n) const {
        if (n < p1) return 0;
        return std::min((n - p1) / delta + 1, n_pilots);
    }

    std::vector<long long> positions() const {
        std::vector<long long> p(static_cast<std::size_t>(n_pilots));
        for (long long j = 1; j <= n_pilots; ++j)
            p[static_cast<std::size_t>(j - 1)] = pilot(j);
        return p;
    }

    /// Pilot overhead in percent, n_pilots / n_total * 100.
    double overhead_pct() const {
        return 100.0 * static_cast<double>(n_pilots) / static_cast<double>(n_total);
    }
};

/**
 * Standard pattern for a given spacing: first pilot at p1, then as many
 * pilots as fit, but never more than ceil(N / delta). With p1 = 1 this is
 * exactly ceil(N / delta) pilots.
 */
inline PilotPattern from_spacing(long long n_total, long long delta,
                                 long long p1 = 1) {
    if (n_total < 1)
        throw DomainError("from_spacing: block length must be >= 1, got " +
                          std::to_string(n_total));
    if (delta < 1)
        throw DomainError("from_spacing: spacing must be >= 1, got " +
                          std::to_string(delta));
    if (p1 < 1 || p1 > n_total)
        throw DomainError("from_spacing: first pilot " + std::to_string(p1) +
                          " outside block of length " + std::to_string(n_total));
    const long long ceil_np = (n_total + delta - 1) / delta;
    const long long fit_np = (n_total - p1) / delta + 1;
    return PilotPattern(n_total, p1, delta, std::min(ceil_np, fit_np));
}

}  // namespace ptrs::wiener
