/**
 * @file psd.hpp
 * @brief Oscillator phase-noise power spectral density described by a flat
 *        level shaped by pole/zero corner terms.
 *
 * The single-sided PSD in dBc/Hz at offset frequency f is
 *
 *   psd(f) = psd0 + sum_zeros 10 log10(1 + (f/fz)^(2 oz))
 *                 - sum_poles 10 log10(1 + (f/fp)^(2 op))
 *                 + 20 log10(fc / ref_carrier)
 *
 * where the last term rescales the profile from the reference carrier it was
 * measured at to the requested carrier fc (phase noise power grows with the
 * square of the multiplication factor). A psd0 of -infinity is the sentinel
 * for "no phase noise at all".
 */
#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ptrs/error.hpp"

namespace ptrs::noise {

struct CornerTerm {
    double corner_hz = 0.0;  ///< corner frequency, > 0
    double order = 1.0;      ///< slope order; 1 gives 20 dB/decade past the corner
};

struct PsdSpec {
    double ref_carrier_hz = 0.0;  ///< carrier the profile was specified at
    double psd0_db = -std::numeric_limits<double>::infinity();  ///< flat level, dBc/Hz
    std::vector<CornerTerm> poles;
    std::vector<CornerTerm> zeros;

    void validate() const {
        if (!(ref_carrier_hz > 0.0))
            throw DomainError("PsdSpec: reference carrier must be positive, got " +
                              std::to_string(ref_carrier_hz));
        if (std::isnan(psd0_db) || psd0_db == std::numeric_limits<double>::infinity())
            throw DomainError("PsdSpec: flat level must be finite or -infinity");
        for (const auto& t : poles)
            if (!(t.corner_hz > 0.0) || !(t.order > 0.0))
                throw DomainError("PsdSpec: pole corner and order must be positive");
        for (const auto& t : zeros)
            if (!(t.corner_hz > 0.0) || !(t.order > 0.0))
                throw DomainError("PsdSpec: zero corner and order must be positive");
    }

    /// True when the profile carries no power at all (psd0 = -infinity).
    bool is_silent() const { return std::isinf(psd0_db) && psd0_db < 0.0; }
};

/**
 * PSD in dBc/Hz at offset `f_hz` for a carrier `fc_hz`. Returns -infinity
 * for a silent profile. f = 0 is allowed (the corner terms contribute 0 dB
 * there, leaving the flat level).
 */
inline double psd_at(const PsdSpec& spec, double f_hz, double fc_hz) {
    spec.validate();
    if (!(fc_hz > 0.0))
        throw DomainError("psd_at: carrier frequency must be positive, got " +
                          std::to_string(fc_hz));
    if (!(f_hz > 0.0))
        throw DomainError("psd_at: offset frequency must be positive, got " +
                          std::to_string(f_hz));
    if (spec.is_silent()) return -std::numeric_limits<double>::infinity();

    double db = spec.psd0_db;
    for (const auto& z : spec.zeros)
        db += 10.0 * std::log10(1.0 + std::pow(f_hz / z.corner_hz, 2.0 * z.order));
    for (const auto& p : spec.poles)
        db -= 10.0 * std::log10(1.0 + std::pow(f_hz / p.corner_hz, 2.0 * p.order));
    db += 20.0 * std::log10(fc_hz / spec.ref_carrier_hz);
    return db;
}

/// Linear power spectral density in rad^2/Hz at offset `f_hz`.
inline double psd_linear_at(const PsdSpec& spec, double f_hz, double fc_hz) {
    const double db = psd_at(spec, f_hz, fc_hz);
    return std::isinf(db) ? 0.0 : std::pow(10.0, db / 10.0);
}

}  // namespace ptrs::noise
