/**
 * @file synth.hpp
 * @brief Phase-noise trace synthesis and autocorrelation estimation.
 *
 * Two generators live here:
 *
 *  - synthesize(): a harmonic-process sampler driven by a pole/zero PSD. The
 *    spectrum is discretised onto an M-point FFT grid (M = next power of two
 *    >= n), each bin gets an independent complex Gaussian amplitude, and the
 *    phase trace is the real part of the inverse FFT. The resulting process
 *    is exactly stationary with autocorrelation R(j) = sum_k v_k cos(2 pi k
 *    j / M), which expected_autocorr() reports in e^{i phi} form.
 *
 *  - SurrogateSampler: circulant embedding of the exponential-plus-floor
 *    autocorrelation. Draws are complex Gaussian vectors whose second
 *    moments match the model exactly (for lags below M/2), so Monte Carlo
 *    interpolation error agrees with the closed-form cost up to sampling
 *    noise alone.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ptrs/error.hpp"
#include "ptrs/exp_model.hpp"
#include "ptrs/math/fft.hpp"
#include "ptrs/math/numeric.hpp"
#include "ptrs/math/rng.hpp"
#include "ptrs/psd.hpp"

namespace ptrs::noise {

/// Per-bin variances of the harmonic process, v_k for k = 0..M-1.
struct HarmonicSpectrum {
    std::size_t m = 0;       ///< FFT grid size (power of two)
    double fs_hz = 0.0;      ///< sampling rate the grid was built for
    std::vector<double> v;   ///< bin variances in rad^2; v[0] = 0

    /// Total phase variance R(0) = sum of all bin variances.
    double total_power() const {
        return static_cast<double>(math::blocked_sum(
            v.size(), [&](std::size_t k) { return static_cast<long double>(v[k]); }));
    }
};

/**
 * Discretise a PSD onto the harmonic grid for traces of length n sampled at
 * fs_hz. Bin k carries the offset frequency min(k, M-k) * fs/M, so the grid
 * is symmetric and the synthesised phase is real.
 */
inline HarmonicSpectrum build_harmonic_spectrum(const PsdSpec& spec, double fc_hz,
                                                double fs_hz, std::size_t n) {
    if (n < 1) throw DomainError("build_harmonic_spectrum: need n >= 1");
    if (!(fs_hz > 0.0))
        throw DomainError("build_harmonic_spectrum: sampling rate must be positive, got " +
                          std::to_string(fs_hz));
    spec.validate();

    HarmonicSpectrum hs;
    hs.m = math::next_pow2(n);
    hs.fs_hz = fs_hz;
    hs.v.assign(hs.m, 0.0);
    const double df = fs_hz / static_cast<double>(hs.m);
    for (std::size_t k = 1; k < hs.m; ++k) {
        const std::size_t kk = std::min(k, hs.m - k);
        const double f = static_cast<double>(kk) * df;
        hs.v[k] = df * psd_linear_at(spec, f, fc_hz);
    }
    return hs;
}

/**
 * Draw one stationary phase trace of length n from the harmonic spectrum.
 * Consumes one complex Gaussian per positive-frequency bin; pass a stream
 * dedicated to this trace for scheduling-independent reproducibility.
 */
inline std::vector<double> synthesize(const HarmonicSpectrum& hs, std::size_t n,
                                      math::RandomStream& rng) {
    if (n < 1 || n > hs.m)
        throw DomainError("synthesize: trace length " + std::to_string(n) +
                          " incompatible with grid of size " + std::to_string(hs.m));
    const std::size_t m = hs.m;
    const double dm = static_cast<double>(m);
    std::vector<std::complex<double>> x(m, {0.0, 0.0});
    for (std::size_t k = 1; k < m / 2; ++k) {
        const auto [g1, g2] = rng.normal_pair();
        const double amp = dm * std::sqrt(hs.v[k] / 2.0);
        x[k] = {amp * g1, amp * g2};
        x[m - k] = std::conj(x[k]);
    }
    if (m >= 2) {
        const auto [g1, g2] = rng.normal_pair();
        (void)g2;
        x[m / 2] = {dm * std::sqrt(hs.v[m / 2]) * g1, 0.0};
    }
    math::fft(x, /*inverse=*/true);
    std::vector<double> phi(n);
    for (std::size_t t = 0; t < n; ++t) phi[t] = x[t].real();
    return phi;
}

/// Convenience wrapper: build the grid and draw one trace.
inline std::vector<double> synthesize(const PsdSpec& spec, double fc_hz,
                                      double fs_hz, std::size_t n,
                                      math::RandomStream& rng) {
    const HarmonicSpectrum hs = build_harmonic_spectrum(spec, fc_hz, fs_hz, n);
    return synthesize(hs, n, rng);
}

/**
 * Exact autocorrelation of e^{i phi} for traces produced by synthesize():
 * gamma(j) = exp(R(j) - R(0)) with R(j) = sum_k v_k cos(2 pi k j / M).
 * Returns lags 0..max_lag inclusive.
 */
inline std::vector<double> expected_autocorr(const HarmonicSpectrum& hs,
                                             std::size_t max_lag) {
    const std::size_t m = hs.m;
    if (max_lag >= m)
        throw DomainError("expected_autocorr: lag " + std::to_string(max_lag) +
                          " not below grid size " + std::to_string(m));
    std::vector<double> gam(max_lag + 1);
    const long double w0 = 2.0L * static_cast<long double>(M_PI) / static_cast<long double>(m);
    std::vector<long double> r(max_lag + 1, 0.0L);
    for (std::size_t j = 0; j <= max_lag; ++j)
        r[j] = math::blocked_sum(m, [&](std::size_t k) {
            return static_cast<long double>(hs.v[k]) *
                   std::cos(w0 * static_cast<long double>(k) * static_cast<long double>(j));
        });
    for (std::size_t j = 0; j <= max_lag; ++j)
        gam[j] = static_cast<double>(std::exp(r[j] - r[0]));
    return gam;
}

inline std::vector<double> expected_autocorr(const PsdSpec& spec, double fc_hz,
                                             double fs_hz, std::size_t n,
                                             std::size_t max_lag) {
    return expected_autocorr(build_harmonic_spectrum(spec, fc_hz, fs_hz, n), max_lag);
}

/// Empirical autocorrelation of e^{i phi} averaged over traces and time.
struct AutocorrEstimate {
    std::size_t max_lag = 0;
    std::vector<double> values;     ///< Re gamma-hat(j), j = 0..max_lag; values[0] = 1
    std::size_t n_realizations = 0;
    double max_imag = 0.0;          ///< largest |Im gamma-hat(j)|, a sanity diagnostic
};

inline AutocorrEstimate empirical_autocorr(
    const std::vector<std::vector<double>>& phase_traces, std::size_t max_lag) {
    if (phase_traces.empty())
        throw DomainError("empirical_autocorr: no traces given");
    const std::size_t n = phase_traces.front().size();
    for (const auto& tr : phase_traces)
        if (tr.size() != n)
            throw DomainError("empirical_autocorr: traces have differing lengths");
    if (max_lag >= n)
        throw DomainError("empirical_autocorr: lag " + std::to_string(max_lag) +
                          " not below trace length " + std::to_string(n));

    AutocorrEstimate est;
    est.max_lag = max_lag;
    est.n_realizations = phase_traces.size();
    est.values.assign(max_lag + 1, 0.0);
    est.values[0] = 1.0;

    // E[e^{i phi_{t+j}} e^{-i phi_t}]; cos/sin of phase differences keeps the
    // whole computation real.
    for (std::size_t j = 1; j <= max_lag; ++j) {
        long double re = 0.0L, im = 0.0L;
        for (const auto& tr : phase_traces) {
            re += math::blocked_sum(n - j, [&](std::size_t t) {
                return static_cast<long double>(std::cos(tr[t + j] - tr[t]));
            });
            im += math::blocked_sum(n - j, [&](std::size_t t) {
                return static_cast<long double>(std::sin(tr[t + j] - tr[t]));
            });
        }
        const long double cnt =
            static_cast<long double>(phase_traces.size()) * static_cast<long double>(n - j);
        est.values[j] = static_cast<double>(re / cnt);
        est.max_imag = std::max(est.max_imag, std::abs(static_cast<double>(im / cnt)));
    }
    return est;
}

/**
 * Circulant-embedding sampler whose draws have autocorrelation exactly equal
 * to the exponential-plus-floor model (for lags below half the embedding
 * size). Negative circulant eigenvalues, if any, are clipped to zero and
 * their mass recorded.
 */
class SurrogateSampler {
  public:
    SurrogateSampler(const model::ExpModel& m, std::size_t n) : n_(n) {
        if (n < 2) throw DomainError("SurrogateSampler: need n >= 2");
        m_ = math::next_pow2(2 * (n - 1));
        std::vector<std::complex<double>> c(m_);
        for (std::size_t k = 0; k < m_; ++k) {
            const auto lag = static_cast<long long>(std::min(k, m_ - k));
            c[k] = {model::gamma_e(m, lag), 0.0};
        }
        math::fft(c);
        sqrt_eig_.resize(m_);
        long double clipped = 0.0L, total = 0.0L;
        for (std::size_t k = 0; k < m_; ++k) {
            const double e = c[k].real();
            total += std::abs(static_cast<long double>(e));
            if (e < 0.0) {
                clipped += -static_cast<long double>(e);
                sqrt_eig_[k] = 0.0;
            } else {
                sqrt_eig_[k] = std::sqrt(e);
            }
        }
        clipped_mass_ = total > 0.0L ? static_cast<double>(clipped / total) : 0.0;
    }

    std::size_t embedding_size() const { return m_; }

    /// Fraction of total eigenvalue mass lost to clipping (0 when the
    /// embedding is positive semidefinite, the common case).
    double clipped_mass() const { return clipped_mass_; }

    /// One trace of n unit-variance complex Gaussians with model
    /// autocorrelation. Safe to call concurrently with distinct streams.
    std::vector<std::complex<double>> draw(math::RandomStream& rng) const {
        std::vector<std::complex<double>> z(m_);
        for (std::size_t k = 0; k < m_; ++k) z[k] = sqrt_eig_[k] * rng.complex_normal();
        math::fft(z, /*inverse=*/true);
        const double scale = std::sqrt(static_cast<double>(m_));
        std::vector<std::complex<double>> out(n_);
        for (std::size_t t = 0; t < n_; ++t) out[t] = z[t] * scale;
        return out;
    }

  private:
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<double> sqrt_eig_;
    double clipped_mass_ = 0.0;
};

/// Convenience wrapper matching the sampler: one surrogate trace per call.
inline std::vector<std::complex<double>> synthesize_from_autocorr(
    const model::ExpModel& m, std::size_t n, math::RandomStream& rng,
    double* clipped_mass = nullptr) {
    const SurrogateSampler s(m, n);
    if (clipped_mass) *clipped_mass = s.clipped_mass();
    return s.draw(rng);
}

}  // namespace ptrs::noise
