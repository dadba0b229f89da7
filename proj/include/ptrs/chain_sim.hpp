/**
 * @file chain_sim.hpp
 * @brief Single-symbol Monte Carlo validation of the analytic interpolation
 *        cost against empirically measured tracking error.
 *
 * The received symbol at infinite SNR is y_n = alpha_n x_n with alpha_n the
 * multiplicative phase noise; pilots are known unit-modulus symbols, so the
 * per-pilot least-squares estimate alpha~_{p_j} = y_{p_j} conj(x_{p_j})
 * recovers alpha exactly on pilots. The Wiener interpolator fills in the
 * rest; the measured mean of sum_n |alpha_n - alpha^_n|^2 should match the
 * analytic cost J.
 *
 * Two generator modes:
 *  - surrogate: complex Gaussian traces whose second moments equal the
 *    exponential-plus-floor model autocorrelation exactly. The match with J
 *    is then exact up to Monte Carlo noise, allowing tight assertions.
 *  - physical: unit-modulus e^{i phi} traces synthesized from a PSD. The
 *    model is only an approximation of that process, so agreement is loose
 *    and reported rather than asserted.
 *
 * Trials run on independent, index-derived RNG streams and are reduced with
 * a fixed block structure, so results are identical no matter how the work
 * is scheduled.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ptrs/cost.hpp"
#include "ptrs/error.hpp"
#include "ptrs/exp_model.hpp"
#include "ptrs/math/numeric.hpp"
#include "ptrs/math/rng.hpp"
#include "ptrs/pilot_pattern.hpp"
#include "ptrs/psd.hpp"
#include "ptrs/synth.hpp"
#include "ptrs/wiener.hpp"

namespace ptrs::sim {

enum class Mode { surrogate, physical };

inline std::string mode_name(Mode m) {
    return m == Mode::surrogate ? "surrogate" : "physical";
}

struct SimScenario {
    wiener::PilotPattern pattern;
    model::ExpModel model;  ///< drives the surrogate and the analytic cost
    Mode mode = Mode::surrogate;

    // Physical mode only: the PSD the phase traces are synthesized from.
    std::optional<noise::PsdSpec> psd;
    double fc_hz = 0.0;
    double fs_hz = 0.0;

    std::size_t trials = 0;
    std::uint64_t seed = 0;

    /// Noise added to data-position samples only (demos); infinity = off.
    /// Pilots stay noiseless, so the tracking-error measurement is unchanged.
    double snr_db = std::numeric_limits<double>::infinity();
};

struct SimResult {
    double empirical_j_pct = 0.0;
    double stderr_pct = 0.0;
    double analytic_j_pct = 0.0;
    double z_score = 0.0;
    Mode mode = Mode::surrogate;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::complex<double> qpsk_symbol(math::RandomStream& rng) {
    static const double h = std::sqrt(0.5);
    const std::uint64_t bits = rng.next_u64();
    return {bits & 1 ? h : -h, bits & 2 ? h : -h};
}

}  // namespace detail

/// Run the Monte Carlo; deterministic in (scenario.seed, trials).
inline SimResult run(const SimScenario& sc) {
    if (sc.trials < 1) throw DomainError("run: need at least one trial");
    const auto& pat = sc.pattern;
    const auto n = static_cast<std::size_t>(pat.n_total);
    const auto np = static_cast<std::size_t>(pat.n_pilots);

    const wiener::WienerCoefficients coeffs = wiener::coefficients(sc.model, pat);
    const double analytic = cost::cost_numeric(sc.model, pat).j_pct;

    std::optional<noise::SurrogateSampler> sampler;
    std::optional<noise::HarmonicSpectrum> spectrum;
    if (sc.mode == Mode::surrogate) {
        sampler.emplace(sc.model, n);
    } else {
        if (!sc.psd)
            throw DomainError("run: physical mode needs a PSD specification");
        if (!(sc.fc_hz > 0.0) || !(sc.fs_hz > 0.0))
            throw DomainError("run: physical mode needs positive fc and fs");
        spectrum = noise::build_harmonic_spectrum(*sc.psd, sc.fc_hz, sc.fs_hz, n);
    }

    std::vector<bool> is_pilot(n + 1, false);
    for (long long j = 1; j <= pat.n_pilots; ++j)
        is_pilot[static_cast<std::size_t>(pat.pilot(j))] = true;
    const bool add_noise = std::isfinite(sc.snr_db);
    const double noise_sigma =
        add_noise ? std::sqrt(std::pow(10.0, -sc.snr_db / 10.0) / 2.0) : 0.0;

    std::vector<double> trial_err(sc.trials);
    math::parallel_for(sc.trials, [&](std::size_t t) {
        math::RandomStream rng(sc.seed, static_cast<std::uint64_t>(t));

        std::vector<std::complex<double>> alpha;
        if (sc.mode == Mode::surrogate) {
            alpha = sampler->draw(rng);
        } else {
            const std::vector<double> phi = noise::synthesize(*spectrum, n, rng);
            alpha.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                alpha[i] = {std::cos(phi[i]), std::sin(phi[i])};
        }

        // Transmit chain: known unit pilots, random data elsewhere.
        std::vector<std::complex<double>> pilot_est(np);
        for (long long j = 1; j <= pat.n_pilots; ++j) {
            const auto p = static_cast<std::size_t>(pat.pilot(j));
            const std::complex<double> x{1.0, 0.0};
            const std::complex<double> y = alpha[p - 1] * x;
            pilot_est[static_cast<std::size_t>(j - 1)] = y * std::conj(x);
        }
        for (std::size_t i = 1; i <= n; ++i) {
            if (is_pilot[i]) continue;
            std::complex<double> y = alpha[i - 1] * detail::qpsk_symbol(rng);
            if (add_noise) y += noise_sigma * rng.complex_normal() * std::sqrt(2.0);
            (void)y;  // data-position samples don't enter the tracking error
        }

        const std::vector<std::complex<double>> est =
            wiener::interpolate(coeffs, pilot_est);
        trial_err[t] = static_cast<double>(math::blocked_sum(n, [&](std::size_t i) {
            const std::complex<double> e = alpha[i] - est[i];
            return static_cast<long double>(std::norm(e));
        }));
    });

    const long double tn = static_cast<long double>(sc.trials);
    const long double mean = math::blocked_sum(sc.trials, [&](std::size_t t) {
                                 return static_cast<long double>(trial_err[t]);
                             }) /
                             tn;
    long double var = 0.0L;
    if (sc.trials > 1) {
        var = math::blocked_sum(sc.trials,
                                [&](std::size_t t) {
                                    const long double d = trial_err[t] - mean;
                                    return d * d;
                                }) /
              (tn - 1.0L);
    }
    const long double se_mean = sc.trials > 1 ? std::sqrt(var / tn) : 0.0L;

    SimResult res;
    res.mode = sc.mode;
    res.trials = sc.trials;
    res.seed = sc.seed;
    res.analytic_j_pct = analytic;
    const long double to_pct = 100.0L / static_cast<long double>(pat.n_total);
    res.empirical_j_pct = static_cast<double>(mean * to_pct);
    res.stderr_pct = static_cast<double>(se_mean * to_pct);
    if (res.stderr_pct > 0.0)
        res.z_score = (res.empirical_j_pct - res.analytic_j_pct) / res.stderr_pct;
    else
        res.z_score = res.empirical_j_pct == res.analytic_j_pct
                          ? 0.0
                          : std::numeric_limits<double>::infinity();
    return res;
}

}  // namespace ptrs::sim
