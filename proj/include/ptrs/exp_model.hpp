/**
 * @file exp_model.hpp
 * @brief Two-parameter exponential-plus-floor autocorrelation model and the
 *        least-squares fit that produces it.
 *
 * The model is gamma(j) = (1-b) e^{-a|j|} + b: an exponential decay at rate
 * `a` per sample towards a floor `b`. Equivalently, with c = b/(1-b),
 * gamma(j) = (e^{-a|j|} + c)/(1 + c). It captures oscillator phase-noise
 * correlation well enough to admit closed-form interpolation costs.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ptrs/error.hpp"

namespace ptrs::model {

/// Upper clamp for the floor parameter; keeps c = b/(1-b) finite.
inline constexpr double kFloorClamp = 1.0 - 1e-9;

/// A fit whose mean-square error exceeds this is flagged as unreliable.
inline constexpr double kFitMseFlagThreshold = 1e-2;

struct ExpModel {
    double a = 0.0;  ///< decay rate per sample, > 0
    double b = 0.0;  ///< floor correlation, in (0, 1)
    std::optional<double> fc_hz;    ///< carrier this fit corresponds to, if any
    std::optional<double> fit_mse;  ///< mean square error of the fit, if fitted
    bool fit_flagged = false;       ///< true when fit_mse > kFitMseFlagThreshold

    ExpModel() = default;

    ExpModel(double a_, double b_,
             std::optional<double> fc = std::nullopt,
             std::optional<double> mse = std::nullopt)
        : a(a_), b(std::min(b_, kFloorClamp)), fc_hz(fc), fit_mse(mse) {
        if (!(a > 0.0) || !std::isfinite(a))
            throw DomainError("ExpModel: decay rate a must be positive and finite, got " +
                              std::to_string(a_));
        if (!(b_ > 0.0) || !(b_ < 1.0))
            throw DomainError("ExpModel: floor b must lie in (0, 1), got " +
                              std::to_string(b_));
        if (fit_mse) fit_flagged = *fit_mse > kFitMseFlagThreshold;
    }

    /// c = b/(1-b), recomputed on demand so it can never go stale.
    double c() const { return b / (1.0 - b); }
};

/// Model autocorrelation at integer lag j (|j| is used).
inline double gamma_e(const ExpModel& m, long long j) {
    const double lag = std::abs(static_cast<double>(j));
    return (1.0 - m.b) * std::exp(-m.a * lag) + m.b;
}

/// Per-spacing correlation decay lambda = e^{-a delta}, clamped below 1.
inline double lambda_of(const ExpModel& m, long long delta) {
    const double lam = std::exp(-m.a * static_cast<double>(delta));
    return std::min(lam, 1.0 - 1e-12);
}

namespace detail {

/// For fixed decay rate, the optimal floor is an exact linear least-squares
/// solution: gamma(j) - e^{-aj} = b (1 - e^{-aj}).
inline std::pair<double, double> profile_floor(const std::vector<double>& gam,
                                               std::size_t j0, double a) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < gam.size(); ++i) {
        const double e = std::exp(-a * static_cast<double>(j0 + i));
        const double w = 1.0 - e;
        num += (gam[i] - e) * w;
        den += w * w;
    }
    double b = den > 0.0 ? num / den : 0.0;
    b = std::clamp(b, 0.0, kFloorClamp);
    double mse = 0.0;
    for (std::size_t i = 0; i < gam.size(); ++i) {
        const double e = std::exp(-a * static_cast<double>(j0 + i));
        const double r = gam[i] - (b + (1.0 - b) * e);
        mse += r * r;
    }
    return {b, mse / static_cast<double>(gam.size())};
}

}  // namespace detail

/**
 * Least-squares fit of (a, b) to an autocorrelation sequence over lags
 * [j_min, j_max] (inclusive, indices into `values`).
 *
 * Two stages: a coarse log-spaced grid over the decay rate with the floor
 * profiled out exactly, then Nelder-Mead refinement of (log a, b) down to an
 * MSE tolerance of 1e-12. Deterministic; ties broken towards the smallest
 * decay rate, then the smallest floor.
 */
inline ExpModel fit(const std::vector<double>& values, std::size_t j_min,
                    std::size_t j_max,
                    std::optional<double> fc_hz = std::nullopt) {
    if (j_max >= values.size() || j_min > j_max)
        throw DomainError("fit: lag range [" + std::to_string(j_min) + ", " +
                          std::to_string(j_max) + "] outside estimate of length " +
                          std::to_string(values.size()));
    if (j_max - j_min < 8)
        throw DomainError("fit: need a lag range of at least 8 samples");

    std::vector<double> gam(values.begin() + static_cast<std::ptrdiff_t>(j_min),
                            values.begin() + static_cast<std::ptrdiff_t>(j_max) + 1);

    double maxdev = 0.0;
    for (double g : gam) maxdev = std::max(maxdev, std::abs(g - 1.0));
    if (maxdev < 1e-7)
        throw DegenerateAutocorrelation(
            "fit: input is constant at 1; the floor parameter is unidentifiable");

    // Stage 1: log grid over the decay rate, floor profiled exactly.
    const double lo = 1e-5, hi = 1.0;
    const int ngrid = 240;
    double best_a = lo, best_b = 0.0, best_mse = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ngrid; ++i) {
        const double a = lo * std::pow(hi / lo, static_cast<double>(i) / (ngrid - 1));
        auto [b, mse] = detail::profile_floor(gam, j_min, a);
        if (mse < best_mse - 1e-18 ||
            (std::abs(mse - best_mse) <= 1e-18 &&
             (a < best_a || (a == best_a && b < best_b)))) {
            best_mse = mse;
            best_a = a;
            best_b = b;
        }
    }

    // Stage 2: Nelder-Mead on (log a, b).
    struct Pt {
        double la, b, f;
    };
    auto eval = [&](double la, double b) {
        const double a = std::exp(la);
        b = std::clamp(b, 0.0, kFloorClamp);
        double mse = 0.0;
        for (std::size_t i = 0; i < gam.size(); ++i) {
            const double e = std::exp(-a * static_cast<double>(j_min + i));
            const double r = gam[i] - (b + (1.0 - b) * e);
            mse += r * r;
        }
        return mse / static_cast<double>(gam.size());
    };
    const double la0 = std::log(best_a);
    std::vector<Pt> s = {{la0, best_b, best_mse},
                         {la0 + 0.05, best_b, eval(la0 + 0.05, best_b)},
                         {la0, std::min(best_b + 0.01, kFloorClamp),
                          eval(la0, std::min(best_b + 0.01, kFloorClamp))}};
    auto order = [&]() {
        std::sort(s.begin(), s.end(), [](const Pt& x, const Pt& y) {
            if (x.f != y.f) return x.f < y.f;
            if (x.la != y.la) return x.la < y.la;
            return x.b < y.b;
        });
    };
    order();
    for (int it = 0; it < 500 && (s[2].f - s[0].f) > 1e-12 * (1.0 + s[0].f); ++it) {
        const double cla = (s[0].la + s[1].la) / 2.0;
        const double cb = (s[0].b + s[1].b) / 2.0;
        const double rla = cla + (cla - s[2].la), rb = cb + (cb - s[2].b);
        const double fr = eval(rla, rb);
        if (fr < s[0].f) {
            const double ela = cla + 2.0 * (cla - s[2].la), eb = cb + 2.0 * (cb - s[2].b);
            const double fe = eval(ela, eb);
            s[2] = fe < fr ? Pt{ela, eb, fe} : Pt{rla, rb, fr};
        } else if (fr < s[1].f) {
            s[2] = {rla, rb, fr};
        } else {
            const double kla = cla + 0.5 * (s[2].la - cla), kb = cb + 0.5 * (s[2].b - cb);
            const double fk = eval(kla, kb);
            if (fk < s[2].f) {
                s[2] = {kla, kb, fk};
            } else {
                for (int i = 1; i < 3; ++i) {
                    s[i].la = s[0].la + 0.5 * (s[i].la - s[0].la);
                    s[i].b = s[0].b + 0.5 * (s[i].b - s[0].b);
                    s[i].f = eval(s[i].la, s[i].b);
                }
            }
        }
        order();
    }

    const double a_fit = std::exp(s[0].la);
    const double b_fit = std::clamp(s[0].b, 1e-12, kFloorClamp);
    return ExpModel(a_fit, b_fit, fc_hz, s[0].f);
}

}  // namespace ptrs::model
