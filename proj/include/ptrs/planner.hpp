/**
 * @file planner.hpp
 * @brief Pilot-spacing planning on the affine cost model J(delta) ~= omega *
 *        delta + eta (J in percent of N).
 *
 * The cost curve is close to affine in the spacing over the operating range,
 * and its slope/intercept grow quadratically with the carrier frequency.
 * Inverting the affine model under a cost ceiling gives the maximum
 * admissible spacing delta_PF; a minimum spacing delta_0 encodes the
 * overhead budget. An optional exact-refinement step re-checks the ceiling
 * with the closed-form cost and backs off if the affine model was
 * optimistic.
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

#include "ptrs/cost.hpp"
#include "ptrs/error.hpp"
#include "ptrs/exp_model.hpp"
#include "ptrs/pilot_pattern.hpp"

namespace ptrs::planner {

/// Default quadratic growth of the affine parameters with carrier frequency
/// (percent of N per Hz^2).
inline constexpr double kOmegaQuadCoeff = 5.03e-25;
inline constexpr double kEtaQuadCoeff = 2.17e-25;

/// Carrier range the quadratic model was calibrated on.
inline constexpr double kFcSupportedLoHz = 100e9;
inline constexpr double kFcSupportedHiHz = 300e9;

struct LinearCostFit {
    double omega = 0.0;  ///< slope, % of N per unit spacing
    double eta = 0.0;    ///< intercept, % of N
    double r2 = 0.0;     ///< coefficient of determination
    double delta_lo = 0.0, delta_hi = 0.0;  ///< spacing range of the input
};

/**
 * Least-squares affine fit to (delta, J_pct) sweep points. Requires at
 * least three points with distinct spacings; rejects fits whose r^2 falls
 * below 0.99 (the affine model is only trusted where the curve really is a
 * line).
 */
inline LinearCostFit fit_affine(const std::vector<std::pair<double, double>>& sweep) {
    if (sweep.size() < 3)
        throw DomainError("fit_affine: need at least 3 points, got " +
                          std::to_string(sweep.size()));
    double xlo = sweep.front().first, xhi = sweep.front().first;
    long double sx = 0.0L, sy = 0.0L;
    for (const auto& [x, y] : sweep) {
        xlo = std::min(xlo, x);
        xhi = std::max(xhi, x);
        sx += x;
        sy += y;
    }
    if (xlo == xhi)
        throw DomainError("fit_affine: all points share spacing " +
                          std::to_string(xlo) + "; slope is undetermined");
    const auto n = static_cast<long double>(sweep.size());
    const long double mx = sx / n, my = sy / n;
    long double sxx = 0.0L, sxy = 0.0L, syy = 0.0L;
    for (const auto& [x, y] : sweep) {
        const long double dx = x - mx, dy = y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (syy == 0.0L)
        throw DomainError(
            "fit_affine: cost is constant over the sweep; r^2 is undefined");
    LinearCostFit fit;
    fit.omega = static_cast<double>(sxy / sxx);
    fit.eta = static_cast<double>(my - (sxy / sxx) * mx);
    long double ss_res = 0.0L;
    for (const auto& [x, y] : sweep) {
        const long double r = y - (fit.omega * x + fit.eta);
        ss_res += r * r;
    }
    fit.r2 = static_cast<double>(1.0L - ss_res / syy);
    fit.delta_lo = xlo;
    fit.delta_hi = xhi;
    if (fit.r2 < 0.99)
        throw DomainError("fit_affine: r^2 = " + std::to_string(fit.r2) +
                          " below 0.99; cost is not affine over spacings [" +
                          std::to_string(xlo) + ", " + std::to_string(xhi) + "]");
    return fit;
}

/**
 * Affine parameters versus carrier: omega = omega_coeff * fc^2, eta =
 * eta_coeff * fc^2. If in_supported_range is given it reports whether fc
 * lies inside the calibrated [100, 300] GHz window (callers may warn; the
 * evaluation itself is well defined everywhere).
 */
inline std::pair<double, double> omega_eta_of_fc(double fc_hz,
                                                 double omega_coeff = kOmegaQuadCoeff,
                                                 double eta_coeff = kEtaQuadCoeff,
                                                 bool* in_supported_range = nullptr) {
    if (fc_hz < 0.0)
        throw DomainError("omega_eta_of_fc: carrier must be >= 0, got " +
                          std::to_string(fc_hz));
    if (in_supported_range)
        *in_supported_range = fc_hz >= kFcSupportedLoHz && fc_hz <= kFcSupportedHiHz;
    return {omega_coeff * fc_hz * fc_hz, eta_coeff * fc_hz * fc_hz};
}

/**
 * Invert the affine ceiling: largest integer spacing with omega * delta +
 * eta <= max_cost_pct. Returns 0 when no positive spacing satisfies the
 * ceiling (max_cost_pct <= eta).
 */
inline long long max_spacing(double max_cost_pct, double omega, double eta) {
    if (!(omega > 0.0))
        throw DomainError("max_spacing: slope must be positive, got " +
                          std::to_string(omega));
    // The 1e-9 relative nudge absorbs one-ulp rounding in the affine
    // inversion; a genuine boundary sits a whole omega (~1e-2) away, so it
    // can never promote a truly infeasible spacing.
    const double d = std::floor((max_cost_pct - eta) / omega * (1.0 + 1e-9));
    if (!(d >= 1.0)) return 0;
    return static_cast<long long>(d);
}

struct PlanResult {
    std::optional<double> fc_hz;  ///< carrier, when the plan came from one
    long long n_total = 0;
    double max_cost_pct = 0.0;
    long long delta0 = 0;

    double omega = 0.0, eta = 0.0;
    double j_at_delta0_pct = 0.0;  ///< affine prediction at the minimum spacing
    long long delta_pf = 0;        ///< chosen spacing (0 when none exists)
    long long n_pilots = 0;        ///< ceil(N / delta_pf)
    double overhead_pct = 0.0;     ///< 100 / delta_pf (the ~1/delta approximation)
    bool feasible = false;
    std::string method;  ///< "affine" or "affine+exact"
    std::string note;    ///< explanation when infeasible or refined
};

/**
 * Plan from explicit affine parameters. Feasibility means the cost ceiling
 * is satisfiable without dropping below the minimum spacing delta0: J(delta0)
 * <= max_cost. The chosen spacing is max(delta0, max_spacing). With
 * exact_refine and a model, the closed-form cost re-checks the ceiling at
 * the chosen spacing and backs off one spacing at a time (never below
 * delta0).
 */
inline PlanResult plan_with(double omega, double eta, std::optional<double> fc_hz,
                            long long n_total, double max_cost_pct, long long delta0,
                            bool exact_refine = false,
                            const std::optional<model::ExpModel>& refine_model =
                                std::nullopt) {
    if (delta0 < 1)
        throw DomainError("plan: minimum spacing must be >= 1, got " +
                          std::to_string(delta0));
    if (n_total < 1)
        throw DomainError("plan: block length must be >= 1, got " +
                          std::to_string(n_total));

    PlanResult res;
    res.fc_hz = fc_hz;
    res.n_total = n_total;
    res.max_cost_pct = max_cost_pct;
    res.delta0 = delta0;
    res.omega = omega;
    res.eta = eta;
    res.method = "affine";
    res.j_at_delta0_pct = omega * static_cast<double>(delta0) + eta;

    const long long unconstrained = max_spacing(max_cost_pct, omega, eta);
    res.feasible = res.j_at_delta0_pct <= max_cost_pct;
    res.delta_pf = res.feasible ? std::max(delta0, unconstrained) : unconstrained;
    if (!res.feasible)
        res.note = "cost at the minimum spacing " + std::to_string(delta0) +
                   " already exceeds the ceiling; meeting it would need spacing " +
                   std::to_string(unconstrained) +
                   ", violating the overhead constraint";

    if (res.feasible && exact_refine) {
        if (!refine_model)
            throw DomainError("plan: exact refinement requested without a model");
        res.method = "affine+exact";
        long long d = res.delta_pf;
        while (d > delta0) {
            const auto pat = wiener::from_spacing(n_total, d);
            double j;
            try {
                j = cost::cost_boxed(*refine_model, pat).j_pct;
            } catch (const FallbackToNumeric&) {
                j = cost::cost_numeric(*refine_model, pat).j_pct;
            }
            if (j <= max_cost_pct) break;
            --d;
        }
        if (d != res.delta_pf)
            res.note = "exact cost exceeded the ceiling at the affine choice " +
                       std::to_string(res.delta_pf) + "; backed off to " +
                       std::to_string(d);
        res.delta_pf = d;
        {
            const auto pat = wiener::from_spacing(n_total, d);
            double j;
            try {
                j = cost::cost_boxed(*refine_model, pat).j_pct;
            } catch (const FallbackToNumeric&) {
                j = cost::cost_numeric(*refine_model, pat).j_pct;
            }
            if (j > max_cost_pct) {
                res.feasible = false;
                res.note = "exact cost exceeds the ceiling even at the minimum spacing " +
                           std::to_string(delta0);
            }
        }
    }

    if (res.delta_pf >= 1) {
        res.n_pilots = (n_total + res.delta_pf - 1) / res.delta_pf;
        res.overhead_pct = 100.0 / static_cast<double>(res.delta_pf);
    } else {
        res.n_pilots = 0;
        res.overhead_pct = std::numeric_limits<double>::quiet_NaN();
    }
    return res;
}

/// Plan from a carrier frequency via the quadratic affine-parameter model.
inline PlanResult plan(double fc_hz, long long n_total, double max_cost_pct,
                       long long delta0, bool exact_refine = false,
                       const std::optional<model::ExpModel>& refine_model =
                           std::nullopt) {
    const auto [omega, eta] = omega_eta_of_fc(fc_hz);
    return plan_with(omega, eta, fc_hz, n_total, max_cost_pct, delta0, exact_refine,
                     refine_model);
}

}  // namespace ptrs::planner
