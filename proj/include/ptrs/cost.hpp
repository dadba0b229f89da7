/**
 * @file cost.hpp
 * @brief The global interpolation cost J = N - sum_n w_n^T gamma_n,
 *        evaluated three mutually checking ways.
 *
 * Methods:
 *  - cost_numeric: the definition, via dense-solve coefficients. Reference
 *    oracle for everything else.
 *  - cost_boxed: single closed expression in lambda = e^{-a delta},
 *    assembled from the closed sums exposed by cost_terms().
 *  - cost_quasipoly: the same cost written as a ratio of quasi-polynomials
 *    in lambda (monomial rows plus a log-lambda block that is evaluated
 *    exactly, since log(lambda)/a = -delta).
 *
 * All closed evaluators run in extended precision with exponents merged
 * before exponentiation, so they stay finite and accurate at block lengths
 * in the thousands where naive lambda^{1-N_P} factors would overflow.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ptrs/error.hpp"
#include "ptrs/exp_model.hpp"
#include "ptrs/math/numeric.hpp"
#include "ptrs/pilot_pattern.hpp"
#include "ptrs/wiener.hpp"

namespace ptrs::cost {

using ptrs::wiener::PilotPattern;
using ptrs::wiener::beta;
using ptrs::wiener::kp;

enum class Method { numeric, boxed, quasipoly };

inline std::string method_name(Method m) {
    switch (m) {
        case Method::numeric: return "numeric";
        case Method::boxed: return "boxed";
        case Method::quasipoly: return "quasipoly";
    }
    return "unknown";
}

struct CostReport {
    double j_abs = 0.0;  ///< cost in the same units as N, in [0, N]
    double j_pct = 0.0;  ///< 100 * j_abs / N
    Method method = Method::numeric;
    std::map<std::string, double> terms;  ///< named intermediates, closed paths only
};

namespace detail {

/// Common extended-precision quantities shared by the closed evaluators.
struct ClosedContext {
    long double a, c, lam, n, np, delta;
    long double ea, e2a;
    long double one_m_ea;   ///< 1 - e^{a}   (negative), via expm1
    long double one_m_e2a;  ///< 1 - e^{2a}  (negative), via expm1
    long double one_m_lam;  ///< 1 - lambda, via expm1
    long double p1_off;     ///< e^{-a (p1 - 1)}
    long double p1_off2;
    long double tail;       ///< e^{-a (N - p_last)}
    long double tail2;
    long double rho;        ///< c (lambda (2 - N_P) + N_P)
    long double d1;         ///< 1 + lambda + rho
};

inline ClosedContext make_context(const model::ExpModel& m, const PilotPattern& pat,
                                  const char* who) {
    if (pat.n_pilots < 3)
        throw FallbackToNumeric(std::string(who) +
                                ": closed form needs >= 3 pilots, got " +
                                std::to_string(pat.n_pilots));
    ClosedContext x{};
    x.a = static_cast<long double>(m.a);
    const auto bl = static_cast<long double>(m.b);
    x.c = bl / (1.0L - bl);
    x.n = static_cast<long double>(pat.n_total);
    x.np = static_cast<long double>(pat.n_pilots);
    x.delta = static_cast<long double>(pat.delta);
    x.lam = std::exp(-x.a * x.delta);
    if (!(x.a > 0.0L))
        throw DomainError(std::string(who) +
                          ": a = 0 makes the factor 1 - e^{a} singular");
    if (!(x.lam < 1.0L))
        throw DomainError(std::string(who) +
                          ": lambda = 1 makes the factor 1 - lambda^2 singular");
    x.ea = std::exp(x.a);
    x.e2a = std::exp(2.0L * x.a);
    x.one_m_ea = -std::expm1(x.a);
    x.one_m_e2a = -std::expm1(2.0L * x.a);
    x.one_m_lam = -std::expm1(-x.a * x.delta);
    x.p1_off = std::exp(-x.a * static_cast<long double>(pat.p1 - 1));
    x.p1_off2 = x.p1_off * x.p1_off;
    x.tail = std::exp(-x.a * static_cast<long double>(pat.n_total - pat.last_pilot()));
    x.tail2 = x.tail * x.tail;
    x.rho = x.c * (x.lam * (2.0L - x.np) + x.np);
    x.d1 = 1.0L + x.lam + x.rho;
    return x;
}

}  // namespace detail

/**
 * The named closed sums feeding the boxed cost, each equal to its
 * brute-force counterpart over n = 1..N (or over the pilot span for the
 * *_mid variants):
 *
 *   sum_beta        = sum_n beta_n
 *   sum_beta_sq     = sum_n beta_n^2
 *   j_beta          = sum_n (2 (1+lambda) beta_n - beta_n^2)
 *   sum_v_gamma     = sum_n v_n^T gamma0_n   (gamma0 the pure exponential part)
 *   sum_*_mid       = same sums restricted to n = p_1 .. p_{N_P}-1
 *   rho_lambda      = c (lambda (2 - N_P) + N_P)
 */
inline std::map<std::string, double> cost_terms(const model::ExpModel& m,
                                                const PilotPattern& pat) {
    const auto x = detail::make_context(m, pat, "cost_terms");
    const long double lam = x.lam, np = x.np, delta = x.delta;
    const long double p1s = x.p1_off, p2s = x.p1_off2, g1 = x.tail, g2 = x.tail2;
    const long double q = x.one_m_ea * x.one_m_ea + 6.0L * x.ea;
    const long double one_m_ema = -std::expm1(-x.a);  // 1 - e^{-a}

    const long double sum_beta =
        ((lam * (np - 2.0L) - np) * (1.0L + x.ea) + (1.0L + lam) * (p1s + g1)) /
        x.one_m_ea;
    const long double sum_beta_sq =
        (1.0L + lam) * (lam * (np - 2.0L) - np) * (x.e2a + 1.0L) / x.one_m_e2a +
        ((1.0L + lam) * (1.0L + lam) / x.one_m_e2a) * (p2s + g2) +
        2.0L * lam * delta * (np - 1.0L);
    const long double j_beta =
        (1.0L + lam) * (lam * (np - 2.0L) - np) * q / x.one_m_e2a +
        ((1.0L + lam) * (1.0L + lam) / x.one_m_ea) *
            (2.0L * p1s + 2.0L * g1 - (p2s + g2) / (1.0L + x.ea)) -
        2.0L * lam * delta * (np - 1.0L);
    const long double one_m_lam2 = -std::expm1(-2.0L * x.a * delta);
    const long double sum_v_gamma =
        (one_m_lam2 / x.one_m_e2a) * (p2s - np * (x.e2a + 1.0L) + g2) -
        2.0L * lam * lam * delta * (np - 1.0L);

    const long double sum_beta_mid =
        (np - 1.0L) * x.one_m_lam * (1.0L / one_m_ema - 1.0L / x.one_m_ea);
    const long double sum_beta_sq_mid =
        2.0L * lam * delta * (np - 1.0L) +
        one_m_lam2 * (np - 1.0L) * (x.e2a + 1.0L) / (x.e2a - 1.0L);
    const long double sum_v_gamma_mid =
        one_m_lam2 * (np - 1.0L) * (x.e2a + 1.0L) / (x.e2a - 1.0L) -
        2.0L * lam * lam * delta * (np - 1.0L);

    return {{"sum_beta", static_cast<double>(sum_beta)},
            {"sum_beta_sq", static_cast<double>(sum_beta_sq)},
            {"j_beta", static_cast<double>(j_beta)},
            {"sum_v_gamma", static_cast<double>(sum_v_gamma)},
            {"sum_beta_mid", static_cast<double>(sum_beta_mid)},
            {"sum_beta_sq_mid", static_cast<double>(sum_beta_sq_mid)},
            {"sum_v_gamma_mid", static_cast<double>(sum_v_gamma_mid)},
            {"rho_lambda", static_cast<double>(x.rho)}};
}

namespace detail {

inline CostReport finish(long double j_abs, const PilotPattern& pat, Method method,
                         std::map<std::string, double> terms) {
    CostReport r;
    r.method = method;
    const auto n = static_cast<long double>(pat.n_total);
    j_abs = std::clamp(j_abs, 0.0L, n);
    r.j_abs = static_cast<double>(j_abs);
    r.j_pct = static_cast<double>(100.0L * j_abs / n);
    r.terms = std::move(terms);
    return r;
}

}  // namespace detail

/**
 * Reference cost straight from the definition: factor the pilot matrix once
 * and accumulate gamma_n^T R^{-1} gamma_n over every position. Extended
 * precision end to end; the per-position values are reduced with a fixed
 * block structure so the total is bit-identical regardless of threading.
 * Pass jn_out to receive the per-position costs J_n = 1 - gamma_n^T R^{-1}
 * gamma_n.
 */
inline CostReport cost_numeric(const model::ExpModel& m, const PilotPattern& pat,
                               std::vector<double>* jn_out = nullptr) {
    using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    const auto np = static_cast<std::size_t>(pat.n_pilots);
    const auto n_total = static_cast<std::size_t>(pat.n_total);

    LMat r(np, np);
    for (std::size_t i = 0; i < np; ++i)
        for (std::size_t j = 0; j < np; ++j)
            r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                static_cast<long double>(model::gamma_e(
                    m, static_cast<long long>(j > i ? j - i : i - j) * pat.delta));

    Eigen::LLT<LMat> llt(r);
    bool use_llt = false;
    if (llt.info() == Eigen::Success) {
        const auto d = llt.matrixLLT().diagonal();
        const long double dmax = d.maxCoeff(), dmin = d.minCoeff();
        use_llt = dmin > 0.0L && (dmax / dmin) * (dmax / dmin) < 1e12L;
    }
    Eigen::FullPivLU<LMat> lu;
    if (!use_llt) {
        lu.compute(r);
        if (!lu.isInvertible())
            throw SingularModel("cost_numeric: pilot matrix singular for a = " +
                                std::to_string(m.a) + ", b = " + std::to_string(m.b) +
                                ", delta = " + std::to_string(pat.delta) +
                                ", n_pilots = " + std::to_string(pat.n_pilots));
    }

    std::vector<long double> explained(n_total);
    math::parallel_for(n_total, [&](std::size_t row) {
        const long long n = static_cast<long long>(row) + 1;
        LVec g(np);
        for (std::size_t j = 0; j < np; ++j)
            g(static_cast<Eigen::Index>(j)) = static_cast<long double>(
                model::gamma_e(m, n - pat.pilot(static_cast<long long>(j) + 1)));
        if (use_llt) {
            LVec u = g;
            llt.matrixL().solveInPlace(u);
            explained[row] = u.squaredNorm();
        } else {
            explained[row] = g.dot(lu.solve(g));
        }
    });

    if (jn_out) {
        jn_out->resize(n_total);
        for (std::size_t i = 0; i < n_total; ++i)
            (*jn_out)[i] = static_cast<double>(1.0L - explained[i]);
    }
    const long double total =
        math::blocked_sum(n_total, [&](std::size_t i) { return explained[i]; });
    return detail::finish(static_cast<long double>(pat.n_total) - total, pat,
                          Method::numeric, {});
}

/// Closed-form cost as one boxed expression in lambda; exposes its
/// intermediate sums in the report's terms map.
inline CostReport cost_boxed(const model::ExpModel& m, const PilotPattern& pat) {
    const auto x = detail::make_context(m, pat, "cost_boxed");
    const long double q = x.one_m_ea * x.one_m_ea + 6.0L * x.ea;
    // (c/d1) * rho * (N - q / (c (1-e^{2a}))) regrouped so nothing divides by c.
    const long double term_beta =
        (x.rho / x.d1) * (x.c * x.n - q / x.one_m_e2a) +
        (x.c / x.d1) * ((1.0L + x.lam) / x.one_m_ea) *
            (2.0L * x.p1_off + 2.0L * x.tail -
             (x.p1_off2 + x.tail2) / (1.0L + x.ea));
    const long double term_v =
        (x.p1_off2 - x.np * (x.e2a + 1.0L) + x.tail2) / x.one_m_e2a;
    const long double term_d = (x.lam / (1.0L + x.lam)) * 2.0L * x.delta *
                               (x.np - 1.0L) *
                               (x.c / x.d1 + x.lam / x.one_m_lam);
    const long double j_abs =
        x.n - (term_beta + term_v - term_d) / (1.0L + x.c);
    return detail::finish(j_abs, pat, Method::boxed, cost_terms(m, pat));
}

/**
 * Quasi-polynomial form: J = N - (1/(1+c)) J_num(lambda) / J_den(lambda).
 * The numerator is a fixed list of monomial rows (some with negative powers
 * of lambda that are merged with decaying e^{-a(N-p_1)} factors before
 * exponentiation) plus a log-lambda block evaluated exactly at
 * log(lambda)/a = -delta. The denominator factors as
 * (1 + lambda + rho_lambda)(1 - lambda^2).
 */
inline CostReport cost_quasipoly(const model::ExpModel& m, const PilotPattern& pat) {
    const auto x = detail::make_context(m, pat, "cost_quasipoly");
    const long double c = x.c, np = x.np, lam = x.lam;
    const long double la = -x.a * x.delta;  // log lambda, exactly
    const long double p1s = x.p1_off, p2s = x.p1_off2;
    const long double span = x.a * (x.n - static_cast<long double>(pat.p1));

    const long double j3 =
        ((1.0L + c * (2.0L - np)) * (np * (x.e2a + 1.0L) - p2s) +
         c * (np - 2.0L) *
             (c * x.n * x.one_m_e2a - x.one_m_ea * x.one_m_ea - 6.0L * x.ea) -
         2.0L * c * p1s * (x.ea + 1.0L) + c * p2s) /
        x.one_m_e2a;
    const long double j2 =
        c * np * (6.0L * x.ea + x.one_m_ea * x.one_m_ea) / x.one_m_e2a -
        c * c * np * x.n +
        (c / x.one_m_ea) * (p2s / (x.ea + 1.0L) - 2.0L * p1s) +
        ((1.0L + c * np) / x.one_m_e2a) * (np * (x.e2a + 1.0L) - p2s);

    long double num = 0.0L;
    // Plain polynomial rows at powers 3, 2, 1, 0.
    num += j3 * std::exp(3.0L * la) + j2 * std::exp(2.0L * la);
    num += -j3 * std::exp(la) - j2;
    // Rows carrying e^{-a(N-p_1)}: powers 4-N_P .. 1-N_P.
    const long double j4n = 2.0L * c / std::expm1(x.a);
    for (const auto& [k, sgn] : std::initializer_list<std::pair<long double, long double>>{
             {4.0L - np, 1.0L}, {3.0L - np, 1.0L}, {2.0L - np, -1.0L}, {1.0L - np, -1.0L}})
        num += sgn * j4n * std::exp(-span + la * k);
    // Rows carrying e^{-2a(N-p_1)}: powers 5-2N_P .. 2-2N_P.
    const long double e2am1 = std::expm1(2.0L * x.a);
    const long double j5c = (1.0L + c * (1.0L - np)) / e2am1;
    const long double j4c = (1.0L + c * (np - 1.0L)) / e2am1;
    for (const auto& [k, coeff] : std::initializer_list<std::pair<long double, long double>>{
             {5.0L - 2.0L * np, j5c},
             {4.0L - 2.0L * np, j4c},
             {3.0L - 2.0L * np, -j5c},
             {2.0L - 2.0L * np, -j4c}})
        num += coeff * std::exp(-2.0L * span + la * k);
    // log-lambda block, evaluated exactly: (log lambda)/a = -delta.
    const long double jj3 = 2.0L * (np - 1.0L) * (1.0L + c * (2.0L - np));
    const long double jj2 = 2.0L * (np - 1.0L) * (1.0L + c * (np - 1.0L));
    const long double jj1 = 2.0L * (np - 1.0L) * c;
    num += -x.delta * (jj3 * lam * lam * lam + jj2 * lam * lam + jj1 * lam);

    const long double den = (c * (np - 2.0L) - 1.0L) * (lam * lam * lam - lam) -
                            (1.0L + c * np) * (lam * lam - 1.0L);
    if (den == 0.0L)
        throw DomainError("cost_quasipoly: denominator vanished (lambda = " +
                          std::to_string(static_cast<double>(lam)) + ")");
    const long double j_abs = x.n - num / den / (1.0L + c);
    auto terms = cost_terms(m, pat);
    terms["quasipoly_den"] = static_cast<double>(den);
    return detail::finish(j_abs, pat, Method::quasipoly, std::move(terms));
}

/// Dispatch by method; boxed/quasipoly raise FallbackToNumeric below 3 pilots.
inline CostReport cost(const model::ExpModel& m, const PilotPattern& pat,
                       Method method) {
    switch (method) {
        case Method::numeric: return cost_numeric(m, pat);
        case Method::boxed: return cost_boxed(m, pat);
        case Method::quasipoly: return cost_quasipoly(m, pat);
    }
    throw DomainError("cost: unknown method");
}

struct SweepRow {
    long long delta = 0;
    long long n_pilots = 0;
    double j_pct = 0.0;
    std::string method;  ///< "boxed", "numeric-fallback", ..., or "error(...)"
};

/**
 * Cost against spacing: one row per requested delta, each with
 * N_P = ceil(N / delta) pilots starting at p1. Rows are computed in
 * parallel but emitted in input order; a failing delta annotates its row
 * instead of aborting the sweep.
 */
inline std::vector<SweepRow> cost_vs_spacing(const model::ExpModel& m,
                                             long long n_total, long long p1,
                                             const std::vector<long long>& deltas,
                                             Method method = Method::boxed) {
    std::vector<SweepRow> rows(deltas.size());
    math::parallel_for(deltas.size(), [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.delta = deltas[i];
        row.j_pct = std::numeric_limits<double>::quiet_NaN();
        try {
            const PilotPattern pat = wiener::from_spacing(n_total, deltas[i], p1);
            row.n_pilots = pat.n_pilots;
            try {
                const CostReport rep = cost(m, pat, method);
                row.j_pct = rep.j_pct;
                row.method = method_name(method);
            } catch (const FallbackToNumeric&) {
                const CostReport rep = cost_numeric(m, pat);
                row.j_pct = rep.j_pct;
                row.method = "numeric-fallback";
            }
        } catch (const Error& e) {
            row.method = std::string("error(") + e.what() + ")";
        }
    });
    return rows;
}

}  // namespace ptrs::cost
