/**
 * @file wiener.hpp
 * @brief Linear MMSE (Wiener) interpolation of phase noise from pilot
 *        observations, with closed-form and dense-solve coefficient paths.
 *
 * For every symbol position n the interpolator weights are w_n = R^{-1}
 * gamma_n, where R is the pilot autocorrelation matrix and gamma_n the
 * pilot-to-position correlation vector, both under the exponential-plus-
 * floor model. Because R is an exponential Toeplitz matrix plus a rank-one
 * floor, its inverse has a closed form (tridiagonal Kac-Murdock-Szego
 * inverse combined through the Sherman-Morrison identity), and the weight
 * rows collapse to two terms: a shared rank-one profile scaled by beta_n and
 * a local three-pilot stencil v_n. The dense-solve path keeps the closed
 * forms honest.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptrs/error.hpp"
#include "ptrs/exp_model.hpp"
#include "ptrs/math/numeric.hpp"
#include "ptrs/pilot_pattern.hpp"

namespace ptrs::wiener {

/// Minimal row-major dense matrix; enough for weights and small inverses.
struct DenseMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct WienerCoefficients {
    DenseMatrix weights;  ///< N x N_P; row n-1 holds w_n
    PilotPattern pattern;
    model::ExpModel model;

    /// Weight of pilot j (1-based) at position n (1-based).
    double w(long long n, long long j) const {
        return weights.at(static_cast<std::size_t>(n - 1),
                          static_cast<std::size_t>(j - 1));
    }
};

/// Number of pilots at or before position n.
inline long long kp(const PilotPattern& pat, long long n) { return pat.kp(n); }

/**
 * The shared rank-one weight profile's scalar: beta_n is the correlation
 * mass position n sees from the first/last pilots and its two bracketing
 * pilots. Piecewise by position, with exponents merged before
 * exponentiation so nothing overflows at large N:
 *
 *   n <  p_1       : e^{-a (p_1 - n)} (1 + lambda)
 *   p_1 <= n < p_NP: e^{-a (n - p_K)} + e^{-a (p_{K+1} - n)},  K = kp(n)
 *   n >= p_NP      : e^{-a (n - p_NP)} (1 + lambda)
 *
 * (The middle case is the merged-exponent form of
 * e^{-a(n-p_1)} lambda^{1-K} + e^{a(n-p_1)} lambda^{K}.)
 */
inline double beta(const model::ExpModel& m, const PilotPattern& pat, long long n) {
    if (n < 1 || n > pat.n_total)
        throw DomainError("beta: position " + std::to_string(n) +
                          " outside block of length " + std::to_string(pat.n_total));
    const double a = m.a;
    const double lam = model::lambda_of(m, pat.delta);
    if (n < pat.p1)
        return std::exp(-a * static_cast<double>(pat.p1 - n)) * (1.0 + lam);
    if (n >= pat.last_pilot())
        return std::exp(-a * static_cast<double>(n - pat.last_pilot())) * (1.0 + lam);
    const long long k = pat.kp(n);
    const double t1 = -a * static_cast<double>(n - pat.pilot(k));
    const double t2 = -a * static_cast<double>(pat.pilot(k + 1) - n);
    return std::exp(t1) + std::exp(t2);
}

/// gamma_n: model correlation between position n and every pilot.
inline std::vector<double> correlation_vector(const model::ExpModel& m,
                                              const PilotPattern& pat, long long n) {
    if (n < 1 || n > pat.n_total)
        throw DomainError("correlation_vector: position " + std::to_string(n) +
                          " outside block of length " + std::to_string(pat.n_total));
    std::vector<double> g(static_cast<std::size_t>(pat.n_pilots));
    for (long long j = 1; j <= pat.n_pilots; ++j)
        g[static_cast<std::size_t>(j - 1)] = model::gamma_e(m, n - pat.pilot(j));
    return g;
}

/// Pilot autocorrelation matrix R, symmetric Toeplitz with unit diagonal.
inline DenseMatrix pilot_matrix(const model::ExpModel& m, const PilotPattern& pat) {
    const auto np = static_cast<std::size_t>(pat.n_pilots);
    DenseMatrix r(np, np);
    for (std::size_t i = 0; i < np; ++i)
        for (std::size_t j = 0; j < np; ++j)
            r.at(i, j) = model::gamma_e(
                m, static_cast<long long>(j > i ? j - i : i - j) * pat.delta);
    return r;
}

/// rho_lambda = c (lambda (2 - N_P) + N_P), the Sherman-Morrison scalar.
inline double rho_lambda(const model::ExpModel& m, const PilotPattern& pat) {
    const double lam = model::lambda_of(m, pat.delta);
    const double np = static_cast<double>(pat.n_pilots);
    return m.c() * (lam * (2.0 - np) + np);
}

/**
 * Closed-form inverse of the pilot matrix:
 *
 *   R^{-1} = (1+c)/(1+lambda) * ( X_lambda/(1-lambda) - c Y_lambda/D1 )
 *
 * with X_lambda the tridiagonal inverse kernel of the pure exponential part
 * (corners 1, interior 1+lambda^2, off-diagonals -lambda), Y_lambda the
 * rank-one matrix s s^T over s = [1, 1-lambda, ..., 1-lambda, 1], and
 * D1 = 1 + lambda + rho_lambda.
 */
inline DenseMatrix invert_pilot_matrix_closed(const model::ExpModel& m,
                                              const PilotPattern& pat) {
    const auto np = static_cast<std::size_t>(pat.n_pilots);
    if (np == 1) {
        DenseMatrix r(1, 1);
        r.at(0, 0) = 1.0;  // R = [1] exactly: gamma at lag 0
        return r;
    }
    const double lam = model::lambda_of(m, pat.delta);
    if (!(lam > 0.0) || !(lam < 1.0))
        throw DomainError("invert_pilot_matrix_closed: lambda = " +
                          std::to_string(lam) + " outside (0, 1)");
    const double c = m.c();
    const double d1 = 1.0 + lam + rho_lambda(m, pat);
    const double front = (1.0 + c) / (1.0 + lam);
    const double tri = 1.0 / (1.0 - lam);
    const double rank1 = c / d1;

    std::vector<double> s(np, 1.0 - lam);
    s.front() = s.back() = 1.0;

    DenseMatrix r(np, np);
    for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t j = 0; j < np; ++j) {
            double x = 0.0;
            if (i == j)
                x = (i == 0 || i == np - 1) ? 1.0 : 1.0 + lam * lam;
            else if (j + 1 == i || i + 1 == j)
                x = -lam;
            r.at(i, j) = front * (tri * x - rank1 * s[i] * s[j]);
        }
    }
    return r;
}

namespace detail {

/// Local stencil v_n: first/last rows see two pilots, interior rows three.
inline void v_row(const model::ExpModel& m, const PilotPattern& pat, long long n,
                  double lam, double* out) {
    const double a = m.a;
    const auto np = pat.n_pilots;
    auto e = [&](long long j) {
        return std::exp(-a * static_cast<double>(std::abs(n - pat.pilot(j))));
    };
    out[0] = e(1) - lam * e(2);
    for (long long j = 2; j <= np - 1; ++j)
        out[j - 1] = (1.0 + lam * lam) * e(j) - lam * (e(j - 1) + e(j + 1));
    out[np - 1] = e(np) - lam * e(np - 1);
}

}  // namespace detail

/**
 * Closed-form coefficient rows:
 *
 *   w_n = c (1 + lambda - beta_n) / ((1+lambda) D1) * s
 *       + v_n / (1 - lambda^2)
 *
 * Requires at least three pilots (the interior stencil must exist); fewer
 * raises FallbackToNumeric so callers can route to coefficients_numeric.
 */
inline WienerCoefficients coefficients_closed(const model::ExpModel& m,
                                              const PilotPattern& pat) {
    if (pat.n_pilots < 3)
        throw FallbackToNumeric("coefficients_closed: closed form needs >= 3 pilots, got " +
                                std::to_string(pat.n_pilots));
    const double lam = model::lambda_of(m, pat.delta);
    if (!(lam > 0.0) || !(lam < 1.0))
        throw DomainError("coefficients_closed: lambda = " + std::to_string(lam) +
                          " outside (0, 1)");
    const double c = m.c();
    const double d1 = 1.0 + lam + rho_lambda(m, pat);
    const auto n_total = static_cast<std::size_t>(pat.n_total);
    const auto np = static_cast<std::size_t>(pat.n_pilots);

    std::vector<double> s(np, 1.0 - lam);
    s.front() = s.back() = 1.0;

    WienerCoefficients out;
    out.pattern = pat;
    out.model = m;
    out.weights = DenseMatrix(n_total, np);

    math::parallel_for(n_total, [&](std::size_t row) {
        const long long n = static_cast<long long>(row) + 1;
        double* w = &out.weights.data[row * np];
        detail::v_row(m, pat, n, lam, w);
        const double rank1 =
            c * (1.0 + lam - beta(m, pat, n)) / ((1.0 + lam) * d1);
        const double tri = 1.0 / (1.0 - lam * lam);
        for (std::size_t j = 0; j < np; ++j) w[j] = rank1 * s[j] + tri * w[j];
    });
    return out;
}

/**
 * Dense-solve reference: factor R once (Cholesky in extended precision,
 * pivoted fallback if badly conditioned) and solve for every position's
 * correlation vector.
 */
inline WienerCoefficients coefficients_numeric(const model::ExpModel& m,
                                               const PilotPattern& pat) {
    using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const auto np = static_cast<std::size_t>(pat.n_pilots);
    const auto n_total = static_cast<std::size_t>(pat.n_total);

    LMat r(np, np);
    for (std::size_t i = 0; i < np; ++i)
        for (std::size_t j = 0; j < np; ++j)
            r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                static_cast<long double>(model::gamma_e(
                    m, static_cast<long long>(j > i ? j - i : i - j) * pat.delta));

    LMat gamma(np, n_total);
    for (std::size_t col = 0; col < n_total; ++col) {
        const long long n = static_cast<long long>(col) + 1;
        for (std::size_t j = 0; j < np; ++j)
            gamma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(col)) =
                static_cast<long double>(
                    model::gamma_e(m, n - pat.pilot(static_cast<long long>(j) + 1)));
    }

    Eigen::LLT<LMat> llt(r);
    LMat sol;
    bool solved = false;
    if (llt.info() == Eigen::Success) {
        // Condition estimate from the Cholesky diagonal spread; cheap and
        // adequate to decide when to re-factor with pivoting.
        const auto d = llt.matrixLLT().diagonal();
        const long double dmax = d.maxCoeff(), dmin = d.minCoeff();
        if (dmin > 0.0L && (dmax / dmin) * (dmax / dmin) < 1e12L) {
            sol = llt.solve(gamma);
            solved = true;
        }
    }
    if (!solved) {
        Eigen::FullPivLU<LMat> lu(r);
        if (!lu.isInvertible())
            throw SingularModel(
                "coefficients_numeric: pilot matrix singular for a = " +
                std::to_string(m.a) + ", b = " + std::to_string(m.b) +
                ", delta = " + std::to_string(pat.delta) +
                ", n_pilots = " + std::to_string(pat.n_pilots));
        sol = lu.solve(gamma);
    }

    WienerCoefficients out;
    out.pattern = pat;
    out.model = m;
    out.weights = DenseMatrix(n_total, np);
    for (std::size_t row = 0; row < n_total; ++row)
        for (std::size_t j = 0; j < np; ++j)
            out.weights.at(row, j) = static_cast<double>(
                sol(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(row)));
    return out;
}

/// Closed form when it applies, dense solve otherwise.
inline WienerCoefficients coefficients(const model::ExpModel& m,
                                       const PilotPattern& pat) {
    try {
        return coefficients_closed(m, pat);
    } catch (const FallbackToNumeric&) {
        return coefficients_numeric(m, pat);
    }
}

/// Apply the interpolator: alpha-hat_n = sum_j w_{n,j} * pilot_estimates[j].
inline std::vector<std::complex<double>> interpolate(
    const WienerCoefficients& coeffs,
    const std::vector<std::complex<double>>& pilot_estimates) {
    const auto np = static_cast<std::size_t>(coeffs.pattern.n_pilots);
    if (pilot_estimates.size() != np)
        throw DomainError("interpolate: got " + std::to_string(pilot_estimates.size()) +
                          " pilot estimates for " + std::to_string(np) + " pilots");
    const auto n_total = static_cast<std::size_t>(coeffs.pattern.n_total);
    std::vector<std::complex<double>> alpha(n_total);
    for (std::size_t row = 0; row < n_total; ++row) {
        std::complex<double> acc{0.0, 0.0};
        const double* w = &coeffs.weights.data[row * np];
        for (std::size_t j = 0; j < np; ++j) acc += w[j] * pilot_estimates[j];
        alpha[row] = acc;
    }
    return alpha;
}

}  // namespace ptrs::wiener
