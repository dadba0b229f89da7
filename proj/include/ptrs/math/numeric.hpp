/**
 * @file numeric.hpp
 * @brief Numeric building blocks: merged-exponent evaluation, expm1-based
 *        guard factors, deterministic blocked reduction, and a tiny
 *        parallel-for.
 *
 * The closed-form cost expressions mix growing factors like e^{a k} and
 * decaying ones like e^{-a(N-p)}; evaluated separately they overflow or
 * underflow at realistic sizes (a ~ 7e-3, N = 4096, spacing > 100). Every
 * such product is therefore evaluated as a single exponential of the summed
 * exponent. Extended precision (long double) is used inside evaluators whose
 * terms cancel heavily.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <thread>
#include <vector>

namespace ptrs::math {

/// e^x in extended precision; the one place products of exponentials funnel
/// through after their exponents have been summed.
inline long double exp_merged(long double exponent) { return std::exp(exponent); }

/// 1 - e^x without cancellation for small |x|.
inline long double one_minus_exp(long double x) { return -std::expm1(x); }

/// Deterministic blocked sum: fixed-size blocks accumulated sequentially,
/// block results combined in index order. The result is independent of
/// thread count because blocks, not threads, define the grouping.
template <typename F>
long double blocked_sum(std::size_t count, F&& term, std::size_t block = 1024) {
    std::vector<long double> partial((count + block - 1) / block, 0.0L);
    for (std::size_t b = 0; b < partial.size(); ++b) {
        const std::size_t lo = b * block;
        const std::size_t hi = std::min(count, lo + block);
        long double s = 0.0L;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        partial[b] = s;
    }
    long double total = 0.0L;
    for (long double p : partial) total += p;
    return total;
}

/// Run body(i) for i in [0, count) across threads. Each index is processed
/// exactly once; the caller is responsible for writing to disjoint slots.
template <typename F>
void parallel_for(std::size_t count, F&& body, unsigned max_threads = 0) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (max_threads != 0 && max_threads < hw) hw = max_threads;
    const unsigned nthreads = static_cast<unsigned>(
        std::min<std::size_t>(hw, count == 0 ? 1 : count));
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t]() {
            for (std::size_t i = t; i < count; i += nthreads) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// Parallel version of blocked_sum: identical result to the serial one
/// because the block structure (not the thread schedule) fixes the grouping.
template <typename F>
long double parallel_blocked_sum(std::size_t count, F&& term, std::size_t block = 1024) {
    const std::size_t nblocks = (count + block - 1) / block;
    std::vector<long double> partial(nblocks, 0.0L);
    parallel_for(nblocks, [&](std::size_t b) {
        const std::size_t lo = b * block;
        const std::size_t hi = std::min(count, lo + block);
        long double s = 0.0L;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        partial[b] = s;
    });
    long double total = 0.0L;
    for (long double p : partial) total += p;
    return total;
}

}  // namespace ptrs::math
