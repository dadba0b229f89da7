/**
 * Plan pilot spacings across the supported carrier range and print how the
 * feasible spacing shrinks as the carrier (and so the phase-noise power)
 * grows.
 *
 *   ./demo_plan [max_cost_pct] [delta0]
 */
#include <cstdio>
#include <cstdlib>

#include "ptrs/planner.hpp"

int main(int argc, char** argv) {
    const double max_cost = argc > 1 ? std::atof(argv[1]) : 2.5;
    const long long delta0 = argc > 2 ? std::atoll(argv[2]) : 20;
    const long long n_total = 4096;

    std::printf("cost ceiling %.3f%% of N, minimum spacing %lld, N = %lld\n\n",
                max_cost, delta0, n_total);
    std::printf("%10s %10s %10s %12s %10s %10s\n", "fc [GHz]", "omega", "eta",
                "J(delta0) %", "delta_PF", "overhead %");
    for (double fc_ghz = 100.0; fc_ghz <= 300.0; fc_ghz += 25.0) {
        const auto res = ptrs::planner::plan(fc_ghz * 1e9, n_total, max_cost, delta0);
        std::printf("%10.0f %10.5f %10.5f %12.4f %10lld %10.3f%s\n", fc_ghz,
                    res.omega, res.eta, res.j_at_delta0_pct, res.delta_pf,
                    res.overhead_pct, res.feasible ? "" : "  (infeasible)");
    }
    return 0;
}
