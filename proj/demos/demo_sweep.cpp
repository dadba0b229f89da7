/**
 * Sweep the closed-form interpolation cost against pilot spacing for the two
 * calibrated endpoint models, then recover the affine parameters each curve
 * implies.
 */
#include <cstdio>
#include <utility>
#include <vector>

#include "ptrs/cost.hpp"
#include "ptrs/exp_model.hpp"
#include "ptrs/planner.hpp"

int main() {
    const ptrs::model::ExpModel m100(0.0073584211807481, 0.977392014811171, 100e9);
    const ptrs::model::ExpModel m300(0.00780600324117115, 0.82245573774235, 300e9);

    std::vector<long long> deltas;
    for (long long d = 1; d <= 109; d += 12) deltas.push_back(d);

    std::printf("%8s %16s %16s\n", "delta", "J @ 100 GHz [%]", "J @ 300 GHz [%]");
    const auto rows100 = ptrs::cost::cost_vs_spacing(m100, 4096, 1, deltas);
    const auto rows300 = ptrs::cost::cost_vs_spacing(m300, 4096, 1, deltas);
    std::vector<std::pair<double, double>> pts100, pts300;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        std::printf("%8lld %16.6f %16.6f\n", rows100[i].delta, rows100[i].j_pct,
                    rows300[i].j_pct);
        pts100.emplace_back(static_cast<double>(rows100[i].delta), rows100[i].j_pct);
        pts300.emplace_back(static_cast<double>(rows300[i].delta), rows300[i].j_pct);
    }

    for (const auto& [name, pts] :
         {std::pair<const char*, std::vector<std::pair<double, double>>&>{
              "100 GHz", pts100},
          {"300 GHz", pts300}}) {
        const auto fit = ptrs::planner::fit_affine(pts);
        std::printf("\n%s affine fit: J ~= %.5f * delta + %.5f  (r^2 = %.6f)\n",
                    name, fit.omega, fit.eta, fit.r2);
    }
    return 0;
}
