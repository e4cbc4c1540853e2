#pragma once

#include <vector>

#include "csam/content_control.hpp"

namespace csam::testing {

/// Straight re-derivation of the packing loop: tabulate the three greedy
/// floor divisions for every N, then stop at the first N whose successor
/// guard (previous counts at N + 1) fails, or when no unknown object fits, or
/// at the resolution cap.
inline PackPlan pack_oracle(long long budget, long long known, long long unknown, long long l_k, long long l_h,
                            long long l_u, long long max_res) {
    if (budget <= 0) return {};
    struct Row {
        long long u_r, k_r, k_rh;
    };
    std::vector<Row> rows(static_cast<std::size_t>(max_res) + 1);
    for (long long n = 1; n <= max_res; ++n) {
        Row& r = rows[static_cast<std::size_t>(n)];
        r.u_r = std::min(unknown, budget / (n * l_u));
        const long long after_u = budget - n * r.u_r * l_u;
        r.k_r = std::min(known, after_u / l_k);
        const long long after_k = after_u - r.k_r * l_k;
        r.k_rh = std::min(r.k_r, after_k / l_h);
    }
    long long n = 1;
    for (;; ++n) {
        const Row& r = rows[static_cast<std::size_t>(n)];
        if (r.u_r == 0 || n == max_res) break;
        const long long next_cost = r.k_r * l_k + r.k_rh * l_h + (n + 1) * r.u_r * l_u;
        if (next_cost > budget) break;
    }
    const Row& r = rows[static_cast<std::size_t>(n)];
    if (r.k_r == 0 && r.u_r == 0) return {};
    return {static_cast<int>(r.k_r), static_cast<int>(r.k_rh), static_cast<int>(r.u_r), static_cast<int>(n)};
}

}  // namespace csam::testing
