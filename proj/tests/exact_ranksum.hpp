#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace featune::testing {

// Exact one-sided p-value P(U_b >= u_obs) under H0 by enumerating every
// assignment of the pooled values to the second sample. Ties use midranks.
inline double exact_rank_sum_p(std::vector<double> const& a, std::vector<double> const& b)
{
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    auto const total = pooled.size();
    std::vector<double> sorted(pooled);
    std::sort(sorted.begin(), sorted.end());
    auto midrank = [&](double v) {
        auto lo = std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
        auto hi = std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
        return (static_cast<double>(lo + 1) + static_cast<double>(hi)) / 2.0;
    };
    std::vector<double> ranks(total);
    for (std::size_t i = 0; i < total; ++i) {
        ranks[i] = midrank(pooled[i]);
    }
    double observed = 0.0;
    for (std::size_t i = a.size(); i < total; ++i) {
        observed += ranks[i];
    }

    std::size_t at_least = 0;
    std::size_t count = 0;
    for (std::uint32_t mask = 0; mask < (1U << total); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != b.size()) {
            continue;
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < total; ++i) {
            if (mask & (1U << i)) {
                sum += ranks[i];
            }
        }
        ++count;
        at_least += sum >= observed - 1e-9 ? 1 : 0;
    }
    return static_cast<double>(at_least) / static_cast<double>(count);
}

} // namespace featune::testing
