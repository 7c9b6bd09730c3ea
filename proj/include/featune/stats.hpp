#pragma once

#include <span>
#include <vector>

namespace featune::stats {

struct RankSumResult {
    double u_statistic; // Mann-Whitney U of the second sample
    double p_value;     // one-sided, H1: second sample stochastically greater
    double p_reverse;   // one-sided, H1: first sample stochastically greater
};

/// Wilcoxon rank-sum (Mann-Whitney) test with midranks for ties and a
/// normal approximation using tie-corrected variance and a continuity
/// correction. Samples with the same multiset of values (including the
/// all-ties case) give p = 0.5. Both samples need at least two values.
RankSumResult rank_sum_test(std::span<double const> a, std::span<double const> b);

double mean(std::span<double const> values);
double median(std::span<double const> values);

/// Linear-interpolation quantile (type 7), q in [0, 1].
double quantile(std::span<double const> values, double q);

double standard_deviation(std::span<double const> values);

/// Upper tail of the standard normal distribution.
double normal_sf(double z);

} // namespace featune::stats
