#include "featune/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace featune::stats {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

RankSumResult rank_sum_test(std::span<double const> a, std::span<double const> b)
{
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument("rank-sum test needs at least two values per sample");
    }
    auto const na = static_cast<double>(a.size());
    auto const nb = static_cast<double>(b.size());
    auto const total = a.size() + b.size();

    struct Entry {
        double value;
        bool second;
    };
    std::vector<Entry> pooled;
    pooled.reserve(total);
    for (auto v : a) {
        pooled.push_back({ v, false });
    }
    for (auto v : b) {
        pooled.push_back({ v, true });
    }
    std::sort(pooled.begin(), pooled.end(), [](auto const& x, auto const& y) { return x.value < y.value; });

    double rank_sum_b = 0.0;
    double tie_term = 0.0;
    bool same_multiset = a.size() == b.size();
    for (std::size_t i = 0; i < total;) {
        auto j = i;
        std::size_t in_b = 0;
        while (j < total && pooled[j].value == pooled[i].value) {
            in_b += pooled[j].second ? 1 : 0;
            ++j;
        }
        auto const midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        auto const t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        rank_sum_b += midrank * static_cast<double>(in_b);
        same_multiset = same_multiset && 2 * in_b == j - i;
        i = j;
    }

    auto const u = rank_sum_b - nb * (nb + 1.0) / 2.0;
    auto const n = na + nb;
    auto const variance = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (same_multiset || variance <= 0.0) {
        return { u, 0.5, 0.5 };
    }
    auto const sd = std::sqrt(variance);
    auto const centre = na * nb / 2.0;
    auto const p_b = normal_sf((u - centre - 0.5) / sd);
    auto const p_a = normal_sf((centre - u - 0.5) / sd);
    return { u, std::clamp(p_b, 0.0, 1.0), std::clamp(p_a, 0.0, 1.0) };
}

double mean(std::span<double const> values)
{
    if (values.empty()) {
        throw std::invalid_argument("mean of an empty sample");
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double quantile(std::span<double const> values, double q)
{
    if (values.empty()) {
        throw std::invalid_argument("quantile of an empty sample");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    auto const pos = q * static_cast<double>(sorted.size() - 1);
    auto const lo = static_cast<std::size_t>(std::floor(pos));
    auto const hi = std::min(lo + 1, sorted.size() - 1);
    auto const frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double median(std::span<double const> values) { return quantile(values, 0.5); }

double standard_deviation(std::span<double const> values)
{
    if (values.size() < 2) {
        return 0.0;
    }
    auto const m = mean(values);
    double ss = 0.0;
    for (auto v : values) {
        ss += (v - m) * (v - m);
    }
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

} // namespace featune::stats
