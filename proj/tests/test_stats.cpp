#include <doctest.h>

#include <cmath>

#include "exact_ranksum.hpp"
#include "featune/random.hpp"
#include "featune/stats.hpp"

using namespace featune;
using namespace featune::stats;

namespace {

std::vector<double> shuffled_values(std::size_t total, RandomStream& rng)
{
    std::vector<double> v(total);
    for (std::size_t i = 0; i < total; ++i) {
        v[i] = static_cast<double>(i) + 0.5 * rng.uniform();
    }
    for (std::size_t i = total; i > 1; --i) {
        std::swap(v[i - 1], v[rng.below(i)]);
    }
    return v;
}

} // namespace

TEST_SUITE("stats")
{
    TEST_CASE("maximal separation")
    {
        std::vector<double> a { 1, 2, 3 };
        std::vector<double> b { 4, 5, 6 };
        auto r = rank_sum_test(a, b);
        CHECK(r.u_statistic == 9.0);
        CHECK(r.p_value < 0.05);
        CHECK(testing::exact_rank_sum_p(a, b) == doctest::Approx(0.05));
        CHECK(std::abs(r.p_value - 0.05) <= 0.02);
        CHECK(r.p_reverse > 0.95);
    }

    TEST_CASE("identical samples and all ties give one half")
    {
        std::vector<double> a { 0.3, 0.7, 0.1 };
        CHECK(rank_sum_test(a, a).p_value == 0.5);
        CHECK(rank_sum_test(a, a).p_reverse == 0.5);
        std::vector<double> ones { 1, 1, 1, 1 };
        CHECK(rank_sum_test(ones, ones).p_value == 0.5);
        std::vector<double> three { 1, 1, 1 };
        CHECK(rank_sum_test(ones, three).p_value == 0.5);
    }

    TEST_CASE("small samples are rejected")
    {
        std::vector<double> one { 1 };
        std::vector<double> two { 1, 2 };
        CHECK_THROWS_AS(rank_sum_test(one, two), std::invalid_argument);
        CHECK_THROWS_AS(rank_sum_test(two, one), std::invalid_argument);
    }

    TEST_CASE("ties use midranks")
    {
        // pooled 1,2,2,3: ranks 1, 2.5, 2.5, 4; b = {2, 3} has rank sum 6.5
        std::vector<double> a { 1, 2 };
        std::vector<double> b { 2, 3 };
        CHECK(rank_sum_test(a, b).u_statistic == doctest::Approx(3.5));
    }

    TEST_CASE("approximation agrees with the exact test when both samples have at least 3 values")
    {
        RandomStream rng(51);
        double worst = 0.0;
        for (std::size_t na = 3; na <= 9; ++na) {
            for (std::size_t nb = 3; na + nb <= 12; ++nb) {
                for (int rep = 0; rep < 30; ++rep) {
                    auto v = shuffled_values(na + nb, rng);
                    std::vector<double> a(v.begin(), v.begin() + static_cast<long>(na));
                    std::vector<double> b(v.begin() + static_cast<long>(na), v.end());
                    auto approx = rank_sum_test(a, b).p_value;
                    worst = std::max(worst, std::abs(approx - testing::exact_rank_sum_p(a, b)));
                }
            }
        }
        CHECK(worst <= 0.02);
    }

    TEST_CASE("reverse p-value is the mirrored test")
    {
        RandomStream rng(52);
        for (int rep = 0; rep < 200; ++rep) {
            auto v = shuffled_values(10, rng);
            std::vector<double> a(v.begin(), v.begin() + 4);
            std::vector<double> b(v.begin() + 4, v.end());
            auto r = rank_sum_test(a, b);
            auto m = rank_sum_test(b, a);
            CHECK(r.p_reverse == doctest::Approx(m.p_value));
            CHECK(r.u_statistic + m.u_statistic == doctest::Approx(24.0));
        }
    }

    TEST_CASE("shift monotonicity and scale invariance")
    {
        RandomStream rng(53);
        for (int rep = 0; rep < 200; ++rep) {
            std::vector<double> a(8);
            std::vector<double> b(9);
            for (auto& x : a) {
                x = rng.uniform();
            }
            for (auto& x : b) {
                x = std::floor(10.0 * rng.uniform()) / 10.0;
            }
            auto base = rank_sum_test(a, b);
            auto shifted = b;
            for (auto& x : shifted) {
                x += 0.05;
            }
            CHECK(rank_sum_test(a, shifted).p_value <= base.p_value + 1e-12);
            auto sa = a;
            auto sb = b;
            for (auto& x : sa) {
                x *= 3.5;
            }
            for (auto& x : sb) {
                x *= 3.5;
            }
            auto scaled = rank_sum_test(sa, sb);
            CHECK(scaled.u_statistic == base.u_statistic);
            CHECK(scaled.p_value == base.p_value);
        }
    }

    TEST_CASE("p-values stay in [0, 1] for large separated samples")
    {
        std::vector<double> a(120, 0.0);
        std::vector<double> b(120, 1.0);
        auto r = rank_sum_test(a, b);
        CHECK(r.p_value >= 0.0);
        CHECK(r.p_value < 1e-20);
        CHECK(r.p_reverse <= 1.0);
    }

    TEST_CASE("summaries")
    {
        std::vector<double> v { 0.5, 1.0 };
        CHECK(mean(v) == 0.75);
        std::vector<double> single { 0.3 };
        CHECK(mean(single) == 0.3);
        std::vector<double> q { 4, 1, 3, 2 };
        CHECK(median(q) == 2.5);
        CHECK(quantile(q, 0.25) == 1.75);
        CHECK(quantile(q, 0.0) == 1.0);
        CHECK(quantile(q, 1.0) == 4.0);
        CHECK(standard_deviation(q) == doctest::Approx(std::sqrt(5.0 / 3.0)));
        CHECK_THROWS_AS(mean(std::vector<double> {}), std::invalid_argument);
        CHECK(normal_sf(0.0) == 0.5);
        CHECK(normal_sf(1.959963984540054) == doctest::Approx(0.025));
    }

    TEST_CASE("mean of a seeded uniform stream")
    {
        RandomStream rng(54);
        std::vector<double> v(100);
        for (auto& x : v) {
            x = rng.uniform();
        }
        CHECK(std::abs(mean(v) - 0.5) <= 0.1);
    }
}
