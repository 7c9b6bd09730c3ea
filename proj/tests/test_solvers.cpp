#include <doctest.h>

#include <cmath>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>

#include "featune/problems.hpp"
#include "featune/solvers.hpp"

using namespace featune;
using namespace featune::solvers;
using problems::ProblemInstance;

namespace {

double binomial_pmf(std::size_t n, std::size_t k, double p)
{
    double coeff = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        coeff = coeff * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return coeff * std::pow(p, static_cast<double>(k)) * std::pow(1.0 - p, static_cast<double>(n - k));
}

// Pearson chi-square p-value with bins pooled to expected counts >= 5.
double chi_square_p(std::vector<double> const& observed, std::size_t n, double p, double samples)
{
    std::vector<double> obs;
    std::vector<double> exp;
    double o = 0.0;
    double e = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        o += observed[k];
        e += binomial_pmf(n, k, p) * samples;
        if (e >= 5.0) {
            obs.push_back(o);
            exp.push_back(e);
            o = e = 0.0;
        }
    }
    obs.back() += o;
    exp.back() += e;
    double chi2 = 0.0;
    for (std::size_t b = 0; b < obs.size(); ++b) {
        chi2 += (obs[b] - exp[b]) * (obs[b] - exp[b]) / exp[b];
    }
    boost::math::chi_squared dist(static_cast<double>(obs.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, chi2));
}

} // namespace

TEST_SUITE("solvers")
{
    TEST_CASE("flip counts follow Bin(20, 0.1)")
    {
        RandomStream rng(41);
        FlipCountSampler sampler(20, 0.1);
        std::vector<double> hist(21, 0.0);
        for (int i = 0; i < 100000; ++i) {
            hist[sampler(rng)] += 1.0;
        }
        CHECK(chi_square_p(hist, 20, 0.1, 100000) >= 0.01);
    }

    TEST_CASE("flip counts for large rates and tiny tables")
    {
        for (auto [n, p] : { std::pair<std::size_t, double> { 30, 0.8 }, { 50, 0.5 }, { 10, 1.0 }, { 10, 0.0 } }) {
            RandomStream rng(42);
            FlipCountSampler sampler(n, p);
            std::vector<double> hist(n + 1, 0.0);
            for (int i = 0; i < 50000; ++i) {
                auto k = sampler(rng);
                REQUIRE(k <= n);
                hist[k] += 1.0;
            }
            if (p == 0.0 || p == 1.0) {
                CHECK(hist[static_cast<std::size_t>(p * n)] == 50000);
            } else {
                INFO("n=", n, " p=", p);
                CHECK(chi_square_p(hist, n, p, 50000) >= 0.01);
            }
        }
    }

    TEST_CASE("flip counts when the table underflows")
    {
        // pmf(0) = 0.5^5000 underflows, so the standard distribution is used
        RandomStream rng(43);
        FlipCountSampler sampler(5000, 0.5);
        double sum = 0.0;
        for (int i = 0; i < 20000; ++i) {
            sum += static_cast<double>(sampler(rng));
        }
        CHECK(sum / 20000.0 == doctest::Approx(2500.0).epsilon(0.002));
    }

    TEST_CASE("position sampler draws distinct positions")
    {
        RandomStream rng(44);
        PositionSampler sampler(37);
        for (std::size_t k = 0; k <= 37; ++k) {
            auto drawn = sampler.draw(k, rng);
            std::set<std::uint32_t> unique(drawn.begin(), drawn.end());
            REQUIRE(drawn.size() == k);
            REQUIRE(unique.size() == k);
            for (auto p : drawn) {
                REQUIRE(p < 37);
            }
        }
    }

    TEST_CASE("RLS k flips exactly k bits")
    {
        // on OneMax the offspring differs from the parent by k - 2j ones, so
        // every observed fitness difference has the parity of k
        auto inst = ProblemInstance::onemax(40);
        for (std::size_t k : { 1, 3, 7, 25, 40 }) {
            std::vector<TracePoint> trace;
            RunOptions opts;
            opts.trace = &trace;
            opts.stop_at_optimum = false;
            RandomStream rng(45 + k);
            run({ SolverKind::rls }, inst, static_cast<double>(k), 500, rng, opts);
            for (std::size_t i = 1; i < trace.size(); ++i) {
                auto const d = static_cast<long>(trace[i].best_fitness - trace[i - 1].best_fitness);
                REQUIRE(d >= 0);
                if (d != 0) {
                    REQUIRE((static_cast<long>(k) - d) % 2 == 0);
                    REQUIRE(d <= static_cast<long>(k));
                }
            }
        }
    }

    TEST_CASE("RLS k=n on BinValue sees only x0 and its complement")
    {
        auto inst = ProblemInstance::binvalue(64);
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            RandomStream probe(seed);
            auto x0 = problems::Bitstring::random(64, probe);
            auto y0 = x0;
            y0.complement();
            auto expected = std::max(problems::fitness(inst, x0), problems::fitness(inst, y0));
            for (std::int64_t budget : { 2, 3, 100 }) {
                RandomStream rng(seed);
                auto r = run({ SolverKind::rls }, inst, 64.0, budget, rng);
                REQUIRE(r.best_fitness == expected);
            }
        }
    }

    TEST_CASE("EA with rate zero never moves")
    {
        auto inst = ProblemInstance::onemax(50);
        RandomStream probe(46);
        auto x0 = problems::Bitstring::random(50, probe);
        RandomStream rng(46);
        auto r = run({ SolverKind::ea }, inst, 0.0, 1000, rng);
        CHECK(r.best_fitness == problems::fitness(inst, x0));
        CHECK(r.evaluations_used == 1000);
    }

    TEST_CASE("elitism and evaluation accounting")
    {
        for (auto kind : { problems::ProblemKind::onemax, problems::ProblemKind::leadingones,
                           problems::ProblemKind::binvalue }) {
            auto inst = problems::training_set(kind)[2];
            for (auto solver : { SolverKind::ea, SolverKind::rls }) {
                std::vector<TracePoint> trace;
                RunOptions opts;
                opts.trace = &trace;
                RandomStream rng(47);
                auto r = run({ solver }, inst, solver == SolverKind::ea ? 1.0 / 50.0 : 1.0, 2000, rng, opts);
                REQUIRE(trace.size() == static_cast<std::size_t>(r.evaluations_used));
                CHECK(r.evaluations_used <= 2000);
                for (std::size_t i = 1; i < trace.size(); ++i) {
                    REQUIRE(trace[i].evaluation == trace[i - 1].evaluation + 1);
                    REQUIRE(trace[i].best_fitness >= trace[i - 1].best_fitness);
                }
                CHECK(trace.back().best_fitness == r.best_fitness);
                CHECK(r.hit_optimum == (r.best_fitness == problems::optimum(inst)));
                CHECK(r.hitting_time.has_value() == r.hit_optimum);
                if (r.hit_optimum) {
                    CHECK(*r.hitting_time == r.evaluations_used);
                }
            }
        }
    }

    TEST_CASE("RLS(1) solves LeadingOnes across word boundaries")
    {
        auto inst = ProblemInstance::leadingones(130);
        RandomStream rng(48);
        auto r = run({ SolverKind::rls }, inst, 1.0, solvers::unlimited_budget, rng);
        CHECK(r.hit_optimum);
        CHECK(r.best_fitness == 130.0);
    }

    TEST_CASE("EA(1/n) on OneMax n=100 hits the optimum in at least half of the runs within e n ln n")
    {
        auto inst = ProblemInstance::onemax(100);
        auto budget = static_cast<std::int64_t>(std::floor(std::exp(1.0) * 100.0 * std::log(100.0)));
        auto results = run_many({ SolverKind::ea }, inst, 0.01, budget, 200, 49);
        int hits = 0;
        for (auto const& r : results) {
            hits += r.hit_optimum ? 1 : 0;
        }
        CHECK(hits >= 100);
    }

    TEST_CASE("run_many is reproducible and matches sequential runs")
    {
        auto inst = ProblemInstance::leadingones(30);
        auto a = run_many({ SolverKind::ea }, inst, 0.05, 400, 10, 1234);
        auto b = run_many({ SolverKind::ea }, inst, 0.05, 400, 10, 1234);
        REQUIRE(a.size() == 10);
        CHECK(a == b);
        for (std::size_t r = 0; r < 10; ++r) {
            RandomStream rng(1234 ^ r);
            CHECK(run({ SolverKind::ea }, inst, 0.05, 400, rng) == a[r]);
        }
    }

    TEST_CASE("argument validation")
    {
        auto inst = ProblemInstance::onemax(10);
        RandomStream rng(50);
        CHECK_THROWS_AS(run({ SolverKind::ea }, inst, 0.1, 0, rng), std::invalid_argument);
        CHECK_THROWS_AS(run({ SolverKind::rls }, inst, 11.0, 10, rng), std::invalid_argument);
        CHECK_THROWS_AS(run({ SolverKind::rls }, inst, 1.5, 10, rng), std::invalid_argument);
        CHECK_THROWS_AS(run({ SolverKind::ea }, inst, 1.5, 10, rng), std::invalid_argument);
        CHECK_THROWS_AS(run_many({ SolverKind::ea }, inst, 0.1, 10, 0, 1), std::invalid_argument);
    }

    TEST_CASE("budget of one evaluates only the initial point")
    {
        auto inst = ProblemInstance::onemax(10);
        RandomStream rng(51);
        auto r = run({ SolverKind::ea }, inst, 0.1, 1, rng);
        CHECK(r.evaluations_used == 1);
    }

    TEST_CASE("trace csv")
    {
        std::vector<TracePoint> t { { 1, 3.0 }, { 2, 4.0 } };
        CHECK(trace_csv(t) == "eval_index,best_fitness\n1,3\n2,4\n");
    }

    TEST_CASE("solver names")
    {
        CHECK(solver_from_string("ea") == SolverKind::ea);
        CHECK(solver_from_string("rls") == SolverKind::rls);
        CHECK(parameter_name(SolverKind::ea) == "mu");
        CHECK(parameter_name(SolverKind::rls) == "k");
        CHECK_THROWS_AS(solver_from_string("ga"), std::invalid_argument);
    }
}
