#include <doctest.h>

#include <algorithm>
#include <set>

#include "featune/harness.hpp"
#include "featune/parser.hpp"
#include "featune/simplify.hpp"

using namespace featune;
using namespace featune::harness;
using expr::parse;
using problems::ProblemInstance;
using problems::ProblemKind;
using solvers::SolverKind;

namespace {

// Scores depend only on the seed, so populations stay diverse.
class NoiseTarget final : public engine::TuningTarget {
public:
    std::size_t instance_count() const override { return 2; }
    std::optional<double> known_optimum(std::size_t) const override { return 1.0; }
    expr::PrimitiveSet primitives() const override
    {
        expr::PrimitiveSet p;
        p.features = { "n" };
        return p;
    }
    std::vector<double> evaluate(expr::Expression const& e, std::size_t instance, std::size_t runs,
                                 std::uint64_t seed) const override
    {
        std::vector<double> row(runs);
        auto const salt = std::hash<std::string> {}(expr::format(e));
        for (std::size_t r = 0; r < runs; ++r) {
            RandomStream rng(derive_seed(seed, { salt, instance, r }));
            row[r] = rng.uniform();
        }
        return row;
    }
};

engine::TunerConfig small_config()
{
    engine::TunerConfig c;
    c.generations = 2;
    return c;
}

} // namespace

TEST_SUITE("harness")
{
    TEST_CASE("pool sizes")
    {
        NoiseTarget target;
        TrainOptions options;
        auto top = train_protocol(small_config(), target, { "a", "b" }, options);
        CHECK(top.pool_size == 50);
        options.pool = PoolMode::full;
        auto full = train_protocol(small_config(), target, { "a", "b" }, options);
        CHECK(full.pool_size == 200);
        CHECK(full.pool == PoolMode::full);
    }

    TEST_CASE("frequencies are conserved and counted on canonical forms")
    {
        NoiseTarget target;
        TrainOptions options;
        options.pool = PoolMode::full;
        std::size_t runs_seen = 0;
        options.on_run = [&](std::size_t, engine::TuneResult const& r) {
            ++runs_seen;
            CHECK(r.population.size() == 20);
        };
        auto report = train_protocol(small_config(), target, { "a", "b" }, options);
        CHECK(runs_seen == 10);
        std::size_t total = 0;
        std::set<std::string> texts;
        for (auto const& e : report.entries) {
            total += e.frequency;
            texts.insert(e.expression);
            CHECK(expr::format(final_form(parse(e.expression), SolverKind::ea)) == e.expression);
            CHECK(e.instance_medians.size() == 2);
            CHECK(e.best_score >= e.mean_score - 1e-12);
        }
        CHECK(total == report.pool_size);
        CHECK(texts.size() == report.entries.size());
        for (std::size_t i = 1; i < report.entries.size(); ++i) {
            auto const& a = report.entries[i - 1];
            auto const& b = report.entries[i];
            CHECK((a.frequency > b.frequency || (a.frequency == b.frequency && a.expression < b.expression)));
        }
        CHECK(report.top(3).size() == std::min<std::size_t>(3, report.entries.size()));
    }

    TEST_CASE("tuner seeds are distinct and reported")
    {
        NoiseTarget target;
        auto report = train_protocol(small_config(), target, { "a", "b" }, {});
        REQUIRE(report.seeds.size() == 10);
        CHECK(std::set<std::uint64_t>(report.seeds.begin(), report.seeds.end()).size() == 10);
        CHECK(report.seeds[3] == tuner_seed(1, 3));
        CHECK(report.tuner_runs == 10);
        CHECK(report.instance_labels == std::vector<std::string> { "a", "b" });
    }

    TEST_CASE("protocol output does not depend on the worker count")
    {
        auto config = small_config();
        config.problem = ProblemKind::leadingones;
        config.solver = SolverKind::rls;
        config.budget = "0.2*n^2";
        TrainOptions options;
        options.tuner_runs = 3;
        auto a = train_protocol(config, options);
        options.workers = 3;
        auto b = train_protocol(config, options);
        REQUIRE(a.entries.size() == b.entries.size());
        for (std::size_t i = 0; i < a.entries.size(); ++i) {
            CHECK(a.entries[i].expression == b.entries[i].expression);
            CHECK(a.entries[i].frequency == b.entries[i].frequency);
            CHECK(a.entries[i].best_score == b.entries[i].best_score);
        }
        CHECK(a.instance_labels.size() == 6);
        CHECK(a.instance_labels.front() == "n=10");
    }

    TEST_CASE("final forms")
    {
        CHECK(expr::format(final_form(parse("0.5"), SolverKind::rls)) == "1");
        CHECK(expr::format(final_form(parse("2 + 1/2"), SolverKind::rls)) == "2");
        CHECK(expr::format(final_form(parse("-2"), SolverKind::rls)) == "1");
        CHECK(expr::format(final_form(parse("1/n + 3"), SolverKind::ea)) == "1/n");
        CHECK(expr::format(final_form(parse("2/(n + n)"), SolverKind::ea)) == "1/n");
        CHECK(expr::format(final_form(parse("-1"), SolverKind::ea)) == "-1");
    }

    TEST_CASE("evaluation table shape and range")
    {
        std::vector<expr::Expression> exprs { parse("1/n"), parse("2/n"), parse("3/n") };
        std::vector<ProblemInstance> instances { ProblemInstance::onemax(10), ProblemInstance::onemax(20),
                                                 ProblemInstance::onemax(50) };
        auto table = evaluate_expressions(exprs, instances, SolverKind::ea, "e*n*ln(n)", 100, 3);
        REQUIRE(table.cells.size() == 9);
        for (std::size_t k = 0; k < 9; ++k) {
            auto const& cell = table.cells[k];
            CHECK(cell.expression == expr::format(exprs[k / 3]));
            CHECK(cell.instance == instances[k % 3]);
            CHECK(cell.parameter == doctest::Approx(static_cast<double>(k / 3 + 1) / cell.instance.n()));
            REQUIRE(cell.samples.size() == 100);
            for (auto s : cell.samples) {
                CHECK(s > 0.0);
                CHECK(s <= 1.0);
            }
        }
        CHECK(table.runs == 100);
        CHECK(table.seed == 3);
    }

    TEST_CASE("equal parameters see equal random numbers")
    {
        std::vector<ProblemInstance> instances { ProblemInstance::leadingones(30) };
        auto table = evaluate_expressions({ parse("1/n"), parse("2/(n + n)") }, instances, SolverKind::ea, "n^2", 20, 9);
        CHECK(table.cells[0].samples == table.cells[1].samples);
        auto again = evaluate_expressions({ parse("1/n") }, instances, SolverKind::ea, "n^2", 20, 9, 4);
        CHECK(again.cells[0].samples == table.cells[0].samples);
    }

    TEST_CASE("features the instance lacks are configuration errors")
    {
        CHECK_THROWS_AS(evaluate_expressions({ parse("m") }, { ProblemInstance::onemax(10) }, SolverKind::rls, "n", 5),
                        engine::ConfigError);
        CHECK_THROWS_AS(evaluate_expressions({ parse("1") }, { ProblemInstance::onemax(10) }, SolverKind::rls, "m", 5),
                        engine::ConfigError);
    }

    TEST_CASE("RLS(1) solves OneMax n=1000 within 2 n ln n")
    {
        auto table = evaluate_expressions({ parse("1") }, { ProblemInstance::onemax(1000) }, SolverKind::rls,
                                          "2*n*ln(n)", 100, 1);
        for (auto s : table.cells[0].samples) {
            CHECK(s == 1.0);
        }
    }

    TEST_CASE("baselines")
    {
        auto ea = baseline_expressions(SolverKind::ea, ProblemKind::onemax);
        REQUIRE(ea.size() == 6);
        std::vector<double> const factors { 1.0, 1.5, 2.0, 2.5, 3.0, 4.0 };
        for (std::size_t i = 0; i < ea.size(); ++i) {
            CHECK(parse(expr::format(ea[i])) == ea[i]);
            CHECK(expr::evaluate(ea[i], { { "n", 10.0 } }) == doctest::Approx(factors[i] / 10.0));
            for (double n : { 10.0, 100.0, 500.0 }) {
                auto mu = engine::clamp_parameter(SolverKind::ea, expr::evaluate(ea[i], { { "n", n } }),
                                                  static_cast<std::size_t>(n));
                CHECK(mu > 0.0);
                CHECK(mu <= 1.0);
            }
        }
        auto rls = baseline_expressions(SolverKind::rls, ProblemKind::leadingones);
        CHECK(rls.size() == 4);
        auto jump = baseline_expressions(SolverKind::rls, ProblemKind::jump);
        REQUIRE(jump.size() == 6);
        CHECK(expr::evaluate(jump[4], { { "m", 3.0 }, { "n", 20.0 } }) == 6.0);
    }

    TEST_CASE("pool names")
    {
        CHECK(pool_from_string("top5") == PoolMode::top5);
        CHECK(pool_from_string("full") == PoolMode::full);
        CHECK(to_string(PoolMode::full) == "full");
        CHECK_THROWS_AS(pool_from_string("all"), std::invalid_argument);
    }

    TEST_CASE("cheap oracles pass")
    {
        auto names = oracle_names();
        CHECK(names.size() == 5);
        for (auto const* name : { "flipcount", "binvalue-rlsn", "leadingones-rls1" }) {
            auto check = run_oracle(name, 1);
            INFO(check.description, " measured ", check.measured);
            CHECK(check.passed);
        }
        CHECK_THROWS_AS(run_oracle("nope"), std::invalid_argument);
    }
}
