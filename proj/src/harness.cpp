#include "featune/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/format.h>

#include "featune/parallel.hpp"
#include "featune/parser.hpp"
#include "featune/random.hpp"
#include "featune/simplify.hpp"
#include "featune/stats.hpp"

namespace featune::harness {

using expr::Expression;
using problems::ProblemInstance;
using problems::ProblemKind;
using solvers::SolverKind;

namespace {

constexpr std::uint64_t protocol_stream = 0x7072'6f74ULL;

} // namespace

std::string_view to_string(PoolMode mode) noexcept { return mode == PoolMode::top5 ? "top5" : "full"; }

PoolMode pool_from_string(std::string_view name)
{
    if (name == "top5") {
        return PoolMode::top5;
    }
    if (name == "full") {
        return PoolMode::full;
    }
    throw std::invalid_argument(fmt::format("unknown pool '{}' (expected top5 or full)", name));
}

Expression final_form(Expression const& e, SolverKind solver)
{
    auto c = expr::canonicalize(e);
    if (solver == SolverKind::ea) {
        return expr::canonicalize(expr::to_ea_form(c));
    }
    auto r = expr::canonicalize(expr::to_rls_form(c));
    if (r.kind() == Expression::Kind::constant) {
        return Expression::constant(std::max(1.0, std::floor(r.value())));
    }
    return r;
}

std::vector<EliteEntry> EliteReport::top(std::size_t count) const
{
    std::vector<EliteEntry> out(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(
                                                      std::min(count, entries.size())));
    return out;
}

std::uint64_t tuner_seed(std::uint64_t seed, std::size_t run) noexcept
{
    return derive_seed(seed, { protocol_stream, run });
}

EliteReport train_protocol(engine::TunerConfig const& config, engine::TuningTarget const& target,
                           std::vector<std::string> instance_labels, TrainOptions const& options)
{
    config.validate();
    if (options.tuner_runs < 1) {
        throw engine::ConfigError("tuner_runs must be at least 1");
    }

    EliteReport report;
    report.config = config;
    report.pool = options.pool;
    report.tuner_runs = options.tuner_runs;
    report.instance_labels = std::move(instance_labels);
    for (std::size_t r = 0; r < options.tuner_runs; ++r) {
        report.seeds.push_back(tuner_seed(config.seed, r));
    }

    std::vector<engine::TuneResult> results(options.tuner_runs);
    parallel_for(options.tuner_runs, options.workers, [&](std::size_t r) {
        auto run_config = config;
        run_config.seed = report.seeds[r];
        results[r] = engine::tune(run_config, target);
    });

    struct Tally {
        std::size_t frequency = 0;
        double score_sum = 0.0;
        engine::Member const* best = nullptr;
    };
    std::map<std::string, Tally> tally;
    for (std::size_t r = 0; r < results.size(); ++r) {
        if (options.on_run) {
            options.on_run(r, results[r]);
        }
        auto const& pop = results[r].population;
        auto const take = options.pool == PoolMode::top5 ? std::min(elite_count, pop.size()) : pop.size();
        for (std::size_t j = 0; j < take; ++j) {
            auto const text = expr::format(final_form(pop[j].candidate.expr, config.solver));
            auto& t = tally[text];
            ++t.frequency;
            t.score_sum += pop[j].score.value;
            if (t.best == nullptr || pop[j].score.value > t.best->score.value) {
                t.best = &pop[j];
            }
            ++report.pool_size;
        }
    }

    for (auto const& [text, t] : tally) {
        EliteEntry entry;
        entry.expression = text;
        entry.frequency = t.frequency;
        entry.best_score = t.best->score.value;
        entry.mean_score = t.score_sum / static_cast<double>(t.frequency);
        auto const& cand = t.best->candidate;
        for (std::size_t i = 0; i < cand.instances; ++i) {
            std::span<double const> row(t.best->score.samples.data() + i * cand.runs, cand.runs);
            entry.instance_medians.push_back(stats::median(row));
        }
        report.entries.push_back(std::move(entry));
    }
    std::stable_sort(report.entries.begin(), report.entries.end(),
                     [](EliteEntry const& a, EliteEntry const& b) { return a.frequency > b.frequency; });
    return report;
}

EliteReport train_protocol(engine::TunerConfig const& config, TrainOptions const& options)
{
    config.validate();
    auto instances = problems::training_set(config.problem);
    std::vector<std::string> labels;
    for (auto const& inst : instances) {
        labels.push_back(inst.feature_label());
    }
    engine::SolverTarget target(std::move(instances), config.solver,
                                expr::parse(config.budget, expr::Dialect::budget));
    return train_protocol(config, target, std::move(labels), options);
}

EvaluationTable evaluate_expressions(std::vector<Expression> const& exprs, std::vector<ProblemInstance> const& instances,
                                     SolverKind solver, std::string const& budget, std::size_t runs,
                                     std::uint64_t seed, std::size_t workers)
{
    if (runs < 1) {
        throw engine::ConfigError("runs must be at least 1");
    }
    for (auto const& e : exprs) {
        for (auto const& inst : instances) {
            for (auto const& f : expr::features_of(e)) {
                if (!inst.features().contains(f)) {
                    throw engine::ConfigError(fmt::format("expression '{}' uses feature '{}' which the {} instance {} "
                                                          "does not have",
                                                          expr::format(e), f, problems::to_string(inst.kind()),
                                                          inst.feature_label()));
                }
            }
        }
    }
    engine::SolverTarget target(instances, solver, expr::parse(budget, expr::Dialect::budget));

    EvaluationTable table;
    table.solver = solver;
    table.budget = budget;
    table.runs = runs;
    table.seed = seed;
    table.cells.resize(exprs.size() * instances.size());
    parallel_for(table.cells.size(), workers, [&](std::size_t k) {
        auto const& e = exprs[k / instances.size()];
        auto const i = k % instances.size();
        auto& cell = table.cells[k];
        cell.expression = expr::format(e);
        cell.instance = instances[i];
        cell.parameter = target.parameter(e, i);
        cell.budget = target.budget(i);
        cell.samples = target.evaluate(e, i, runs, seed);
        auto const opt = problems::optimum(instances[i]);
        for (auto& s : cell.samples) {
            s /= opt;
        }
    });
    return table;
}

std::vector<Expression> baseline_expressions(SolverKind solver, ProblemKind problem)
{
    std::vector<std::string> texts;
    if (solver == SolverKind::ea) {
        texts = { "1/n", "3/(2*n)", "2/n", "5/(2*n)", "3/n", "4/n" };
    } else {
        texts = { "1", "2", "3" };
        if (problem == ProblemKind::jump) {
            texts.insert(texts.end(), { "m", "2*m" });
        }
        texts.push_back("n");
    }
    std::vector<Expression> out;
    for (auto const& t : texts) {
        out.push_back(expr::parse(t));
    }
    return out;
}

namespace {

OracleCheck leadingones_runtime(std::string name, SolverKind solver, double param, double expected,
                                std::uint64_t seed)
{
    constexpr std::size_t n = 100;
    constexpr std::size_t runs = 200;
    auto const inst = ProblemInstance::leadingones(n);
    auto const results = solvers::run_many({ solver }, inst, param, solvers::unlimited_budget, runs, seed);
    double total = 0.0;
    for (auto const& r : results) {
        total += static_cast<double>(r.hitting_time.value_or(r.evaluations_used));
    }
    OracleCheck check;
    check.name = std::move(name);
    check.description = fmt::format("mean hitting time of {}({}) on LeadingOnes n={} over {} runs",
                                    solvers::to_string(solver), param, n, runs);
    check.measured = total / static_cast<double>(runs);
    check.expected = expected;
    check.tolerance = 0.05;
    check.passed = std::abs(check.measured - expected) <= check.tolerance * expected;
    return check;
}

OracleCheck flip_count_oracle(std::uint64_t seed)
{
    constexpr std::size_t n = 20;
    constexpr double p = 0.1;
    constexpr std::size_t samples = 100'000;
    RandomStream rng(seed);
    solvers::FlipCountSampler sampler(n, p);
    std::vector<double> observed(n + 1, 0.0);
    for (std::size_t s = 0; s < samples; ++s) {
        observed[sampler(rng)] += 1.0;
    }

    // pool bins until each expected count is at least 5
    std::vector<double> obs_bins;
    std::vector<double> exp_bins;
    double obs_acc = 0.0;
    double exp_acc = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        auto const pmf = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)
                                  + static_cast<double>(k) * std::log(p)
                                  + static_cast<double>(n - k) * std::log1p(-p));
        obs_acc += observed[k];
        exp_acc += pmf * samples;
        if (exp_acc >= 5.0) {
            obs_bins.push_back(obs_acc);
            exp_bins.push_back(exp_acc);
            obs_acc = exp_acc = 0.0;
        }
    }
    obs_bins.back() += obs_acc;
    exp_bins.back() += exp_acc;

    double chi2 = 0.0;
    for (std::size_t b = 0; b < obs_bins.size(); ++b) {
        chi2 += (obs_bins[b] - exp_bins[b]) * (obs_bins[b] - exp_bins[b]) / exp_bins[b];
    }
    boost::math::chi_squared dist(static_cast<double>(obs_bins.size() - 1));
    OracleCheck check;
    check.name = "flipcount";
    check.description = fmt::format("chi-square p-value of {} flip counts against Bin({}, {}) ({} bins)", samples,
                                    n, p, obs_bins.size());
    check.measured = boost::math::cdf(boost::math::complement(dist, chi2));
    check.expected = 0.01;
    check.tolerance = 0.0;
    check.passed = check.measured >= 0.01;
    return check;
}

OracleCheck binvalue_oracle(std::uint64_t seed)
{
    constexpr std::size_t n = 100;
    constexpr std::size_t runs = 100;
    auto const inst = ProblemInstance::binvalue(n);
    std::size_t matches = 0;
    for (std::size_t r = 0; r < runs; ++r) {
        RandomStream probe(seed ^ r);
        auto const x0 = problems::Bitstring::random(n, probe);
        auto flipped = x0;
        flipped.complement();
        auto const expected = std::max(problems::fitness(inst, x0), problems::fitness(inst, flipped));
        RandomStream rng(seed ^ r);
        auto const result = solvers::run({ SolverKind::rls }, inst, static_cast<double>(n), 1000, rng);
        matches += result.best_fitness == expected ? 1 : 0;
    }
    OracleCheck check;
    check.name = "binvalue-rlsn";
    check.description = fmt::format("runs of RLS(k=n) on BinValue n={} whose best equals max(f(x0), f(~x0))", n);
    check.measured = static_cast<double>(matches);
    check.expected = static_cast<double>(runs);
    check.tolerance = 0.0;
    check.passed = matches == runs;
    return check;
}

} // namespace

std::vector<std::string> oracle_names()
{
    return { "leadingones-rls1", "leadingones-ea1", "leadingones-ea159", "flipcount", "binvalue-rlsn" };
}

OracleCheck run_oracle(std::string const& name, std::uint64_t seed)
{
    if (name == "leadingones-rls1") {
        return leadingones_runtime(name, SolverKind::rls, 1.0, 5000.0, seed);
    }
    if (name == "leadingones-ea1") {
        return leadingones_runtime(name, SolverKind::ea, 1.0 / 100.0, 8600.0, seed);
    }
    if (name == "leadingones-ea159") {
        return leadingones_runtime(name, SolverKind::ea, 1.59 / 100.0, 7700.0, seed);
    }
    if (name == "flipcount") {
        return flip_count_oracle(seed);
    }
    if (name == "binvalue-rlsn") {
        return binvalue_oracle(seed);
    }
    throw std::invalid_argument(fmt::format("unknown oracle '{}'", name));
}

} // namespace featune::harness
