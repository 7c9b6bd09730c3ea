#include "featune/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "featune/parallel.hpp"
#include "featune/parser.hpp"
#include "featune/stats.hpp"

namespace featune::engine {

using expr::Expression;
using problems::ProblemInstance;
using solvers::SolverKind;

namespace {

// initial trees use ramped depths 2..4 (capped by max_depth)
constexpr std::size_t initial_depth_limit = 4;

constexpr std::uint64_t tuner_stream = 0x7475'6e65ULL;

} // namespace

void TunerConfig::validate() const
{
    auto fail = [](std::string const& what) { throw ConfigError("invalid configuration: " + what); };
    if (population_size < 1) {
        fail("population_size must be at least 1");
    }
    if (tournament_size < 1 || tournament_size > population_size) {
        fail("tournament_size must lie in [1, population_size]");
    }
    if (!(crossover_rate > 0.0 && crossover_rate <= 1.0)) {
        fail("crossover_rate must lie in (0, 1]");
    }
    if (!(mutation_probability >= 0.0 && mutation_probability <= 1.0)) {
        fail("mutation_probability must lie in [0, 1]");
    }
    if (!(replacement_cap >= 0.0 && replacement_cap <= 1.0)) {
        fail("replacement_cap must lie in [0, 1]");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        fail("alpha must lie in (0, 1)");
    }
    if (runs < 1) {
        fail("runs must be at least 1");
    }
    if (max_depth < 1) {
        fail("max_depth must be at least 1");
    }
    if (!(grow_fraction >= 0.0 && grow_fraction <= 1.0)) {
        fail("grow_fraction must lie in [0, 1]");
    }
    try {
        expr::parse(budget, expr::Dialect::budget);
    } catch (expr::ParseError const& e) {
        fail(fmt::format("budget '{}': {}", budget, e.what()));
    }
}

std::size_t TunerConfig::replacement_limit() const noexcept
{
    return static_cast<std::size_t>(std::floor(replacement_cap * static_cast<double>(population_size) + 1e-9));
}

double clamp_parameter(SolverKind solver, double value, std::size_t n) noexcept
{
    auto const nd = static_cast<double>(n);
    if (solver == SolverKind::ea) {
        return std::clamp(value, 1.0 / (nd * nd), 1.0);
    }
    return std::clamp(std::round(value), 1.0, nd);
}

ReferenceTable::ReferenceTable(std::vector<double> initial)
    : values_(std::move(initial))
{
    for (auto v : values_) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("reference values must be positive and finite");
        }
    }
}

double ReferenceTable::at(std::size_t instance) const
{
    if (instance >= values_.size()) {
        throw std::out_of_range(fmt::format("no reference value for instance {}", instance));
    }
    return values_[instance];
}

bool ReferenceTable::update(std::size_t instance, double value)
{
    if (instance >= values_.size()) {
        throw std::out_of_range(fmt::format("no reference value for instance {}", instance));
    }
    if (value > values_[instance]) {
        values_[instance] = value;
        return true;
    }
    return false;
}

Score score(Candidate const& candidate, ReferenceTable const& refs)
{
    if (refs.size() < candidate.instances) {
        throw std::out_of_range("reference table does not cover every instance");
    }
    Score s;
    s.samples.resize(candidate.raw_fitness.size());
    for (std::size_t i = 0; i < candidate.instances; ++i) {
        auto const r = refs.at(i);
        for (std::size_t run = 0; run < candidate.runs; ++run) {
            s.samples[i * candidate.runs + run] = candidate.raw(i, run) / r;
        }
    }
    s.value = s.samples.empty() ? 0.0 : stats::mean(s.samples);
    return s;
}

std::vector<std::int64_t> instance_budgets(Expression const& budget, std::span<ProblemInstance const> instances)
{
    std::vector<std::int64_t> out;
    out.reserve(instances.size());
    for (auto const& inst : instances) {
        for (auto const& f : expr::features_of(budget)) {
            if (!inst.features().contains(f)) {
                throw ConfigError(fmt::format("budget '{}' uses feature '{}' which {} instances do not have",
                                              expr::format(budget), f, problems::to_string(inst.kind())));
            }
        }
        auto const value = std::floor(expr::evaluate(budget, inst.features()));
        if (!(value >= 1.0)) {
            throw ConfigError(fmt::format("budget '{}' evaluates to {} on instance {}; at least 1 evaluation is "
                                          "required",
                                          expr::format(budget), value, inst.feature_label()));
        }
        out.push_back(value >= 9.0e18 ? solvers::unlimited_budget : static_cast<std::int64_t>(value));
    }
    return out;
}

SolverTarget::SolverTarget(std::vector<ProblemInstance> instances, SolverKind solver, Expression budget)
    : instances_(std::move(instances))
    , solver_(solver)
    , budgets_(instance_budgets(budget, instances_))
{
}

std::optional<double> SolverTarget::known_optimum(std::size_t instance) const
{
    return problems::optimum(instances_.at(instance));
}

expr::PrimitiveSet SolverTarget::primitives() const
{
    expr::PrimitiveSet prims;
    if (!instances_.empty()) {
        prims.features = problems::feature_names(instances_.front().kind());
    }
    return prims;
}

double SolverTarget::parameter(Expression const& e, std::size_t instance) const
{
    auto const& inst = instances_.at(instance);
    return clamp_parameter(solver_, expr::evaluate(e, inst.features()), inst.n());
}

std::vector<double> SolverTarget::evaluate(Expression const& e, std::size_t instance, std::size_t runs,
                                           std::uint64_t seed) const
{
    Key key { instance, parameter(e, instance), runs, seed };
    {
        std::lock_guard lock(cache_mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) {
            return it->second;
        }
    }
    auto const& inst = instances_[instance];
    std::vector<double> row(runs);
    for (std::size_t r = 0; r < runs; ++r) {
        RandomStream rng(derive_seed(seed, { instance, r }));
        row[r] = solvers::run({ solver_ }, inst, key.parameter, budgets_[instance], rng).best_fitness;
    }
    std::lock_guard lock(cache_mutex_);
    cache_.emplace(key, row);
    return row;
}

std::size_t SolverTarget::cache_entries() const
{
    std::lock_guard lock(cache_mutex_);
    return cache_.size();
}

namespace {

Candidate measure(Expression const& e, TuningTarget const& target, TunerConfig const& config)
{
    Candidate c;
    c.expr = e;
    c.instances = target.instance_count();
    c.runs = config.runs;
    c.cached_size = e.size();
    c.raw_fitness.reserve(c.instances * c.runs);
    for (std::size_t i = 0; i < c.instances; ++i) {
        auto row = target.evaluate(e, i, config.runs, config.seed);
        if (row.size() != config.runs) {
            throw std::logic_error("target returned a row of the wrong length");
        }
        c.raw_fitness.insert(c.raw_fitness.end(), row.begin(), row.end());
    }
    return c;
}

bool absorb(ReferenceTable& refs, Candidate const& c)
{
    bool changed = false;
    for (std::size_t i = 0; i < c.instances; ++i) {
        for (std::size_t r = 0; r < c.runs; ++r) {
            changed = refs.update(i, c.raw(i, r)) || changed;
        }
    }
    return changed;
}

std::vector<Candidate> measure_all(std::vector<Expression> const& exprs, TuningTarget const& target,
                                   TunerConfig const& config, std::size_t workers)
{
    std::vector<Candidate> out(exprs.size());
    parallel_for(exprs.size(), workers, [&](std::size_t k) { out[k] = measure(exprs[k], target, config); });
    return out;
}

void rescore(Population& population, ReferenceTable const& refs)
{
    for (auto& m : population) {
        m.score = score(m.candidate, refs);
    }
}

} // namespace

Candidate evaluate_candidate(Expression const& e, TuningTarget const& target, TunerConfig const& config,
                             ReferenceTable& refs)
{
    auto c = measure(e, target, config);
    absorb(refs, c);
    return c;
}

bool ranks_before(Member const& a, Member const& b) noexcept
{
    if (a.score.value != b.score.value) {
        return a.score.value > b.score.value;
    }
    if (a.candidate.cached_size != b.candidate.cached_size) {
        return a.candidate.cached_size < b.candidate.cached_size;
    }
    return a.candidate.serial < b.candidate.serial;
}

std::size_t tournament_select(Population const& population, std::size_t tournament_size, RandomStream& rng)
{
    if (population.empty() || tournament_size < 1 || tournament_size > population.size()) {
        throw std::invalid_argument("tournament size must lie in [1, population size]");
    }
    std::vector<std::size_t> idx(population.size());
    std::iota(idx.begin(), idx.end(), std::size_t { 0 });
    for (std::size_t j = 0; j < tournament_size; ++j) {
        auto const r = j + static_cast<std::size_t>(rng.below(idx.size() - j));
        std::swap(idx[j], idx[r]);
    }
    auto best = idx[0];
    for (std::size_t j = 1; j < tournament_size; ++j) {
        auto const c = idx[j];
        auto const& a = population[c];
        auto const& b = population[best];
        bool better = a.score.value > b.score.value
            || (a.score.value == b.score.value
                && (a.candidate.cached_size < b.candidate.cached_size
                    || (a.candidate.cached_size == b.candidate.cached_size && c < best)));
        if (better) {
            best = c;
        }
    }
    return best;
}

ReplaceOutcome try_replace(Population& population, Member newcomer, std::size_t replaced_so_far,
                           TunerConfig const& config)
{
    if (replaced_so_far >= config.replacement_limit()) {
        return {};
    }
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), std::size_t { 0 });
    // worst first: reverse of the selection ranking
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ranks_before(population[b], population[a]); });

    for (auto idx : order) {
        auto const& incumbent = population[idx];
        auto const test = stats::rank_sum_test(incumbent.score.samples, newcomer.score.samples);
        if (test.p_value < config.alpha && newcomer.score.value >= incumbent.score.value) {
            population[idx] = std::move(newcomer);
            return { true, idx, ReplacementRule::significance };
        }
        auto const indistinguishable = test.p_value >= config.alpha && test.p_reverse >= config.alpha;
        if (indistinguishable && newcomer.candidate.cached_size < incumbent.candidate.cached_size) {
            population[idx] = std::move(newcomer);
            return { true, idx, ReplacementRule::parsimony };
        }
    }
    return {};
}

TuneResult tune(TunerConfig const& config, TuningTarget const& target, TuneOptions const& options)
{
    config.validate();
    if (target.instance_count() == 0) {
        throw ConfigError("no training instances");
    }

    RandomStream rng(derive_seed(config.seed, { tuner_stream }));
    auto const prims = target.primitives();
    std::uint64_t serial = 0;

    std::vector<Expression> initial;
    initial.reserve(config.population_size);
    auto const grow_count
        = static_cast<std::size_t>(std::round(config.grow_fraction * static_cast<double>(config.population_size)));
    auto const top_depth = std::min(config.max_depth, initial_depth_limit);
    for (std::size_t i = 0; i < config.population_size; ++i) {
        auto const method = i < grow_count ? expr::InitMethod::grow : expr::InitMethod::full;
        auto const depth = top_depth <= 2 ? top_depth : 2 + i % (top_depth - 1);
        initial.push_back(expr::random_tree(method, depth, rng, prims));
    }

    auto evaluated = measure_all(initial, target, config, options.workers);

    std::vector<double> start(target.instance_count(), 0.0);
    for (std::size_t i = 0; i < start.size(); ++i) {
        if (auto known = target.known_optimum(i)) {
            start[i] = *known;
        } else {
            for (auto const& c : evaluated) {
                for (std::size_t r = 0; r < c.runs; ++r) {
                    start[i] = std::max(start[i], c.raw(i, r));
                }
            }
        }
        if (!(start[i] > 0.0)) {
            start[i] = 1.0;
        }
    }
    TuneResult result { {}, ReferenceTable(std::move(start)) };
    auto& refs = result.references;
    auto& population = result.population;

    for (auto& c : evaluated) {
        absorb(refs, c);
        c.serial = serial++;
        population.push_back({ std::move(c), {} });
    }
    rescore(population, refs);

    for (std::size_t g = 0; g < config.generations; ++g) {
        std::vector<Expression> offspring;
        offspring.reserve(config.population_size);
        for (std::size_t k = 0; k < config.population_size; ++k) {
            auto const& first = population[tournament_select(population, config.tournament_size, rng)].candidate;
            Expression child = first.expr;
            if (rng.bernoulli(config.crossover_rate)) {
                auto const& second
                    = population[tournament_select(population, config.tournament_size, rng)].candidate;
                child = expr::crossover(first.expr, second.expr, rng, config.max_depth);
            }
            if (rng.bernoulli(config.mutation_probability)) {
                child = expr::mutate(child, rng, config.max_depth, prims);
            }
            offspring.push_back(std::move(child));
        }

        auto fresh = measure_all(offspring, target, config, options.workers);
        bool changed = false;
        for (auto& c : fresh) {
            changed = absorb(refs, c) || changed;
            c.serial = serial++;
        }
        if (changed) {
            rescore(population, refs);
        }

        GenerationStats stats;
        stats.generation = g + 1;
        for (auto& c : fresh) {
            Member m { std::move(c), {} };
            m.score = score(m.candidate, refs);
            auto const outcome = try_replace(population, std::move(m), stats.replacements, config);
            if (outcome.replaced) {
                ++stats.replacements;
                if (outcome.rule == ReplacementRule::significance) {
                    ++stats.significant;
                } else {
                    ++stats.parsimonious;
                }
            }
        }

        if (options.observer) {
            stats.best_score = population.front().score.value;
            stats.min_score = population.front().score.value;
            double sizes = 0.0;
            for (auto const& m : population) {
                stats.best_score = std::max(stats.best_score, m.score.value);
                stats.min_score = std::min(stats.min_score, m.score.value);
                sizes += static_cast<double>(m.candidate.cached_size);
            }
            stats.mean_size = sizes / static_cast<double>(population.size());
            options.observer(stats, population);
        }
    }

    std::stable_sort(population.begin(), population.end(), ranks_before);
    return result;
}

TuneResult tune(TunerConfig const& config, TuneOptions const& options)
{
    config.validate();
    auto budget = expr::parse(config.budget, expr::Dialect::budget);
    SolverTarget target(problems::training_set(config.problem), config.solver, std::move(budget));
    return tune(config, target, options);
}

} // namespace featune::engine
