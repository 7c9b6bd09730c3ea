#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "featune/expression.hpp"
#include "featune/problems.hpp"
#include "featune/random.hpp"
#include "featune/solvers.hpp"
#include "featune/variation.hpp"

namespace featune::engine {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tuner settings. Defaults are the standard setup: 100 generations of 20
/// trees, tournaments of 5, at most 75% of the population replaced per
/// generation, crossover 0.8, mutation 0.2, 10 runs per candidate and a
/// rank-sum threshold of 0.02.
struct TunerConfig {
    problems::ProblemKind problem = problems::ProblemKind::onemax;
    solvers::SolverKind solver = solvers::SolverKind::ea;
    std::string budget = "e*n*ln(n)";
    std::size_t generations = 100;
    std::size_t population_size = 20;
    std::size_t tournament_size = 5;
    double replacement_cap = 0.75;
    double mutation_probability = 0.2;
    double crossover_rate = 0.8;
    std::size_t runs = 10;
    double alpha = 0.02;
    std::uint64_t seed = 1;
    std::size_t max_depth = 8;
    double grow_fraction = 0.5;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;

    /// floor(replacement_cap * population_size)
    std::size_t replacement_limit() const noexcept;
};

/// Maps a raw expression value to the solver's parameter domain:
/// EA mu in [1/n^2, 1]; RLS k = round(value) in [1, n].
double clamp_parameter(solvers::SolverKind solver, double value, std::size_t n) noexcept;

/// Best known objective value per instance. Values only grow.
class ReferenceTable {
public:
    ReferenceTable() = default;
    explicit ReferenceTable(std::vector<double> initial);

    std::size_t size() const noexcept { return values_.size(); }
    double at(std::size_t instance) const;

    /// Raises R_i to `value` when larger; returns true on change.
    bool update(std::size_t instance, double value);

    std::span<double const> values() const noexcept { return values_; }

private:
    std::vector<double> values_;
};

/// An expression with its raw best-fitness samples, stored row-major as
/// instances x runs.
struct Candidate {
    expr::Expression expr = expr::Expression::constant(1.0);
    std::vector<double> raw_fitness;
    std::size_t instances = 0;
    std::size_t runs = 0;
    std::size_t cached_size = 0;
    std::uint64_t serial = 0;

    double raw(std::size_t instance, std::size_t run) const { return raw_fitness[instance * runs + run]; }
};

struct Score {
    std::vector<double> samples; // raw / R_i, instance-major
    double value = 0.0;          // mean of samples
};

/// Normalized samples and their mean under the current references.
Score score(Candidate const& candidate, ReferenceTable const& refs);

/// Produces raw fitness rows for expressions on a fixed instance list.
/// evaluate() must be safe to call concurrently.
class TuningTarget {
public:
    virtual ~TuningTarget() = default;
    virtual std::size_t instance_count() const = 0;
    virtual std::optional<double> known_optimum(std::size_t instance) const = 0;
    virtual expr::PrimitiveSet primitives() const = 0;
    virtual std::vector<double> evaluate(expr::Expression const& e, std::size_t instance, std::size_t runs,
                                         std::uint64_t seed) const = 0;
};

/// Runs a target algorithm on benchmark instances. Evaluation of instance
/// i, run r uses a stream derived from (seed, i, r) only, so candidates
/// share random numbers; results are memoized per clamped parameter.
class SolverTarget final : public TuningTarget {
public:
    SolverTarget(std::vector<problems::ProblemInstance> instances, solvers::SolverKind solver,
                 expr::Expression budget);

    std::size_t instance_count() const override { return instances_.size(); }
    std::optional<double> known_optimum(std::size_t instance) const override;
    expr::PrimitiveSet primitives() const override;
    std::vector<double> evaluate(expr::Expression const& e, std::size_t instance, std::size_t runs,
                                 std::uint64_t seed) const override;

    double parameter(expr::Expression const& e, std::size_t instance) const;
    std::int64_t budget(std::size_t instance) const { return budgets_.at(instance); }
    std::vector<problems::ProblemInstance> const& instances() const noexcept { return instances_; }
    solvers::SolverKind solver() const noexcept { return solver_; }

    std::size_t cache_entries() const;

private:
    struct Key {
        std::size_t instance;
        double parameter;
        std::size_t runs;
        std::uint64_t seed;
        auto operator<=>(Key const&) const = default;
    };

    std::vector<problems::ProblemInstance> instances_;
    solvers::SolverKind solver_;
    std::vector<std::int64_t> budgets_;
    mutable std::mutex cache_mutex_;
    mutable std::map<Key, std::vector<double>> cache_;
};

/// floor(budget(features)) per instance; throws ConfigError when below 1
/// or when the expression uses features the instance does not have.
std::vector<std::int64_t> instance_budgets(expr::Expression const& budget,
                                           std::span<problems::ProblemInstance const> instances);

/// Evaluates `e` on every instance of the target and raises the
/// references to any better raw fitness.
Candidate evaluate_candidate(expr::Expression const& e, TuningTarget const& target, TunerConfig const& config,
                             ReferenceTable& refs);

struct Member {
    Candidate candidate;
    Score score;
};

using Population = std::vector<Member>;

/// Ranking used for selection and sorting: score desc, size asc, serial asc.
bool ranks_before(Member const& a, Member const& b) noexcept;

/// Index of the winner of a tournament over `tournament_size` members drawn
/// without replacement. Ties go to the smaller tree, then the lower index.
std::size_t tournament_select(Population const& population, std::size_t tournament_size, RandomStream& rng);

enum class ReplacementRule : unsigned char { none, significance, parsimony };

struct ReplaceOutcome {
    bool replaced = false;
    std::optional<std::size_t> victim;
    ReplacementRule rule = ReplacementRule::none;
};

/// Scans members from the lowest score up. The newcomer replaces the first
/// member it beats: significantly better by the rank-sum test (and not
/// worse on mean score), or indistinguishable and strictly smaller. Does
/// nothing once `replaced_so_far` reaches the configured limit.
ReplaceOutcome try_replace(Population& population, Member newcomer, std::size_t replaced_so_far,
                           TunerConfig const& config);

struct GenerationStats {
    std::size_t generation = 0;
    std::size_t replacements = 0;
    std::size_t significant = 0;
    std::size_t parsimonious = 0;
    double best_score = 0.0;
    double min_score = 0.0;
    double mean_size = 0.0;
};

struct TuneOptions {
    std::size_t workers = 1;
    std::function<void(GenerationStats const&, Population const&)> observer;
};

struct TuneResult {
    Population population; // sorted by ranks_before
    ReferenceTable references;
};

/// The GP tuning loop on an arbitrary target.
TuneResult tune(TunerConfig const& config, TuningTarget const& target, TuneOptions const& options = {});

/// Tunes the configured solver on the built-in training set of the problem.
TuneResult tune(TunerConfig const& config, TuneOptions const& options = {});

} // namespace featune::engine
