#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "featune/engine.hpp"
#include "featune/expression.hpp"
#include "featune/problems.hpp"
#include "featune/solvers.hpp"

namespace featune::harness {

enum class PoolMode : unsigned char { top5, full };

std::string_view to_string(PoolMode mode) noexcept;
PoolMode pool_from_string(std::string_view name); // "top5" or "full"

inline constexpr std::size_t elite_count = 5;

/// Canonical text used for frequency counting: canonicalize, then the
/// solver's final form. For RLS a constant c is reported as max(1, floor(c)).
expr::Expression final_form(expr::Expression const& e, solvers::SolverKind solver);

struct EliteEntry {
    std::string expression;
    std::size_t frequency = 0;
    double best_score = 0.0;              // highest S among pooled members with this form
    double mean_score = 0.0;              // mean S over pooled members with this form
    std::vector<double> instance_medians; // per-instance median normalized sample of the best member
};

struct EliteReport {
    engine::TunerConfig config;
    PoolMode pool = PoolMode::top5;
    std::size_t tuner_runs = 0;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> instance_labels;
    std::size_t pool_size = 0;
    std::vector<EliteEntry> entries; // frequency desc, then text asc

    /// The `count` most frequent entries.
    std::vector<EliteEntry> top(std::size_t count = 3) const;
};

struct TrainOptions {
    std::size_t tuner_runs = 10;
    PoolMode pool = PoolMode::top5;
    std::size_t workers = 1;
    std::function<void(std::size_t run, engine::TuneResult const&)> on_run;
};

/// Seed of tuner run `run` under master seed `seed`.
std::uint64_t tuner_seed(std::uint64_t seed, std::size_t run) noexcept;

/// Runs the tuner `tuner_runs` times on the training set of the configured
/// problem and tallies the final forms of the pooled members.
EliteReport train_protocol(engine::TunerConfig const& config, TrainOptions const& options = {});

/// Same, on an explicit target. Exposed for tests with synthetic targets.
EliteReport train_protocol(engine::TunerConfig const& config, engine::TuningTarget const& target,
                           std::vector<std::string> instance_labels, TrainOptions const& options);

struct EvaluationCell {
    std::string expression;
    problems::ProblemInstance instance = problems::ProblemInstance::onemax(1);
    double parameter = 0.0;      // clamped parameter value
    std::int64_t budget = 0;
    std::vector<double> samples; // normalized best fitness, one per run
};

struct EvaluationTable {
    solvers::SolverKind solver = solvers::SolverKind::ea;
    std::string budget;
    std::size_t runs = 0;
    std::uint64_t seed = 0;
    std::vector<EvaluationCell> cells; // expression-major
};

/// Runs every expression `runs` times on every instance. Run r on instance
/// i uses the same random stream for every expression. Throws
/// engine::ConfigError when an expression uses a feature an instance lacks.
EvaluationTable evaluate_expressions(std::vector<expr::Expression> const& exprs,
                                     std::vector<problems::ProblemInstance> const& instances,
                                     solvers::SolverKind solver, std::string const& budget, std::size_t runs = 100,
                                     std::uint64_t seed = 1, std::size_t workers = 1);

/// Comparison family: EA mu = i/n for i in {1, 3/2, 2, 5/2, 3, 4};
/// RLS k in {1, 2, 3, n}, plus m and 2m on Jump.
std::vector<expr::Expression> baseline_expressions(solvers::SolverKind solver, problems::ProblemKind problem);

/// Measured-versus-expected check for the `oracle` command.
struct OracleCheck {
    std::string name;
    std::string description;
    double measured = 0.0;
    double expected = 0.0;
    double tolerance = 0.0; // relative unless noted in description
    bool passed = false;
};

std::vector<std::string> oracle_names();

/// Runs one named oracle; throws std::invalid_argument for unknown names.
OracleCheck run_oracle(std::string const& name, std::uint64_t seed = 1);

} // namespace featune::harness
