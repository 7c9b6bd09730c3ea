#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "featune/problems.hpp"
#include "featune/random.hpp"

namespace featune::solvers {

enum class SolverKind : unsigned char { ea, rls };

std::string_view to_string(SolverKind kind) noexcept;
SolverKind solver_from_string(std::string_view name); // "ea" or "rls"
std::string_view parameter_name(SolverKind kind) noexcept; // "mu" or "k"

struct SolverSpec {
    SolverKind kind = SolverKind::ea;
};

inline constexpr std::int64_t unlimited_budget = std::numeric_limits<std::int64_t>::max();

struct RunResult {
    double best_fitness = 0.0;
    std::int64_t evaluations_used = 0;
    bool hit_optimum = false;
    std::optional<std::int64_t> hitting_time; // evaluation index of the first optimum

    friend bool operator==(RunResult const&, RunResult const&) = default;
};

struct TracePoint {
    std::int64_t evaluation;
    double best_fitness;
};

struct RunOptions {
    bool stop_at_optimum = true;
    std::vector<TracePoint>* trace = nullptr; // test hook, one point per evaluation
};

/// Samples Bin(n, p) by table inversion (falls back to the standard
/// distribution when the table would underflow).
class FlipCountSampler {
public:
    FlipCountSampler(std::size_t n, double p);
    std::size_t operator()(RandomStream& rng);

private:
    std::size_t n_;
    bool complement_ = false; // sample non-flips when p > 1/2
    bool degenerate_ = false; // p of the sampled side is 0
    std::vector<double> cdf_;
    std::optional<std::binomial_distribution<long>> fallback_;
};

/// Draws k distinct positions of [0, n) by partial Fisher-Yates over a
/// persistent permutation.
class PositionSampler {
public:
    explicit PositionSampler(std::size_t n);
    std::span<std::uint32_t const> draw(std::size_t k, RandomStream& rng);

private:
    std::vector<std::uint32_t> perm_;
};

/// One fixed-budget run. EA: standard bit mutation with rate `param` in
/// [0, 1]. RLS: flips exactly `param` (integer in [1, n]) distinct bits.
/// The random initial point counts as the first evaluation; offspring
/// replace the parent when their fitness is at least as good.
RunResult run(SolverSpec spec, problems::ProblemInstance const& instance, double param, std::int64_t budget,
              RandomStream& rng, RunOptions const& options = {});

/// `runs` independent runs; run r uses RandomStream(seed_base ^ r).
std::vector<RunResult> run_many(SolverSpec spec, problems::ProblemInstance const& instance, double param,
                                std::int64_t budget, std::size_t runs, std::uint64_t seed_base,
                                RunOptions const& options = {});

/// "eval_index,best_fitness" lines.
std::string trace_csv(std::span<TracePoint const> trace);

} // namespace featune::solvers
