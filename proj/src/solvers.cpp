#include "featune/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace featune::solvers {

using problems::Bitstring;
using problems::ProblemInstance;
using problems::ProblemKind;

std::string_view to_string(SolverKind kind) noexcept { return kind == SolverKind::ea ? "ea" : "rls"; }

SolverKind solver_from_string(std::string_view name)
{
    if (name == "ea") {
        return SolverKind::ea;
    }
    if (name == "rls") {
        return SolverKind::rls;
    }
    throw std::invalid_argument("unknown solver '" + std::string(name) + "' (expected ea or rls)");
}

std::string_view parameter_name(SolverKind kind) noexcept { return kind == SolverKind::ea ? "mu" : "k"; }

FlipCountSampler::FlipCountSampler(std::size_t n, double p)
    : n_(n)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("mutation rate must lie in [0, 1]");
    }
    if (p > 0.5) {
        complement_ = true;
        p = 1.0 - p;
    }
    if (p == 0.0) {
        degenerate_ = true;
        return;
    }
    auto const nd = static_cast<double>(n);
    auto pmf = std::exp(nd * std::log1p(-p));
    if (pmf < 1e-290) {
        fallback_.emplace(static_cast<long>(n), p);
        return;
    }
    auto const ratio = p / (1.0 - p);
    auto const mean = nd * p;
    double cumulative = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        cumulative += pmf;
        cdf_.push_back(cumulative);
        if (static_cast<double>(k) > mean && pmf < 1e-18) {
            break;
        }
        pmf *= static_cast<double>(n - k) / static_cast<double>(k + 1) * ratio;
    }
    cdf_.back() = 2.0; // absorb the truncated tail and rounding
}

std::size_t FlipCountSampler::operator()(RandomStream& rng)
{
    std::size_t k = 0;
    if (degenerate_) {
        k = 0;
    } else if (fallback_) {
        k = static_cast<std::size_t>((*fallback_)(rng));
    } else {
        auto const u = rng.uniform();
        while (u >= cdf_[k]) {
            ++k;
        }
    }
    return complement_ ? n_ - k : k;
}

PositionSampler::PositionSampler(std::size_t n)
    : perm_(n)
{
    std::iota(perm_.begin(), perm_.end(), std::uint32_t { 0 });
}

std::span<std::uint32_t const> PositionSampler::draw(std::size_t k, RandomStream& rng)
{
    auto const n = perm_.size();
    for (std::size_t j = 0; j < k; ++j) {
        auto const r = j + static_cast<std::size_t>(rng.below(n - j));
        std::swap(perm_[j], perm_[r]);
    }
    return { perm_.data(), k };
}

namespace {

// Current search point with cached fitness ingredients.
class SearchState {
public:
    SearchState(ProblemInstance const& instance, Bitstring x)
        : instance_(instance)
        , x_(std::move(x))
    {
        ones_ = x_.count_ones();
        lo_ = x_.leading_ones();
        fitness_ = problems::fitness(instance_, x_);
    }

    double fitness() const noexcept { return fitness_; }

    // Flips the given positions (after an optional complement) and returns
    // the new fitness. undo() restores the previous state.
    double apply(std::span<std::uint32_t const> positions, bool complemented)
    {
        saved_ones_ = ones_;
        saved_lo_ = lo_;
        saved_fitness_ = fitness_;
        positions_ = positions;
        complemented_ = complemented;

        auto const n = x_.size();
        if (complemented) {
            x_.complement();
            ones_ = n - ones_;
        }
        std::size_t min_pos = n;
        for (auto p : positions) {
            x_.flip(p);
            if (x_.get(p)) {
                ++ones_;
            } else {
                --ones_;
            }
            min_pos = std::min<std::size_t>(min_pos, p);
        }

        switch (instance_.kind()) {
        case ProblemKind::onemax:
        case ProblemKind::jump: fitness_ = problems::fitness_from_ones(instance_, ones_); break;
        case ProblemKind::leadingones:
            if (complemented) {
                lo_ = x_.leading_ones();
            } else if (min_pos < lo_) {
                lo_ = min_pos;
            } else if (min_pos == lo_) {
                lo_ = x_.leading_ones_from(lo_);
            }
            fitness_ = static_cast<double>(lo_);
            break;
        case ProblemKind::binvalue: fitness_ = problems::fitness(instance_, x_); break;
        }
        return fitness_;
    }

    void undo()
    {
        for (auto p : positions_) {
            x_.flip(p);
        }
        if (complemented_) {
            x_.complement();
        }
        ones_ = saved_ones_;
        lo_ = saved_lo_;
        fitness_ = saved_fitness_;
    }

private:
    ProblemInstance const& instance_;
    Bitstring x_;
    std::size_t ones_ = 0;
    std::size_t lo_ = 0;
    double fitness_ = 0.0;

    std::span<std::uint32_t const> positions_;
    bool complemented_ = false;
    std::size_t saved_ones_ = 0;
    std::size_t saved_lo_ = 0;
    double saved_fitness_ = 0.0;
};

} // namespace

RunResult run(SolverSpec spec, ProblemInstance const& instance, double param, std::int64_t budget, RandomStream& rng,
              RunOptions const& options)
{
    if (budget < 1) {
        throw std::invalid_argument("budget must be at least 1 evaluation");
    }
    auto const n = instance.n();

    std::optional<FlipCountSampler> flips;
    std::size_t strength = 0;
    if (spec.kind == SolverKind::ea) {
        flips.emplace(n, param);
    } else {
        if (!(param >= 1.0) || param != std::floor(param)) {
            throw std::invalid_argument("RLS mutation strength must be a positive integer");
        }
        if (param > static_cast<double>(n)) {
            throw std::invalid_argument(fmt::format("RLS mutation strength k = {} exceeds n = {}", param, n));
        }
        strength = static_cast<std::size_t>(param);
    }

    auto const target = problems::optimum(instance);
    SearchState state(instance, Bitstring::random(n, rng));
    PositionSampler positions(n);

    RunResult result;
    result.evaluations_used = 1;
    auto record = [&] {
        if (options.trace) {
            options.trace->push_back({ result.evaluations_used, state.fitness() });
        }
        if (!result.hit_optimum && state.fitness() == target) {
            result.hit_optimum = true;
            result.hitting_time = result.evaluations_used;
        }
    };
    record();

    while (result.evaluations_used < budget && !(result.hit_optimum && options.stop_at_optimum)) {
        auto const parent = state.fitness();
        auto const count = flips ? (*flips)(rng) : strength;
        auto const complemented = 2 * count > n;
        auto const chosen = positions.draw(complemented ? n - count : count, rng);
        auto const child = state.apply(chosen, complemented);
        ++result.evaluations_used;
        if (child < parent) {
            state.undo();
        }
        record();
    }

    result.best_fitness = state.fitness();
    return result;
}

std::vector<RunResult> run_many(SolverSpec spec, ProblemInstance const& instance, double param, std::int64_t budget,
                                std::size_t runs, std::uint64_t seed_base, RunOptions const& options)
{
    if (runs < 1) {
        throw std::invalid_argument("runs must be at least 1");
    }
    std::vector<RunResult> results;
    results.reserve(runs);
    for (std::size_t r = 0; r < runs; ++r) {
        RandomStream rng(seed_base ^ r);
        results.push_back(run(spec, instance, param, budget, rng, options));
    }
    return results;
}

std::string trace_csv(std::span<TracePoint const> trace)
{
    std::string out = "eval_index,best_fitness\n";
    for (auto const& p : trace) {
        out += fmt::format("{},{}\n", p.evaluation, p.best_fitness);
    }
    return out;
}

} // namespace featune::solvers
