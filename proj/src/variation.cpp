#include "featune/variation.hpp"

#include <stdexcept>

namespace featune::expr {

namespace {

constexpr int crossover_attempts = 5;
constexpr std::size_t mutation_subtree_depth = 2;

Expression generate(InitMethod method, std::size_t depth, std::size_t max_depth, RandomStream& rng,
                    PrimitiveSet const& prims)
{
    if (depth >= max_depth) {
        return prims.random_terminal(rng);
    }
    if (method == InitMethod::grow) {
        auto const choices = prims.operators.size() + prims.terminal_count();
        auto const pick = rng.below(choices);
        if (pick >= prims.operators.size()) {
            return prims.terminal(pick - prims.operators.size());
        }
        auto op = prims.operators[pick];
        auto l = generate(method, depth + 1, max_depth, rng, prims);
        auto r = generate(method, depth + 1, max_depth, rng, prims);
        return Expression::binary(op, std::move(l), std::move(r));
    }
    auto op = prims.random_operator(rng);
    auto l = generate(method, depth + 1, max_depth, rng, prims);
    auto r = generate(method, depth + 1, max_depth, rng, prims);
    return Expression::binary(op, std::move(l), std::move(r));
}

} // namespace

Expression PrimitiveSet::terminal(std::size_t index) const
{
    if (index < constants.size()) {
        return Expression::constant(constants[index]);
    }
    index -= constants.size();
    if (index < features.size()) {
        return Expression::feature(features[index]);
    }
    throw std::out_of_range("terminal index out of range");
}

Expression PrimitiveSet::random_terminal(RandomStream& rng) const
{
    return terminal(rng.below(terminal_count()));
}

Op PrimitiveSet::random_operator(RandomStream& rng) const
{
    return operators[rng.below(operators.size())];
}

Expression random_tree(InitMethod method, std::size_t max_depth, RandomStream& rng, PrimitiveSet const& prims)
{
    if (max_depth < 1) {
        throw std::invalid_argument("max_depth must be at least 1");
    }
    if (prims.terminal_count() == 0 || prims.operators.empty()) {
        throw std::invalid_argument("primitive set needs terminals and operators");
    }
    return generate(method, 1, max_depth, rng, prims);
}

Mutation mutate_traced(Expression const& e, RandomStream& rng, std::size_t max_depth, PrimitiveSet const& prims)
{
    auto const site = static_cast<std::size_t>(rng.below(e.size()));
    auto const& target = subtree_at(e, site);

    if (target.is_leaf()) {
        return { replace_subtree(e, site, prims.random_terminal(rng)), site };
    }

    if (rng.below(2) == 0 && prims.operators.size() > 1) {
        // operator resampling: pick one of the other operators
        auto pick = rng.below(prims.operators.size() - 1);
        auto op = prims.operators[pick];
        if (op == target.op()) {
            op = prims.operators.back();
        }
        auto node = Expression::binary(op, target.left(), target.right());
        return { replace_subtree(e, site, std::move(node)), site };
    }

    auto const site_depth = depth_at(e, site);
    if (site_depth - 1 + mutation_subtree_depth > max_depth) {
        return { replace_subtree(e, site, prims.random_terminal(rng)), site };
    }
    auto fresh = random_tree(InitMethod::grow, mutation_subtree_depth, rng, prims);
    return { replace_subtree(e, site, std::move(fresh)), site };
}

Expression crossover(Expression const& a, Expression const& b, RandomStream& rng, std::size_t max_depth)
{
    for (int attempt = 0; attempt < crossover_attempts; ++attempt) {
        auto const cut = static_cast<std::size_t>(rng.below(a.size()));
        auto const graft = static_cast<std::size_t>(rng.below(b.size()));
        auto child = replace_subtree(a, cut, subtree_at(b, graft));
        if (child.depth() <= max_depth) {
            return child;
        }
    }
    return a;
}

} // namespace featune::expr
