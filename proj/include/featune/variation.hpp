#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "featune/expression.hpp"
#include "featune/random.hpp"

namespace featune::expr {

/// Terminals and operators available to evolved trees.
struct PrimitiveSet {
    std::vector<std::string> features;
    std::vector<double> constants { 1.0, 2.0, -1.0, -2.0 };
    std::vector<Op> operators { Op::add, Op::sub, Op::mul, Op::div };

    std::size_t terminal_count() const noexcept { return constants.size() + features.size(); }
    Expression terminal(std::size_t index) const;
    Expression random_terminal(RandomStream& rng) const;
    Op random_operator(RandomStream& rng) const;
};

enum class InitMethod : unsigned char { grow, full };

/// Classic ramped generators. full: every leaf at depth max_depth.
/// grow: each node below max_depth is drawn uniformly from operators and terminals.
Expression random_tree(InitMethod method, std::size_t max_depth, RandomStream& rng, PrimitiveSet const& prims);

struct Mutation {
    Expression tree;
    std::size_t site; // preorder index of the mutated node
};

/// Point mutation at a uniformly chosen node. Leaves get a fresh terminal;
/// internal nodes get either a different operator or a new grow(2) subtree.
Mutation mutate_traced(Expression const& e, RandomStream& rng, std::size_t max_depth, PrimitiveSet const& prims);

inline Expression mutate(Expression const& e, RandomStream& rng, std::size_t max_depth, PrimitiveSet const& prims)
{
    return mutate_traced(e, rng, max_depth, prims).tree;
}

/// Subtree gluing: a random subtree of a copy of `a` is replaced by a random
/// subtree of `b`. Retries up to 5 times on depth overflow, then returns `a`.
Expression crossover(Expression const& a, Expression const& b, RandomStream& rng, std::size_t max_depth);

} // namespace featune::expr
