#pragma once

#include "featune/expression.hpp"

namespace featune::expr {

/// Canonical form used for frequency counting. Folds constants, removes
/// identities (x+0, x*1, x/1, 0*x, x-x, x/x), merges constant factors of
/// nested commutative operators and orders add/mul operands as
/// constants < features < compounds (then by value, name or text).
/// Idempotent, and preserves the value of the expression.
Expression canonicalize(Expression const& e);

/// Integer form for mutation strengths: constant subexpressions r become
/// floor(r); constant factors of feature products are kept.
Expression to_rls_form(Expression const& e);

/// Rate form for mutation probabilities: additive constants next to
/// feature terms are dropped (1/(n+1) -> 1/n, 1/(n-2) -> 1/n).
Expression to_ea_form(Expression const& e);

} // namespace featune::expr
