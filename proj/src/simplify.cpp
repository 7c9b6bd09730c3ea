#include "featune/simplify.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>

namespace featune::expr {

namespace {

bool is_const(Expression const& e, double v) { return e.is_constant() && e.value() == v; }

int rank(Expression const& e)
{
    if (e.is_constant()) {
        return 0;
    }
    return e.is_feature() ? 1 : 2;
}

bool ordered_before(Expression const& a, Expression const& b)
{
    auto ra = rank(a);
    auto rb = rank(b);
    if (ra != rb) {
        return ra < rb;
    }
    if (ra == 0) {
        return a.value() < b.value();
    }
    if (ra == 1) {
        return a.name() < b.name();
    }
    return format(a) < format(b);
}

Expression fold(Op op, double a, double b)
{
    auto tree = Expression::binary(op, Expression::constant(a), Expression::constant(b));
    return Expression::constant(evaluate(tree, {}));
}

// coefficient * prod(feature^exponent), exponents non-zero
struct Monomial {
    double coefficient = 1.0;
    std::map<std::string, int> exponents;
};

constexpr int max_exponent = 16;

std::optional<Monomial> as_monomial(Expression const& e)
{
    if (e.is_constant()) {
        return Monomial { e.value(), {} };
    }
    if (e.is_feature()) {
        return Monomial { 1.0, { { e.name(), 1 } } };
    }
    if (e.kind() != Expression::Kind::binary || (e.op() != Op::mul && e.op() != Op::div)) {
        return std::nullopt;
    }
    auto l = as_monomial(e.left());
    auto r = as_monomial(e.right());
    if (!l || !r) {
        return std::nullopt;
    }
    auto const sign = e.op() == Op::mul ? 1 : -1;
    if (sign < 0 && r->coefficient == 0.0) {
        return std::nullopt; // protected division by a zero constant
    }
    l->coefficient = sign > 0 ? l->coefficient * r->coefficient : l->coefficient / r->coefficient;
    if (!std::isfinite(l->coefficient)) {
        return std::nullopt;
    }
    for (auto const& [name, k] : r->exponents) {
        auto& slot = l->exponents[name];
        slot += sign * k;
        if (std::abs(slot) > max_exponent) {
            return std::nullopt;
        }
        if (slot == 0) {
            l->exponents.erase(name);
        }
    }
    return l;
}

Expression product(Expression acc, std::string const& name, int count)
{
    for (int i = 0; i < count; ++i) {
        acc = Expression::binary(Op::mul, std::move(acc), Expression::feature(name));
    }
    return acc;
}

// c * f1 * f2 / (g1 * g2), features in name order
Expression from_monomial(Monomial const& m)
{
    if (m.coefficient == 0.0 || m.exponents.empty()) {
        return Expression::constant(m.coefficient);
    }
    std::optional<Expression> num;
    std::optional<Expression> den;
    for (auto const& [name, k] : m.exponents) {
        auto& side = k > 0 ? num : den;
        auto const count = std::abs(k);
        if (!side) {
            side = product(Expression::feature(name), name, count - 1);
        } else {
            side = product(*side, name, count);
        }
    }
    if (!num) {
        return Expression::binary(Op::div, Expression::constant(m.coefficient), *den);
    }
    if (m.coefficient != 1.0) {
        // c * (f1 * f2) keeps the constant first under the operand order
        num = Expression::binary(Op::mul, Expression::constant(m.coefficient), *num);
    }
    return den ? Expression::binary(Op::div, *num, *den) : *num;
}

Expression normalize_monomial(Expression const& e)
{
    if (auto m = as_monomial(e)) {
        return from_monomial(*m);
    }
    return e;
}

// c1*x + c2*x -> (c1 + c2)*x for monomials over the same features
std::optional<Expression> merge_like_terms(Op op, Expression const& l, Expression const& r)
{
    auto a = as_monomial(l);
    auto b = as_monomial(r);
    if (!a || !b || a->exponents.empty() || a->exponents != b->exponents) {
        return std::nullopt;
    }
    a->coefficient = op == Op::add ? a->coefficient + b->coefficient : a->coefficient - b->coefficient;
    if (!std::isfinite(a->coefficient)) {
        return std::nullopt;
    }
    return from_monomial(*a);
}

Expression combine_raw(Op op, Expression l, Expression r);

// Builds op(l, r) from canonical operands, keeping the result canonical.
Expression combine(Op op, Expression l, Expression r)
{
    if ((op == Op::add || op == Op::sub) && !l.is_constant() && !r.is_constant()) {
        if (auto merged = merge_like_terms(op, l, r)) {
            return *merged;
        }
    }
    auto out = combine_raw(op, std::move(l), std::move(r));
    if (out.kind() == Expression::Kind::binary && (out.op() == Op::mul || out.op() == Op::div)) {
        return normalize_monomial(out);
    }
    return out;
}

Expression combine_raw(Op op, Expression l, Expression r)
{
    if (l.is_constant() && r.is_constant()) {
        return fold(op, l.value(), r.value());
    }

    switch (op) {
    case Op::add:
        if (is_const(l, 0.0)) return r;
        if (is_const(r, 0.0)) return l;
        break;
    case Op::sub:
        if (is_const(r, 0.0)) return l;
        if (is_const(l, 0.0)) return combine(Op::mul, Expression::constant(-1.0), std::move(r));
        if (l == r) return Expression::constant(0.0);
        break;
    case Op::mul:
        if (is_const(l, 0.0) || is_const(r, 0.0)) return Expression::constant(0.0);
        if (is_const(l, 1.0)) return r;
        if (is_const(r, 1.0)) return l;
        break;
    case Op::div:
        if (is_const(r, 1.0)) return l;
        if (l == r) return Expression::constant(1.0);
        break;
    case Op::pow:
        if (is_const(r, 1.0)) return l;
        if (is_const(r, 0.0)) return Expression::constant(1.0);
        break;
    case Op::ln:
        break;
    }

    if (op == Op::add || op == Op::mul) {
        if (ordered_before(r, l)) {
            std::swap(l, r);
        }
        // c1 op (c2 op x) -> (c1 op c2) op x
        if (l.is_constant() && r.kind() == Expression::Kind::binary && r.op() == op && r.left().is_constant()) {
            auto merged = fold(op, l.value(), r.left().value());
            return combine(op, std::move(merged), r.right());
        }
    }
    return Expression::binary(op, std::move(l), std::move(r));
}

// Floors constants in additive positions; factors of a product or quotient
// with features keep their value (2*m/4 stays m/2).
Expression floor_constants(Expression const& e, bool factor = false)
{
    switch (e.kind()) {
    case Expression::Kind::constant: {
        auto v = e.value();
        return factor || v == std::floor(v) ? e : Expression::constant(std::floor(v));
    }
    case Expression::Kind::feature: return e;
    case Expression::Kind::unary: return Expression::unary(e.op(), floor_constants(e.left()));
    case Expression::Kind::binary: {
        auto const product = (e.op() == Op::mul || e.op() == Op::div) && !is_constant_expression(e);
        return Expression::binary(e.op(), floor_constants(e.left(), product), floor_constants(e.right(), product));
    }
    }
    return e;
}

Expression drop_additive_constants(Expression const& e)
{
    if (e.kind() == Expression::Kind::unary) {
        return Expression::unary(e.op(), drop_additive_constants(e.left()));
    }
    if (e.kind() != Expression::Kind::binary) {
        return e;
    }
    auto l = drop_additive_constants(e.left());
    auto r = drop_additive_constants(e.right());
    auto const lc = is_constant_expression(l);
    auto const rc = is_constant_expression(r);
    if (e.op() == Op::add && lc != rc) {
        return lc ? r : l;
    }
    if (e.op() == Op::sub && lc != rc) {
        return rc ? l : Expression::binary(Op::mul, Expression::constant(-1.0), r);
    }
    return Expression::binary(e.op(), std::move(l), std::move(r));
}

} // namespace

Expression canonicalize(Expression const& e)
{
    switch (e.kind()) {
    case Expression::Kind::constant:
    case Expression::Kind::feature: return e;
    case Expression::Kind::unary: {
        auto arg = canonicalize(e.left());
        auto node = Expression::unary(e.op(), arg);
        return arg.is_constant() ? Expression::constant(evaluate(node, {})) : node;
    }
    case Expression::Kind::binary: return combine(e.op(), canonicalize(e.left()), canonicalize(e.right()));
    }
    return e;
}

Expression to_rls_form(Expression const& e)
{
    return canonicalize(floor_constants(canonicalize(e)));
}

Expression to_ea_form(Expression const& e)
{
    auto c = canonicalize(e);
    if (is_constant_expression(c)) {
        return c;
    }
    // dropping can expose new additive constants, e.g. a zero from merged terms
    for (int pass = 0; pass < 8; ++pass) {
        auto next = canonicalize(drop_additive_constants(c));
        if (next == c || is_constant_expression(next)) {
            return next;
        }
        c = std::move(next);
    }
    return c;
}

} // namespace featune::expr
