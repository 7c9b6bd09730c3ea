#include "featune/expression.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>

namespace featune::expr {

namespace {

std::shared_ptr<Node> make_node(Expression::Kind kind)
{
    auto node = std::make_shared<Node>();
    node->kind = kind;
    return node;
}

double saturate(double x) noexcept
{
    if (std::isnan(x)) {
        return 1.0;
    }
    if (std::isinf(x)) {
        return std::copysign(std::numeric_limits<double>::max(), x);
    }
    return x;
}

double apply(Op op, double a, double b) noexcept
{
    switch (op) {
    case Op::add: return saturate(a + b);
    case Op::sub: return saturate(a - b);
    case Op::mul: return saturate(a * b);
    case Op::div: return b == 0.0 ? 1.0 : saturate(a / b);
    case Op::pow: return saturate(std::pow(a, b));
    case Op::ln: return a == 0.0 ? 0.0 : saturate(std::log(std::fabs(a)));
    }
    return 1.0;
}

int precedence(Expression const& e) noexcept
{
    if (e.kind() != Expression::Kind::binary) {
        return 4;
    }
    switch (e.op()) {
    case Op::add:
    case Op::sub: return 1;
    case Op::mul:
    case Op::div: return 2;
    default: return 3;
    }
}

char symbol(Op op) noexcept
{
    switch (op) {
    case Op::add: return '+';
    case Op::sub: return '-';
    case Op::mul: return '*';
    case Op::div: return '/';
    case Op::pow: return '^';
    case Op::ln: return '?';
    }
    return '?';
}

void format_into(Expression const& e, std::string& out);

void format_operand(Expression const& child, bool parens, std::string& out)
{
    if (parens) {
        out += '(';
    }
    format_into(child, out);
    if (parens) {
        out += ')';
    }
}

void format_into(Expression const& e, std::string& out)
{
    switch (e.kind()) {
    case Expression::Kind::constant:
        out += format_number(e.value());
        return;
    case Expression::Kind::feature:
        out += e.name();
        return;
    case Expression::Kind::unary:
        out += "ln(";
        format_into(e.left(), out);
        out += ')';
        return;
    case Expression::Kind::binary:
        break;
    }

    auto const p = precedence(e);
    auto const negative = [](Expression const& c) { return c.is_constant() && std::signbit(c.value()); };
    bool left_parens = precedence(e.left()) < p;
    bool right_parens = precedence(e.right()) <= p || negative(e.right());
    if (e.op() == Op::pow) {
        // both operands of '^' are atoms in the grammar
        left_parens = precedence(e.left()) < 4 || negative(e.left());
        right_parens = precedence(e.right()) < 4 || negative(e.right());
    }

    format_operand(e.left(), left_parens, out);
    if (p == 1) {
        out += ' ';
        out += symbol(e.op());
        out += ' ';
    } else {
        out += symbol(e.op());
    }
    format_operand(e.right(), right_parens, out);
}

void collect_features(Expression const& e, std::set<std::string>& out)
{
    if (e.is_feature()) {
        out.insert(e.name());
        return;
    }
    if (e.kind() == Expression::Kind::binary) {
        collect_features(e.left(), out);
        collect_features(e.right(), out);
    } else if (e.kind() == Expression::Kind::unary) {
        collect_features(e.left(), out);
    }
}

} // namespace

Expression Expression::constant(double value)
{
    auto node = make_node(Kind::constant);
    node->value = value == 0.0 ? 0.0 : value; // no negative zero
    return Expression(std::move(node));
}

Expression Expression::feature(std::string name)
{
    auto node = make_node(Kind::feature);
    node->name = std::move(name);
    return Expression(std::move(node));
}

Expression Expression::binary(Op op, Expression left, Expression right)
{
    if (op == Op::ln) {
        throw std::invalid_argument("ln is a unary operator");
    }
    auto node = make_node(Kind::binary);
    node->op = op;
    node->size = 1 + left.size() + right.size();
    node->depth = 1 + std::max(left.depth(), right.depth());
    node->children = { std::move(left), std::move(right) };
    return Expression(std::move(node));
}

Expression Expression::unary(Op op, Expression operand)
{
    if (op != Op::ln) {
        throw std::invalid_argument("only ln is unary");
    }
    auto node = make_node(Kind::unary);
    node->op = op;
    node->size = 1 + operand.size();
    node->depth = 1 + operand.depth();
    node->children = { std::move(operand) };
    return Expression(std::move(node));
}

Expression::Kind Expression::kind() const noexcept { return node_->kind; }
double Expression::value() const noexcept { return node_->value; }
std::string const& Expression::name() const noexcept { return node_->name; }
Op Expression::op() const noexcept { return node_->op; }
Expression const& Expression::left() const noexcept { return node_->children.front(); }
Expression const& Expression::right() const noexcept { return node_->children.back(); }
std::size_t Expression::size() const noexcept { return node_->size; }
std::size_t Expression::depth() const noexcept { return node_->depth; }

bool operator==(Expression const& a, Expression const& b) noexcept
{
    if (a.node_ == b.node_) {
        return true;
    }
    if (a.kind() != b.kind() || a.size() != b.size()) {
        return false;
    }
    switch (a.kind()) {
    case Expression::Kind::constant:
        return std::bit_cast<std::uint64_t>(a.value()) == std::bit_cast<std::uint64_t>(b.value());
    case Expression::Kind::feature:
        return a.name() == b.name();
    case Expression::Kind::unary:
        return a.op() == b.op() && a.left() == b.left();
    case Expression::Kind::binary:
        return a.op() == b.op() && a.left() == b.left() && a.right() == b.right();
    }
    return false;
}

void FeatureEnvironment::bind(std::string name, double value)
{
    values_.insert_or_assign(std::move(name), value);
}

bool FeatureEnvironment::contains(std::string_view name) const
{
    return values_.find(name) != values_.end();
}

double FeatureEnvironment::at(std::string_view name) const
{
    auto it = values_.find(name);
    if (it == values_.end()) {
        throw EvaluationError("unbound feature '" + std::string(name) + "'");
    }
    return it->second;
}

double evaluate(Expression const& e, FeatureEnvironment const& env)
{
    switch (e.kind()) {
    case Expression::Kind::constant: return e.value();
    case Expression::Kind::feature: return env.at(e.name());
    case Expression::Kind::unary: return apply(e.op(), evaluate(e.left(), env), 0.0);
    case Expression::Kind::binary:
        return apply(e.op(), evaluate(e.left(), env), evaluate(e.right(), env));
    }
    return 1.0;
}

std::set<std::string> features_of(Expression const& e)
{
    std::set<std::string> out;
    collect_features(e, out);
    return out;
}

bool is_constant_expression(Expression const& e)
{
    switch (e.kind()) {
    case Expression::Kind::constant: return true;
    case Expression::Kind::feature: return false;
    case Expression::Kind::unary: return is_constant_expression(e.left());
    case Expression::Kind::binary: return is_constant_expression(e.left()) && is_constant_expression(e.right());
    }
    return false;
}

bool is_gp_expression(Expression const& e)
{
    switch (e.kind()) {
    case Expression::Kind::constant:
    case Expression::Kind::feature: return true;
    case Expression::Kind::unary: return false;
    case Expression::Kind::binary:
        return e.op() != Op::pow && is_gp_expression(e.left()) && is_gp_expression(e.right());
    }
    return false;
}

std::string format_number(double value)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

std::string format(Expression const& e)
{
    std::string out;
    format_into(e, out);
    return out;
}

Expression const& subtree_at(Expression const& e, std::size_t index)
{
    if (index >= e.size()) {
        throw std::out_of_range("subtree index out of range");
    }
    Expression const* cur = &e;
    while (index > 0) {
        --index; // step past the current node
        auto const& l = cur->left();
        if (index < l.size()) {
            cur = &l;
        } else {
            index -= l.size();
            cur = &cur->right();
        }
    }
    return *cur;
}

std::size_t depth_at(Expression const& e, std::size_t index)
{
    if (index >= e.size()) {
        throw std::out_of_range("subtree index out of range");
    }
    std::size_t d = 1;
    Expression const* cur = &e;
    while (index > 0) {
        --index;
        ++d;
        auto const& l = cur->left();
        if (index < l.size()) {
            cur = &l;
        } else {
            index -= l.size();
            cur = &cur->right();
        }
    }
    return d;
}

Expression replace_subtree(Expression const& e, std::size_t index, Expression replacement)
{
    if (index >= e.size()) {
        throw std::out_of_range("subtree index out of range");
    }
    if (index == 0) {
        return replacement;
    }
    auto const rest = index - 1;
    if (e.kind() == Expression::Kind::unary) {
        return Expression::unary(e.op(), replace_subtree(e.left(), rest, std::move(replacement)));
    }
    auto const& l = e.left();
    if (rest < l.size()) {
        return Expression::binary(e.op(), replace_subtree(l, rest, std::move(replacement)), e.right());
    }
    return Expression::binary(e.op(), l, replace_subtree(e.right(), rest - l.size(), std::move(replacement)));
}

} // namespace featune::expr
