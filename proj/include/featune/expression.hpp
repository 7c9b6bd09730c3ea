#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace featune::expr {

enum class Op : unsigned char { add, sub, mul, div, pow, ln };

/// gp: the evolved language ({+,-,*,/}, numbers, features).
/// budget: gp plus '^', ln(.) and the constant e.
enum class Dialect : unsigned char { gp, budget };

inline constexpr double euler = 2.718281828459045;

class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Node;

/// Immutable arithmetic expression tree. Copies share structure.
class Expression {
public:
    enum class Kind : unsigned char { constant, feature, binary, unary };

    static Expression constant(double value);
    static Expression feature(std::string name);
    static Expression binary(Op op, Expression left, Expression right);
    static Expression unary(Op op, Expression operand);

    Kind kind() const noexcept;
    bool is_constant() const noexcept { return kind() == Kind::constant; }
    bool is_feature() const noexcept { return kind() == Kind::feature; }
    bool is_leaf() const noexcept { return is_constant() || is_feature(); }

    double value() const noexcept;            // constant only
    std::string const& name() const noexcept; // feature only
    Op op() const noexcept;                   // binary/unary only
    Expression const& left() const noexcept;  // binary: left operand, unary: operand
    Expression const& right() const noexcept; // binary only

    std::size_t size() const noexcept;
    std::size_t depth() const noexcept;

    /// Structural equality (constants compared bitwise by value).
    friend bool operator==(Expression const& a, Expression const& b) noexcept;

private:
    explicit Expression(std::shared_ptr<Node const> node) : node_(std::move(node)) {}
    std::shared_ptr<Node const> node_;
};

struct Node {
    Expression::Kind kind;
    Op op = Op::add;
    double value = 0.0;
    std::string name;
    std::vector<Expression> children;
    std::size_t size = 1;
    std::size_t depth = 1;
};

/// Feature bindings for one instance (one row of the feature matrix).
class FeatureEnvironment {
public:
    FeatureEnvironment() = default;
    FeatureEnvironment(std::initializer_list<std::pair<std::string const, double>> init) : values_(init) {}

    void bind(std::string name, double value);
    bool contains(std::string_view name) const;
    double at(std::string_view name) const; // throws EvaluationError when unbound
    std::map<std::string, double, std::less<>> const& values() const noexcept { return values_; }

    friend bool operator==(FeatureEnvironment const&, FeatureEnvironment const&) = default;

private:
    std::map<std::string, double, std::less<>> values_;
};

/// Total evaluation: x/0 = 1, ln(0) = 0, ln(x) = ln|x|, non-finite
/// intermediate results saturate to +/-DBL_MAX (NaN from pow becomes 1).
double evaluate(Expression const& e, FeatureEnvironment const& env);

inline std::size_t size(Expression const& e) noexcept { return e.size(); }
inline std::size_t depth(Expression const& e) noexcept { return e.depth(); }

/// Names of all features referenced by the tree.
std::set<std::string> features_of(Expression const& e);

/// True when the tree contains no feature terminal.
bool is_constant_expression(Expression const& e);

/// True when the tree uses only gp-dialect operators.
bool is_gp_expression(Expression const& e);

/// Infix text with minimal parentheses: "n + 1", "2/n", "1/(n + 1)".
std::string format(Expression const& e);

/// Shortest text that parses back to exactly the same double.
std::string format_number(double value);

// Preorder subtree addressing (root is index 0).
Expression const& subtree_at(Expression const& e, std::size_t index);
std::size_t depth_at(Expression const& e, std::size_t index); // root has depth 1
Expression replace_subtree(Expression const& e, std::size_t index, Expression replacement);

} // namespace featune::expr
