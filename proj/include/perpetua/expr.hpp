#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace perpetua {

// Thrown on malformed input text; `offset` is the byte position in the source.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : std::runtime_error(msg), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Thrown on evaluation domain errors (log of non-positive, division by zero,
// NaN) and on unbound parameters. `where` names the offending subexpression.
class EvalError : public std::runtime_error {
public:
    EvalError(const std::string& msg, std::string where)
        : std::runtime_error(msg + " in '" + where + "'"), where_(std::move(where)) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

class NonDifferentiableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Bindings = std::map<std::string, double>;

namespace detail {
struct Node;
using NodePtr = std::shared_ptr<const Node>;
}  // namespace detail

// Immutable AST of a real-valued function of one variable `x`, with optional
// named parameters. Safe to share and evaluate concurrently.
class Expression {
public:
    Expression();  // the constant 0

    static Expression parse(std::string_view text);

    // Checked evaluation: throws EvalError on domain errors, NaN results and
    // unbound parameters. +-inf is propagated as a value.
    double eval(double x) const;
    double eval(double x, const Bindings& params) const;

    // Unchecked evaluation for numeric inner loops: IEEE semantics, NaN and
    // inf returned as-is, unbound parameters evaluate to NaN.
    double eval_raw(double x) const noexcept;

    // Analytic derivative d/dx, lightly simplified. Throws
    // NonDifferentiableError if the tree contains abs/min/max.
    Expression differentiate() const;

    // Constant folding plus 0/1 identities.
    Expression simplified() const;

    // Replace listed parameters by constants and fold.
    Expression bind(const Bindings& params) const;

    // Replace the variable x by another expression (composition).
    Expression substitute_var(const Expression& replacement) const;

    std::string str() const;

    bool is_constant() const;
    bool has_unbound_params() const;
    bool differentiable() const;  // no abs/min/max anywhere

    // Builders for programmatic construction.
    static Expression constant(double v);
    static Expression variable();
    static Expression parameter(const std::string& name);

    friend Expression operator+(Expression a, Expression b);
    friend Expression operator-(Expression a, Expression b);
    friend Expression operator*(Expression a, Expression b);
    friend Expression operator/(Expression a, Expression b);
    friend Expression operator-(Expression a);
    friend Expression pow(Expression base, Expression exponent);
    friend Expression exp(Expression a);
    friend Expression log(Expression a);
    friend Expression sqrt(Expression a);
    friend Expression sin(Expression a);
    friend Expression cos(Expression a);
    friend Expression abs(Expression a);
    friend Expression min(Expression a, Expression b);
    friend Expression max(Expression a, Expression b);

private:
    explicit Expression(detail::NodePtr root);
    detail::NodePtr root_;
};

Expression operator+(Expression a, Expression b);
Expression operator-(Expression a, Expression b);
Expression operator*(Expression a, Expression b);
Expression operator/(Expression a, Expression b);
Expression operator-(Expression a);
Expression pow(Expression base, Expression exponent);
Expression exp(Expression a);
Expression log(Expression a);
Expression sqrt(Expression a);
Expression sin(Expression a);
Expression cos(Expression a);
Expression abs(Expression a);
Expression min(Expression a, Expression b);
Expression max(Expression a, Expression b);

}  // namespace perpetua
