#include "perpetua/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>
#include <vector>

namespace perpetua {
namespace detail {

enum class Kind {
    Constant,
    Var,
    Param,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Abs,
    Min,
    Max
};

struct Node {
    Kind kind;
    double value = 0.0;  // Constant
    std::string name;    // Param
    NodePtr a, b;
};

namespace {

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Constant;
    n->value = v;
    return n;
}

NodePtr make_param(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Param;
    n->name = std::move(name);
    return n;
}

bool is_const(const NodePtr& n, double v) {
    return n->kind == Kind::Constant && n->value == v;
}

// ---------------------------------------------------------------------------
// Printing

int precedence(Kind k) {
    switch (k) {
        case Kind::Add:
        case Kind::Sub: return 1;
        case Kind::Mul:
        case Kind::Div: return 2;
        case Kind::Neg: return 3;
        case Kind::Pow: return 4;
        default: return 5;  // atoms and function calls
    }
}

void print(const Node& n, std::string& out);

void print_child(const NodePtr& c, int parent_prec, bool assoc_ok, std::string& out) {
    bool parens = precedence(c->kind) < parent_prec ||
                  (precedence(c->kind) == parent_prec && !assoc_ok);
    if (parens) out += '(';
    print(*c, out);
    if (parens) out += ')';
}

void print_call(const char* name, const Node& n, std::string& out) {
    out += name;
    out += '(';
    print(*n.a, out);
    if (n.b) {
        out += ", ";
        print(*n.b, out);
    }
    out += ')';
}

void print(const Node& n, std::string& out) {
    switch (n.kind) {
        case Kind::Constant: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            out += buf;
            break;
        }
        case Kind::Var: out += 'x'; break;
        case Kind::Param: out += n.name; break;
        case Kind::Add:
            print_child(n.a, 1, true, out);
            out += " + ";
            print_child(n.b, 1, false, out);
            break;
        case Kind::Sub:
            print_child(n.a, 1, true, out);
            out += " - ";
            print_child(n.b, 1, false, out);
            break;
        case Kind::Mul:
            print_child(n.a, 2, true, out);
            out += "*";
            print_child(n.b, 2, false, out);
            break;
        case Kind::Div:
            print_child(n.a, 2, true, out);
            out += "/";
            print_child(n.b, 2, false, out);
            break;
        case Kind::Neg:
            out += '-';
            print_child(n.a, 3, true, out);
            break;
        case Kind::Pow:
            print_child(n.a, 5, true, out);  // parenthesize any compound base
            out += '^';
            print_child(n.b, 3, true, out);  // exponent may be -atom or a^b
            break;
        case Kind::Exp: print_call("exp", n, out); break;
        case Kind::Log: print_call("log", n, out); break;
        case Kind::Sqrt: print_call("sqrt", n, out); break;
        case Kind::Sin: print_call("sin", n, out); break;
        case Kind::Cos: print_call("cos", n, out); break;
        case Kind::Abs: print_call("abs", n, out); break;
        case Kind::Min: print_call("min", n, out); break;
        case Kind::Max: print_call("max", n, out); break;
    }
}

std::string to_string(const NodePtr& n) {
    std::string s;
    print(*n, s);
    return s;
}

// ---------------------------------------------------------------------------
// Evaluation

double eval_node(const Node& n, double x, const Bindings* params, bool checked) {
    auto ev = [&](const NodePtr& c) { return eval_node(*c, x, params, checked); };
    double r = 0.0;
    switch (n.kind) {
        case Kind::Constant: return n.value;
        case Kind::Var: return x;
        case Kind::Param: {
            if (params) {
                auto it = params->find(n.name);
                if (it != params->end()) return it->second;
            }
            if (checked) throw EvalError("unbound parameter", n.name);
            return std::nan("");
        }
        case Kind::Add: r = ev(n.a) + ev(n.b); break;
        case Kind::Sub: r = ev(n.a) - ev(n.b); break;
        case Kind::Mul: r = ev(n.a) * ev(n.b); break;
        case Kind::Div: {
            double num = ev(n.a), den = ev(n.b);
            if (checked && den == 0.0)
                throw EvalError("division by zero", to_string(n.b));
            r = num / den;
            break;
        }
        case Kind::Pow: {
            double base = ev(n.a), e = ev(n.b);
            double ip;
            if (std::modf(e, &ip) == 0.0 && std::fabs(e) <= 64.0) {
                // exact integer exponent: cheaper and defined for base<0
                long k = static_cast<long>(ip);
                double b = k < 0 ? 1.0 / base : base;
                unsigned long m = static_cast<unsigned long>(k < 0 ? -k : k);
                r = 1.0;
                while (m) {
                    if (m & 1) r *= b;
                    b *= b;
                    m >>= 1;
                }
            } else {
                r = std::pow(base, e);
            }
            break;
        }
        case Kind::Neg: r = -ev(n.a); break;
        case Kind::Exp: r = std::exp(ev(n.a)); break;
        case Kind::Log: {
            double a = ev(n.a);
            if (checked && a <= 0.0)
                throw EvalError("log of non-positive value", to_string(n.a));
            r = std::log(a);
            break;
        }
        case Kind::Sqrt: {
            double a = ev(n.a);
            if (checked && a < 0.0)
                throw EvalError("sqrt of negative value", to_string(n.a));
            r = std::sqrt(a);
            break;
        }
        case Kind::Sin: r = std::sin(ev(n.a)); break;
        case Kind::Cos: r = std::cos(ev(n.a)); break;
        case Kind::Abs: r = std::fabs(ev(n.a)); break;
        case Kind::Min: r = std::fmin(ev(n.a), ev(n.b)); break;
        case Kind::Max: r = std::fmax(ev(n.a), ev(n.b)); break;
    }
    if (checked && std::isnan(r)) {
        std::string where;
        print(n, where);
        throw EvalError("NaN result", where);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Simplification: constant folding and 0/1 identities.

NodePtr simplify(const NodePtr& n);

NodePtr fold_binary(const Node& n, const NodePtr& a, const NodePtr& b) {
    Node tmp = n;
    tmp.a = a;
    tmp.b = b;
    if (a->kind == Kind::Constant && (!b || b->kind == Kind::Constant)) {
        double v = eval_node(tmp, 0.0, nullptr, false);
        if (std::isfinite(v)) return make_const(v);
    }
    switch (n.kind) {
        case Kind::Add:
            if (is_const(a, 0.0)) return b;
            if (is_const(b, 0.0)) return a;
            break;
        case Kind::Sub:
            if (is_const(b, 0.0)) return a;
            if (is_const(a, 0.0)) return make(Kind::Neg, b);
            break;
        case Kind::Mul:
            if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
            if (is_const(a, 1.0)) return b;
            if (is_const(b, 1.0)) return a;
            if (is_const(a, -1.0)) return make(Kind::Neg, b);
            if (is_const(b, -1.0)) return make(Kind::Neg, a);
            break;
        case Kind::Div:
            if (is_const(b, 1.0)) return a;
            if (is_const(a, 0.0) && !is_const(b, 0.0)) return make_const(0.0);
            break;
        case Kind::Pow:
            if (is_const(b, 1.0)) return a;
            if (is_const(b, 0.0)) return make_const(1.0);
            break;
        case Kind::Neg:
            if (a->kind == Kind::Neg) return a->a;
            break;
        default: break;
    }
    return std::make_shared<Node>(tmp);
}

NodePtr simplify(const NodePtr& n) {
    if (!n->a) return n;
    NodePtr a = simplify(n->a);
    NodePtr b = n->b ? simplify(n->b) : nullptr;
    return fold_binary(*n, a, b);
}

// ---------------------------------------------------------------------------
// Differentiation

NodePtr diff(const NodePtr& n) {
    switch (n->kind) {
        case Kind::Constant:
        case Kind::Param: return make_const(0.0);
        case Kind::Var: return make_const(1.0);
        case Kind::Add: return make(Kind::Add, diff(n->a), diff(n->b));
        case Kind::Sub: return make(Kind::Sub, diff(n->a), diff(n->b));
        case Kind::Mul:
            return make(Kind::Add, make(Kind::Mul, diff(n->a), n->b),
                        make(Kind::Mul, n->a, diff(n->b)));
        case Kind::Div:
            // (u'v - uv') / v^2
            return make(Kind::Div,
                        make(Kind::Sub, make(Kind::Mul, diff(n->a), n->b),
                             make(Kind::Mul, n->a, diff(n->b))),
                        make(Kind::Pow, n->b, make_const(2.0)));
        case Kind::Pow: {
            const NodePtr& u = n->a;
            const NodePtr& v = n->b;
            if (v->kind == Kind::Constant) {
                // c * u^(c-1) * u'
                return make(Kind::Mul, make_const(v->value),
                            make(Kind::Mul,
                                 make(Kind::Pow, u, make_const(v->value - 1.0)),
                                 diff(u)));
            }
            if (u->kind == Kind::Constant) {
                // a^v * log(a) * v'
                return make(Kind::Mul, n,
                            make(Kind::Mul, make(Kind::Log, u), diff(v)));
            }
            // u^v * (v' log u + v u'/u)
            return make(Kind::Mul, n,
                        make(Kind::Add, make(Kind::Mul, diff(v), make(Kind::Log, u)),
                             make(Kind::Div, make(Kind::Mul, v, diff(u)), u)));
        }
        case Kind::Neg: return make(Kind::Neg, diff(n->a));
        case Kind::Exp: return make(Kind::Mul, n, diff(n->a));
        case Kind::Log: return make(Kind::Div, diff(n->a), n->a);
        case Kind::Sqrt:
            return make(Kind::Div, diff(n->a),
                        make(Kind::Mul, make_const(2.0), n));
        case Kind::Sin: return make(Kind::Mul, make(Kind::Cos, n->a), diff(n->a));
        case Kind::Cos:
            return make(Kind::Neg, make(Kind::Mul, make(Kind::Sin, n->a), diff(n->a)));
        case Kind::Abs:
        case Kind::Min:
        case Kind::Max:
            throw NonDifferentiableError("cannot differentiate '" + to_string(n) +
                                         "': abs/min/max are not differentiable everywhere");
    }
    throw NonDifferentiableError("unreachable");
}

// ---------------------------------------------------------------------------
// Parser. Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | atom ('^' factor)?
//   atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
// '^' binds tighter than unary minus, so "-x^2" is -(x^2) while exponents may
// themselves be negated: "x^-4".

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr run() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) {
        throw ParseError("syntax error at offset " + std::to_string(pos_) + ": " + what,
                         pos_);
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    NodePtr expr() {
        NodePtr e = term();
        for (;;) {
            if (eat('+'))
                e = make(Kind::Add, e, term());
            else if (eat('-'))
                e = make(Kind::Sub, e, term());
            else
                return e;
        }
    }

    NodePtr term() {
        NodePtr e = factor();
        for (;;) {
            if (eat('*'))
                e = make(Kind::Mul, e, factor());
            else if (eat('/'))
                e = make(Kind::Div, e, factor());
            else
                return e;
        }
    }

    NodePtr factor() {
        if (eat('-')) return make(Kind::Neg, factor());
        NodePtr base = atom();
        if (eat('^')) return make(Kind::Pow, base, factor());
        return base;
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        double v = 0.0;
        auto res = std::from_chars(begin, end, v);
        if (res.ec != std::errc{}) fail("malformed number");
        pos_ = static_cast<std::size_t>(res.ptr - text_.data());
        return make_const(v);
    }

    NodePtr identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (peek() == '(') {
            eat('(');
            std::vector<NodePtr> args;
            args.push_back(expr());
            while (eat(',')) args.push_back(expr());
            if (!eat(')')) fail("expected ')'");
            return call(name, args, start);
        }
        if (name == "x") return make(Kind::Var);
        return make_param(std::move(name));
    }

    NodePtr call(const std::string& name, const std::vector<NodePtr>& args,
                 std::size_t at) {
        auto unary = [&](Kind k) {
            if (args.size() != 1) {
                pos_ = at;
                fail(name + " expects 1 argument");
            }
            return make(k, args[0]);
        };
        auto binary = [&](Kind k) {
            if (args.size() != 2) {
                pos_ = at;
                fail(name + " expects 2 arguments");
            }
            return make(k, args[0], args[1]);
        };
        if (name == "exp") return unary(Kind::Exp);
        if (name == "log") return unary(Kind::Log);
        if (name == "sqrt") return unary(Kind::Sqrt);
        if (name == "sin") return unary(Kind::Sin);
        if (name == "cos") return unary(Kind::Cos);
        if (name == "abs") return unary(Kind::Abs);
        if (name == "min") return binary(Kind::Min);
        if (name == "max") return binary(Kind::Max);
        pos_ = at;
        fail("unknown function '" + name + "'");
    }
};

// ---------------------------------------------------------------------------
// Tree queries

bool any_node(const NodePtr& n, bool (*pred)(const Node&)) {
    if (pred(*n)) return true;
    if (n->a && any_node(n->a, pred)) return true;
    if (n->b && any_node(n->b, pred)) return true;
    return false;
}

NodePtr substitute(const NodePtr& n, const Bindings* params, const NodePtr* var_repl) {
    switch (n->kind) {
        case Kind::Constant: return n;
        case Kind::Var: return var_repl ? *var_repl : n;
        case Kind::Param:
            if (params) {
                auto it = params->find(n->name);
                if (it != params->end()) return make_const(it->second);
            }
            return n;
        default: {
            Node tmp = *n;
            tmp.a = substitute(n->a, params, var_repl);
            tmp.b = n->b ? substitute(n->b, params, var_repl) : nullptr;
            return std::make_shared<Node>(tmp);
        }
    }
}

}  // namespace
}  // namespace detail

using detail::Kind;
using detail::Node;
using detail::NodePtr;

Expression::Expression() : root_(detail::make_const(0.0)) {}
Expression::Expression(NodePtr root) : root_(std::move(root)) {}

Expression Expression::parse(std::string_view text) {
    detail::Parser p(text);
    return Expression(p.run());
}

double Expression::eval(double x) const { return detail::eval_node(*root_, x, nullptr, true); }

double Expression::eval(double x, const Bindings& params) const {
    return detail::eval_node(*root_, x, &params, true);
}

double Expression::eval_raw(double x) const noexcept {
    return detail::eval_node(*root_, x, nullptr, false);
}

Expression Expression::differentiate() const {
    return Expression(detail::simplify(detail::diff(root_)));
}

Expression Expression::simplified() const { return Expression(detail::simplify(root_)); }

Expression Expression::bind(const Bindings& params) const {
    return Expression(detail::simplify(detail::substitute(root_, &params, nullptr)));
}

Expression Expression::substitute_var(const Expression& replacement) const {
    return Expression(detail::substitute(root_, nullptr, &replacement.root_));
}

std::string Expression::str() const { return detail::to_string(root_); }

bool Expression::is_constant() const { return root_->kind == Kind::Constant; }

bool Expression::has_unbound_params() const {
    return detail::any_node(root_, [](const Node& n) { return n.kind == Kind::Param; });
}

bool Expression::differentiable() const {
    return !detail::any_node(root_, [](const Node& n) {
        return n.kind == Kind::Abs || n.kind == Kind::Min || n.kind == Kind::Max;
    });
}

Expression Expression::constant(double v) { return Expression(detail::make_const(v)); }
Expression Expression::variable() { return Expression(detail::make(Kind::Var)); }
Expression Expression::parameter(const std::string& name) {
    return Expression(detail::make_param(name));
}

Expression operator+(Expression a, Expression b) {
    return Expression(detail::make(Kind::Add, a.root_, b.root_));
}
Expression operator-(Expression a, Expression b) {
    return Expression(detail::make(Kind::Sub, a.root_, b.root_));
}
Expression operator*(Expression a, Expression b) {
    return Expression(detail::make(Kind::Mul, a.root_, b.root_));
}
Expression operator/(Expression a, Expression b) {
    return Expression(detail::make(Kind::Div, a.root_, b.root_));
}
Expression operator-(Expression a) { return Expression(detail::make(Kind::Neg, a.root_)); }
Expression pow(Expression base, Expression exponent) {
    return Expression(detail::make(Kind::Pow, base.root_, exponent.root_));
}
Expression exp(Expression a) { return Expression(detail::make(Kind::Exp, a.root_)); }
Expression log(Expression a) { return Expression(detail::make(Kind::Log, a.root_)); }
Expression sqrt(Expression a) { return Expression(detail::make(Kind::Sqrt, a.root_)); }
Expression sin(Expression a) { return Expression(detail::make(Kind::Sin, a.root_)); }
Expression cos(Expression a) { return Expression(detail::make(Kind::Cos, a.root_)); }
Expression abs(Expression a) { return Expression(detail::make(Kind::Abs, a.root_)); }
Expression min(Expression a, Expression b) {
    return Expression(detail::make(Kind::Min, a.root_, b.root_));
}
Expression max(Expression a, Expression b) {
    return Expression(detail::make(Kind::Max, a.root_, b.root_));
}

}  // namespace perpetua
