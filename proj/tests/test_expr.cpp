#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "perpetua/expr.hpp"

using perpetua::Bindings;
using perpetua::Expression;

TEST_CASE("parse and eval basics") {
    CHECK(Expression::parse("1/x").eval(2.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(Expression::parse("2*mu*x").eval(2.0, {{"mu", 1.5}}) ==
          doctest::Approx(6.0).epsilon(1e-15));
    CHECK(Expression::parse("x^-4").eval(2.0) == doctest::Approx(0.0625).epsilon(1e-15));
}

TEST_CASE("precedence") {
    // ^ right-assoc, tighter than unary minus, tighter than * /
    CHECK(Expression::parse("2^3^2").eval(0.0) == 512.0);
    CHECK(Expression::parse("-x^2").eval(3.0) == -9.0);
    CHECK(Expression::parse("-2*x").eval(3.0) == -6.0);
    CHECK(Expression::parse("1 - 2 - 3").eval(0.0) == -4.0);
    CHECK(Expression::parse("8/4/2").eval(0.0) == 1.0);
    CHECK(Expression::parse("2*x^2").eval(3.0) == 18.0);
    CHECK(Expression::parse("min(x, 2) + max(x, 2)").eval(5.0) == 7.0);
}

TEST_CASE("parse errors carry the byte offset") {
    CHECK_THROWS_AS(Expression::parse("1 + "), perpetua::ParseError);
    CHECK_THROWS_AS(Expression::parse("foo(x)"), perpetua::ParseError);
    CHECK_THROWS_AS(Expression::parse("(x"), perpetua::ParseError);
    try {
        Expression::parse("1 + @");
    } catch (const perpetua::ParseError& e) {
        CHECK(e.offset() == 4);
    }
}

TEST_CASE("eval domain errors") {
    CHECK_THROWS_AS(Expression::parse("log(x)").eval(-1.0), perpetua::EvalError);
    CHECK_THROWS_AS(Expression::parse("1/(x - 2)").eval(2.0), perpetua::EvalError);
    CHECK_THROWS_AS(Expression::parse("mu*x").eval(1.0), perpetua::EvalError);  // unbound
    // +-inf is propagated, not an error
    CHECK(std::isinf(Expression::parse("exp(x)").eval(1e4)));
}

TEST_CASE("differentiate examples") {
    auto d1 = Expression::parse("x^2").differentiate();
    CHECK(d1.eval(3.0) == doctest::Approx(6.0).epsilon(1e-14));
    auto d2 = Expression::parse("exp(2*x)").differentiate();
    CHECK(d2.eval(0.0) == doctest::Approx(2.0).epsilon(1e-14));

    // d/dx sqrt(f)/sigma with f = x^-4, sigma = 1, at x = 2
    auto g = perpetua::sqrt(Expression::parse("x^-4")) / Expression::parse("1");
    auto dg = g.differentiate();
    CHECK(dg.eval(2.0) == doctest::Approx(-0.25).epsilon(1e-12));
    // central finite difference cross-check
    const double h = 1e-5;
    const double fd = (g.eval(2.0 + h) - g.eval(2.0 - h)) / (2 * h);
    CHECK(dg.eval(2.0) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("differentiate rejects abs/min/max") {
    CHECK_THROWS_AS(Expression::parse("abs(x)").differentiate(),
                    perpetua::NonDifferentiableError);
    CHECK_THROWS_AS(Expression::parse("min(x, 1)").differentiate(),
                    perpetua::NonDifferentiableError);
    CHECK(Expression::parse("abs(x)").differentiable() == false);
    CHECK(Expression::parse("x^2").differentiable() == true);
}

TEST_CASE("bind substitutes parameters and folds") {
    auto e = Expression::parse("(delta - 1)/(2*x)");
    auto b = e.bind({{"delta", 3.0}});
    CHECK_FALSE(b.has_unbound_params());
    CHECK(b.eval(2.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("substitute variable composes expressions") {
    auto g = Expression::parse("exp(-x)");
    auto comp = g.substitute_var(Expression::parse("log(x)"));
    CHECK(comp.eval(4.0) == doctest::Approx(0.25).epsilon(1e-12));
}

namespace {

// Random domain-safe expressions: polynomials in x combined with exp/log/sqrt
// of arguments kept strictly positive by construction.
Expression random_expr(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 7);
    std::uniform_real_distribution<double> coef(0.2, 2.5);
    switch (pick(rng)) {
        case 0: return Expression::constant(coef(rng));
        case 1: return Expression::variable();
        case 2: return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
        case 3: return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
        case 4: return Expression::constant(coef(rng)) * random_expr(rng, depth - 1);
        case 5: return perpetua::exp(Expression::constant(-coef(rng)) * Expression::variable());
        case 6: {
            auto inner = random_expr(rng, depth - 1);
            return perpetua::log(Expression::constant(2.0) + inner * inner);
        }
        default: {
            auto inner = random_expr(rng, depth - 1);
            return perpetua::sqrt(Expression::constant(1.0) + inner * inner);
        }
    }
}

}  // namespace

TEST_CASE("property: derivative matches central finite differences") {
    std::mt19937_64 rng(20240811u);
    std::uniform_real_distribution<double> xs(0.3, 3.0);
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
        Expression e = random_expr(rng, 3);
        Expression de = e.differentiate();
        for (int j = 0; j < 4; ++j) {
            const double x = xs(rng);
            const double h = 1e-5;
            const double fd = (e.eval(x + h) - e.eval(x - h)) / (2 * h);
            const double an = de.eval(x);
            if (std::fabs(fd) > 1e6) continue;  // skip wildly scaled samples
            CHECK(an == doctest::Approx(fd).epsilon(1e-6).scale(std::fabs(an) + 1.0));
            ++checked;
        }
    }
    CHECK(checked > 500);
}

TEST_CASE("property: parse-print-parse is stable") {
    std::mt19937_64 rng(7u);
    for (int i = 0; i < 200; ++i) {
        Expression e = random_expr(rng, 3);
        const std::string s1 = e.str();
        Expression e2 = Expression::parse(s1);
        const std::string s2 = e2.str();
        CHECK(s1 == s2);
        // and printed forms evaluate identically
        const double x = 1.37;
        CHECK(e.eval(x) == doctest::Approx(e2.eval(x)).epsilon(1e-14));
    }
    // handwritten sources too
    for (const char* src : {"1/x", "x^-4", "2*mu*x", "-x^2 + min(x, 3)",
                            "exp(-(x - 1)^2/2)", "sqrt(x)/(1 + x^2)"}) {
        const std::string s1 = Expression::parse(src).str();
        CHECK(Expression::parse(s1).str() == s1);
    }
}

TEST_CASE("evaluation is deterministic") {
    auto e = Expression::parse("exp(-x)*sqrt(1 + x^2)/(2 + sin(x))");
    const double a = e.eval(1.234567);
    for (int i = 0; i < 10; ++i) CHECK(e.eval(1.234567) == a);
}
