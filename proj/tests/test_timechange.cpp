#include <doctest.h>

#include <cmath>

#include "perpetua/catalogue.hpp"
#include "perpetua/criterion.hpp"
#include "perpetua/timechange.hpp"

using namespace perpetua;

TEST_CASE("build_g examples") {
    // bessel(3), f = u^-4: g(u) = 1 - 1/u
    auto tc = transform(catalogue_get("bessel", {{"delta", 3.0}}),
                        Expression::parse("x^-4"));
    CHECK(tc->g(2.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(tc->g(1.0) == 0.0);

    // f = sigma^2 on BM: g = x - x0
    auto id = transform(catalogue_get("bm"), Expression::parse("1"));
    CHECK(id->g(1.7) == doctest::Approx(1.7).epsilon(1e-12));

    // drifted BM, f = e^{-2x}: g = 1 - e^{-x}, g(inf) = 1
    auto dbm = transform(catalogue_get("bm_drift", {{"mu", 1.0}}),
                         Expression::parse("exp(-2*x)"));
    CHECK(dbm->g(1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-9));
    Limit zr = dbm->z_right();
    REQUIRE(zr.is_finite());
    CHECK(zr.value == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("drift_G examples") {
    auto tc = transform(catalogue_get("bessel", {{"delta", 3.0}}),
                        Expression::parse("x^-4"));
    for (double x : {1.0, 2.0, 5.0})
        CHECK(tc->drift_at_x(x) == doctest::Approx(0.0).epsilon(1e-10));

    auto id = transform(catalogue_get("bm"), Expression::parse("1"));
    CHECK(id->drift_at_x(0.3) == doctest::Approx(0.0).epsilon(1e-12));

    auto dbm = transform(catalogue_get("bm_drift", {{"mu", 1.0}}),
                         Expression::parse("exp(-2*x)"));
    for (double x : {0.0, 0.7, 2.0}) {
        CHECK(dbm->drift_at_x(x) == doctest::Approx(0.5 * std::exp(x)).epsilon(1e-10));
        // hand algebra cross-checked by finite differences of g'
        const double h = 1e-6;
        const double gpp_fd = (dbm->g_prime(x + h) - dbm->g_prime(x - h)) / (2 * h);
        const double G_fd =
            (0.5 * gpp_fd + 1.0 * dbm->g_prime(x)) / std::exp(-2.0 * x);
        CHECK(dbm->drift_at_x(x) == doctest::Approx(G_fd).epsilon(1e-4));
    }
}

TEST_CASE("transform assembles Z with the right interval") {
    auto tc = transform(catalogue_get("bessel", {{"delta", 3.0}}),
                        Expression::parse("x^-4"));
    CHECK(tc->z_left().kind == Limit::Kind::MinusInf);
    Limit zr = tc->z_right();
    REQUIRE(zr.is_finite());
    CHECK(zr.value == doctest::Approx(1.0).epsilon(1e-4));

    // identity case: transform of BM with f = sigma^2 is BM again
    auto id = transform(catalogue_get("bm"), Expression::parse("1"));
    CHECK(id->z_left().kind == Limit::Kind::MinusInf);
    CHECK(id->z_right().kind == Limit::Kind::PlusInf);
    CHECK(id->drift(0.9) == 0.0);
}

TEST_CASE("B^Z identity: B^Z(g(x)) - log g'(x) - B^Y(x) constant in x") {
    auto d = catalogue_get("bessel", {{"delta", 3.0}});
    ScaleSpeed ss(d);
    auto tc = transform(d, Expression::parse("x^-4"));
    double c0 = kNaN;
    for (double x : {1.2, 2.0, 5.0}) {
        const double lhs =
            tc->B_Z(tc->g(x)) - std::log(tc->g_prime(x)) - ss.B(x);
        if (std::isnan(c0))
            c0 = lhs;
        else
            CHECK(lhs == doctest::Approx(c0).epsilon(1e-7));
    }
}

TEST_CASE("drift identity along beta") {
    auto d = catalogue_get("bm_drift", {{"mu", 1.0}});
    ScaleSpeed ss(d);
    auto tc = transform(d, Expression::parse("exp(-2*x)"));
    double c0 = kNaN;
    for (double beta : {0.1, 0.4, 0.8}) {
        const double x = tc->g_inv(beta);
        const double lhs = tc->B_Z(beta) - std::log(tc->g_prime(x)) - ss.B(x);
        if (std::isnan(c0))
            c0 = lhs;
        else
            CHECK(lhs == doctest::Approx(c0).epsilon(1e-7));
    }
}

TEST_CASE("property: (g' sigma)^2 = f and g_inv(g(x)) = x") {
    auto d = catalogue_get("gbm", {{"mu", 1.0}, {"s", 1.0}});
    Expression f = Expression::parse("x^-1");
    auto tc = transform(d, f);
    for (double x : probe_grid(d, 12)) {
        const double gp = tc->g_prime(x);
        const double sig = d.sigma.eval_raw(x);
        CHECK(gp * gp * sig * sig ==
              doctest::Approx(f.eval_raw(x)).epsilon(1e-10));
    }
    for (double x : {0.3, 0.9, 1.0, 2.4, 17.0}) {
        CHECK(tc->g_inv(tc->g(x)) == doctest::Approx(x).epsilon(0).scale(1.0)
                                         .epsilon(1e-8));
    }
}

TEST_CASE("rejects non-positive and non-differentiable integrands") {
    auto d = catalogue_get("bm_drift", {{"mu", 1.0}});
    CHECK_THROWS_AS(transform(d, Expression::parse("-1")), ModelError);
    CHECK_THROWS_AS(transform(d, Expression::parse("1/(1 + abs(x))")),
                    NonDifferentiableError);
}

TEST_CASE("lamperti pairing") {
    auto p = lamperti_pair(0.5, Expression::parse("exp(-x)"));
    CHECK(p.dimension == doctest::Approx(3.0));
    // bessel side integrand u^-2 e^{-log u} = u^-3
    CHECK(p.bessel_integrand.eval(2.0) == doctest::Approx(0.125).epsilon(1e-12));

    // both sides finite for e^{-x}; both infinite for the constant
    ScaleSpeed bm_ss(p.bm), bessel_ss(p.bessel);
    auto v_bm = finiteness_via_Y(bm_ss, p.bm_integrand);
    auto v_bes = finiteness_via_Y(bessel_ss, p.bessel_integrand);
    CHECK(v_bm.decision == Decision::Finite);
    CHECK(v_bes.decision == Decision::Finite);

    auto q = lamperti_pair(0.5, Expression::parse("1"));
    ScaleSpeed qbm(q.bm), qbes(q.bessel);
    CHECK(finiteness_via_Y(qbm, q.bm_integrand).decision == Decision::Infinite);
    CHECK(finiteness_via_Y(qbes, q.bessel_integrand).decision == Decision::Infinite);
}
