#include <doctest.h>

#include <cmath>
#include <thread>

#include "perpetua/accum.hpp"
#include "perpetua/quadrature.hpp"

using namespace perpetua;

TEST_CASE("proper integrals") {
    CHECK(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0) ==
          doctest::Approx(2.0).epsilon(1e-7));
    CHECK(integrate([](double x) { return 6.0 * x * (1.0 - x); }, 0.0, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(integrate([](double u) { return 1.0 / (u * u); }, 1.0, 2.0) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("improper verdict examples") {
    auto v1 = improper_verdict([](double v) { return std::pow(v, -1.5); }, 1.0, kInf);
    CHECK(v1.decision == Decision::Finite);
    CHECK(v1.value == doctest::Approx(2.0).epsilon(1e-4));

    auto v2 = improper_verdict([](double v) { return 1.0 / v; }, 1.0, kInf);
    CHECK(v2.decision == Decision::Infinite);

    // Partial integrals 2*log(T_k): constant increments on the 2^k ladder.
    auto v3 = improper_verdict([](double v) { return 2.0 * std::pow(v, -1.0); }, 1.0, kInf);
    CHECK(v3.decision == Decision::Infinite);
}

TEST_CASE("cutoff evidence is monotone") {
    auto v = improper_verdict([](double v) { return std::pow(v, -1.5); }, 1.0, kInf);
    REQUIRE(v.cutoffs.size() > 2);
    for (std::size_t i = 1; i < v.cutoffs.size(); ++i) {
        CHECK(v.cutoffs[i].second >= v.cutoffs[i - 1].second);
        CHECK(v.cutoffs[i].first > v.cutoffs[i - 1].first);
    }
    CHECK(v.value >= v.cutoffs.back().second);
}

TEST_CASE("negative integrand rejected") {
    CHECK_THROWS_AS(improper_verdict([](double) { return -1.0; }, 1.0, kInf),
                    std::invalid_argument);
}

TEST_CASE("p-integral family oracle on (1, inf)") {
    // Finite iff p > 1; within the borderline band |p-1| <= 0.05 Inconclusive
    // is acceptable.
    for (double p : {0.5, 0.9, 1.0, 1.1, 1.5, 2.0, 3.0}) {
        auto v = improper_verdict([p](double x) { return std::pow(x, -p); }, 1.0, kInf);
        INFO("p = ", p, " decision = ", to_string(v.decision), " (", v.rationale, ")");
        if (p >= 1.0 - 0.05 && p <= 1.0 + 0.05 && !v.conclusive()) continue;
        if (p > 1.0) {
            CHECK(v.decision == Decision::Finite);
            CHECK(v.value == doctest::Approx(1.0 / (p - 1.0)).epsilon(2e-3));
        } else {
            CHECK(v.decision == Decision::Infinite);
        }
    }
}

TEST_CASE("improper verdict toward a finite endpoint, both directions") {
    // int_0^1 x^-0.5 dx = 2, improper at the LEFT end 0 approached from 1
    auto v = improper_verdict([](double x) { return 1.0 / std::sqrt(x); }, 1.0, 0.0);
    CHECK(v.decision == Decision::Finite);
    CHECK(v.value == doctest::Approx(2.0).epsilon(1e-4));

    auto vd = improper_verdict([](double x) { return 1.0 / x; }, 1.0, 0.0);
    CHECK(vd.decision == Decision::Infinite);

    // toward a finite right end: int_0^1 (1-x)^-0.5 = 2
    auto vr = improper_verdict([](double x) { return 1.0 / std::sqrt(1.0 - x); }, 0.0, 1.0);
    CHECK(vr.decision == Decision::Finite);
    CHECK(vr.value == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("zero integrand is finite with value zero") {
    auto v = improper_verdict([](double) { return 0.0; }, 1.0, kInf);
    CHECK(v.decision == Decision::Finite);
    CHECK(v.value == 0.0);
}

TEST_CASE("exponential decay classified quickly despite underflow") {
    auto v = improper_verdict([](double x) { return std::exp(-x); }, 0.0, kInf);
    CHECK(v.decision == Decision::Finite);
    CHECK(v.value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("double verdict examples") {
    // BM toward finite end 1 from base 0: outer = 1, inner = 2 -> value 1
    auto v1 = double_verdict([](double) { return 1.0; }, [](double) { return 2.0; }, 1.0,
                             0.0);
    CHECK(v1.decision == Decision::Finite);
    CHECK(v1.value == doctest::Approx(1.0).epsilon(1e-3));

    // BM toward infinity: both integrals diverge
    auto v2 = double_verdict([](double) { return 1.0; }, [](double) { return 2.0; }, kInf,
                             0.0);
    CHECK(v2.decision == Decision::Infinite);

    // Bessel(3) toward infinity: outer u^-2, inner 2 beta^2 -> integrand ~ (2/3) alpha
    auto v3 = double_verdict([](double u) { return std::pow(u, -2.0); },
                             [](double b) { return 2.0 * b * b; }, kInf, 1.0);
    CHECK(v3.decision == Decision::Infinite);
}

TEST_CASE("antiderivative matches direct quadrature and is thread-consistent") {
    Antiderivative F([](double x) { return std::exp(-x * x / 2.0); }, 0.0, -kInf, kInf);
    const double direct = integrate([](double x) { return std::exp(-x * x / 2.0); }, 0.0, 3.7);
    CHECK(F(3.7) == doctest::Approx(direct).epsilon(1e-9));
    CHECK(F(-3.7) == doctest::Approx(-direct).epsilon(1e-9));

    // concurrent evaluation returns what sequential execution returns
    std::vector<double> xs;
    for (int i = 0; i < 64; ++i) xs.push_back(-8.0 + 0.25 * i);
    std::vector<double> seq;
    {
        Antiderivative G([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, -kInf, kInf);
        for (double x : xs) seq.push_back(G(x));
    }
    Antiderivative G([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, -kInf, kInf);
    std::vector<double> par(xs.size());
    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < xs.size(); i += 4) par[i] = G(xs[i]);
        });
    for (auto& th : pool) th.join();
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(par[i] == seq[i]);
}

TEST_CASE("log-space tail survives potentials that overflow exp") {
    // tail of exp(-2 mu u) from v: log D(v) = -2 mu v - log(2 mu)
    const double mu = 1.0;
    LogTailIntegral D([](double) { return 1.0; }, [mu](double u) { return -2.0 * mu * u; },
                      0.0, kInf);
    REQUIRE(D.converged());
    for (double v : {0.0, 1.0, 10.0, 300.0, 500.0}) {
        CHECK(D.log_tail(v) ==
              doctest::Approx(-2.0 * mu * v - std::log(2.0 * mu)).epsilon(1e-7));
    }

    // power-law potential: tail of u^-(delta-1) from v is v^-(delta-2)/(delta-2)
    const double dm1 = 2.0;  // delta = 3
    LogTailIntegral P([](double) { return 1.0; },
                      [dm1](double u) { return -dm1 * std::log(u); }, 1.0, kInf);
    REQUIRE(P.converged());
    for (double v : {1.0, 2.0, 37.0, 1e6}) {
        CHECK(P.log_tail(v) == doctest::Approx(-std::log(v)).epsilon(1e-7));
    }
}

TEST_CASE("log cumulative grows without overflow") {
    // M(x) = int_0^x 2 exp(2u) du = exp(2x) - 1
    LogCumulative M([](double) { return 2.0; }, [](double u) { return 2.0 * u; }, 0.0,
                    kInf);
    CHECK(M.log_cum(1.0) == doctest::Approx(std::log(std::exp(2.0) - 1.0)).epsilon(1e-8));
    CHECK(M.log_cum(500.0) == doctest::Approx(1000.0).epsilon(1e-9));
}

TEST_CASE("divergent tail is reported, not silently wrong") {
    LogTailIntegral D([](double) { return 1.0; }, [](double u) { return -std::log(u); },
                      1.0, kInf, {}, 80);
    CHECK_FALSE(D.converged());
    CHECK_THROWS_AS(D.log_tail(2.0), QuadratureError);
}
