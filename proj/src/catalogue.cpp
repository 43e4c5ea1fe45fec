#include "perpetua/catalogue.hpp"

namespace perpetua {

namespace {

double param(const Bindings& b, const std::string& name) {
    auto it = b.find(name);
    if (it == b.end()) throw ModelError("missing parameter '" + name + "'");
    return it->second;
}

}  // namespace

Diffusion catalogue_get(const std::string& name, const Bindings& params) {
    if (name == "bessel") {
        const double delta = param(params, "delta");
        if (!(delta > 2.0))
            throw ModelError("bessel requires delta > 2: for delta <= 2 the process is "
                             "not transient to +inf (S(inf) = inf), criterion inapplicable");
        return Diffusion::make(0.0, kInf, Expression::parse("(delta - 1)/(2*x)"),
                               Expression::constant(1.0), 1.0, {{"delta", delta}});
    }
    if (name == "bm_drift") {
        const double mu = param(params, "mu");
        return Diffusion::make(-kInf, kInf, Expression::constant(mu),
                               Expression::constant(1.0), 0.0);
    }
    if (name == "bm") {
        return Diffusion::make(-kInf, kInf, Expression::constant(0.0),
                               Expression::constant(1.0), 0.0);
    }
    if (name == "ou") {
        const double theta = param(params, "theta");
        if (!(theta > 0.0)) throw ModelError("ou requires theta > 0");
        return Diffusion::make(-kInf, kInf, Expression::parse("-theta*x"),
                               Expression::constant(1.0), 0.0, {{"theta", theta}});
    }
    if (name == "gbm") {
        const double mu = param(params, "mu");
        const double s = param(params, "s");
        if (!(s > 0.0)) throw ModelError("gbm requires s > 0");
        return Diffusion::make(0.0, kInf, Expression::parse("mu*x"),
                               Expression::parse("s*x"), 1.0, {{"mu", mu}, {"s", s}});
    }
    throw ModelError("unknown catalogue family '" + name +
                     "' (known: bessel, bm_drift, bm, ou, gbm)");
}

const std::vector<FamilyInfo>& catalogue_families() {
    static const std::vector<FamilyInfo> info = {
        {"bessel", "delta > 2",
         "dR = dW + ((delta-1)/2R) dt on (0,inf); transient to inf; finiteness of "
         "int f(R) dt is equivalent to int^inf u f(u) du < inf"},
        {"bm_drift", "mu",
         "Brownian motion with drift on R; for mu > 0 finiteness is equivalent to "
         "int^inf f(x) dx < inf"},
        {"bm", "",
         "standard Brownian motion; recurrent, S(inf) = inf, criterion inapplicable"},
        {"ou", "theta > 0",
         "Ornstein-Uhlenbeck, b = -theta x; recurrent, criterion inapplicable"},
        {"gbm", "mu, s > 0",
         "geometric Brownian motion b = mu x, sigma = s x on (0,inf); transient to "
         "inf when 2 mu / s^2 > 1"},
    };
    return info;
}

const std::vector<KnownAnswer>& known_answers() {
    static const std::vector<KnownAnswer> answers = {
        {"bessel", {{"delta", 3.0}}, "x^-3", Decision::Finite,
         "int^inf u*u^-3 du = int u^-2 < inf"},
        {"bessel", {{"delta", 3.0}}, "x^-1.5", Decision::Infinite,
         "int^inf u*u^-1.5 du = int u^-0.5 = inf"},
        {"bessel", {{"delta", 4.0}}, "x^-4", Decision::Finite,
         "int^inf u^-3 du < inf (criterion does not involve delta)"},
        {"bessel", {{"delta", 4.0}}, "x^-1.5", Decision::Infinite,
         "int^inf u^-0.5 du = inf"},
        {"bessel", {{"delta", 2.5}}, "x^-2.5", Decision::Finite,
         "int^inf u^-1.5 du < inf"},
        {"bessel", {{"delta", 2.5}}, "x^-1.5", Decision::Infinite,
         "int^inf u^-0.5 du = inf"},
        {"bm_drift", {{"mu", 1.0}}, "exp(-x)", Decision::Finite,
         "int^inf e^-x dx < inf"},
        {"bm_drift", {{"mu", 1.0}}, "1/(1 + x^2)", Decision::Finite,
         "int^inf dx/(1+x^2) < inf"},
        {"bm_drift", {{"mu", 1.0}}, "1/(1 + abs(x))", Decision::Infinite,
         "int^inf dx/(1+x) = inf"},
        {"bm_drift", {{"mu", 0.5}}, "exp(-x)", Decision::Finite,
         "int^inf e^-x dx < inf (drift only rescales the integrand)"},
        {"gbm", {{"mu", 1.0}, {"s", 1.0}}, "x^-1", Decision::Finite,
         "S = 1 - 1/x, m = 2: int^inf (1/v) v^-1 * 2 dv < inf"},
        {"gbm", {{"mu", 1.0}, {"s", 1.0}}, "1", Decision::Infinite,
         "A is the lifetime itself; gbm never explodes, so A = inf a.s."},
    };
    return answers;
}

}  // namespace perpetua
