#include "perpetua/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>

#include "perpetua/accum.hpp"

namespace perpetua {

const char* to_string(Decision d) {
    switch (d) {
        case Decision::Finite: return "Finite";
        case Decision::Infinite: return "Infinite";
        case Decision::Inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

// G7/K15 nodes and weights on [0,1] (positive half, symmetric).
struct GK {
    double x, wk, wg;
};
constexpr GK kGK15[8] = {
    {0.000000000000000000, 0.209482141084727828, 0.417959183673469388},
    {0.405845151377397167, 0.190350578064785410, 0.381830050505118945},
    {0.741531185599394440, 0.140653259715525919, 0.279705391489276668},
    {0.949107912342758525, 0.063092092629978553, 0.129484966168869693},
    {0.207784955007898468, 0.204432940075298892, 0.0},
    {0.586087235467691130, 0.169004726639267903, 0.0},
    {0.864864423359769073, 0.104790010322250184, 0.0},
    {0.991455371120812639, 0.022935322010529225, 0.0},
};

struct Segment {
    double a, b, value, error;
    bool nonfinite;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const Fn& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double m = 0.5 * (b - a);
    double fc = f(c);
    double k15 = kGK15[0].wk * fc;
    double g7 = kGK15[0].wg * fc;
    for (int i = 1; i < 8; ++i) {
        const double dx = m * kGK15[i].x;
        const double y = f(c + dx) + f(c - dx);
        k15 += kGK15[i].wk * y;
        g7 += kGK15[i].wg * y;
    }
    k15 *= m;
    g7 *= m;
    Segment s;
    s.a = a;
    s.b = b;
    s.value = k15;
    s.nonfinite = !std::isfinite(k15);
    s.error = s.nonfinite ? kInf : std::fabs(k15 - g7);
    return s;
}

}  // namespace

QuadResult integrate_result(const Fn& h, double a, double b, const QuadConfig& cfg) {
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::priority_queue<Segment> q;
    q.push(gk15(h, a, b));
    double total = q.top().value;
    double toterr = q.top().error;
    int n = 1;
    while (n < cfg.max_intervals) {
        if (std::isfinite(total) &&
            toterr <= std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(total)))
            break;
        Segment worst = q.top();
        q.pop();
        total -= worst.value;
        toterr -= worst.error;
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval at double resolution; keep its estimate
            worst.error = 0.0;
            total += worst.value;
            q.push(worst);
            continue;
        }
        Segment s1 = gk15(h, worst.a, mid);
        Segment s2 = gk15(h, mid, worst.b);
        total += s1.value + s2.value;
        toterr += s1.error + s2.error;
        q.push(s1);
        q.push(s2);
        ++n;
    }
    out.value = total;
    out.error = toterr;
    out.nonfinite = !std::isfinite(total);
    out.converged = !out.nonfinite &&
                    toterr <= std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(total));
    return out;
}

double integrate(const Fn& h, double a, double b, const QuadConfig& cfg) {
    QuadResult r = integrate_result(h, a, b, cfg);
    if (r.nonfinite)
        throw QuadratureError("integrand evaluated non-finite on [" + std::to_string(a) +
                              ", " + std::to_string(b) + "]");
    if (!r.converged && r.error > 1e-5 * std::max(std::fabs(r.value), 1.0))
        throw QuadratureError("quadrature tolerance not met on [" + std::to_string(a) +
                              ", " + std::to_string(b) + "] (err=" +
                              std::to_string(r.error) + ")");
    return r.value;
}

namespace {

// Nested cutoff schedule T_0 = a, T_k -> end.
struct Cutoffs {
    double a, end;
    bool mult;  // multiplicative ladder a*2^k

    Cutoffs(double a_, double end_) : a(a_), end(end_) {
        mult = std::isinf(end) && a != 0.0 && ((end > 0) == (a > 0));
    }
    double at(int k) const {
        if (k == 0) return a;
        if (std::isinf(end)) {
            const double step = std::ldexp(1.0, k);  // 2^k
            if (mult) return a * step;
            return end > 0 ? a + (step - 1.0) : a - (step - 1.0);
        }
        return end - (end - a) * std::ldexp(1.0, -k);
    }
    int max_levels(const ClassifierConfig& c) const {
        return std::isinf(end) ? c.max_levels : c.max_levels_finite;
    }
};

std::string ratio_note(double lo, double hi, int window) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "increment ratios in [%.3g, %.3g] over last %d levels",
                  lo, hi, window);
    return buf;
}

Verdict classify_levels(const Fn& h, const Cutoffs& cut, const ClassifierConfig& ccfg,
                        const QuadConfig& qcfg) {
    Verdict v;
    const int kmax = cut.max_levels(ccfg);
    std::vector<double> inc;
    double F = 0.0;
    bool saw_nan = false;
    for (int k = 1; k <= kmax; ++k) {
        const double t0 = cut.at(k - 1), t1 = cut.at(k);
        if (t0 == t1 || !std::isfinite(t1)) break;  // ladder exhausted
        QuadResult r = integrate_result(h, std::min(t0, t1), std::max(t0, t1), qcfg);
        if (std::isnan(r.value)) {
            saw_nan = true;
            break;
        }
        double d = r.value;
        if (d < 0.0) {
            if (d < -1e-9 * std::max(1.0, F))
                throw std::invalid_argument(
                    "improper_verdict requires a nonnegative integrand");
            d = 0.0;
        }
        inc.push_back(d);
        F += d;
        v.cutoffs.emplace_back(t1, F);
        if (!std::isfinite(F) || F > ccfg.cap) {
            v.decision = Decision::Infinite;
            v.rationale = std::isfinite(F)
                              ? "partial integral exceeded cap"
                              : "integrand overflow: partial integral not representable";
            v.value = kInf;
            return v;
        }
        if (static_cast<int>(inc.size()) <= ccfg.window) continue;

        double rlo = kInf, rhi = 0.0, rprod = 1.0;
        int nr = 0;
        bool ratios_ok = true;
        for (int j = static_cast<int>(inc.size()) - ccfg.window;
             j < static_cast<int>(inc.size()); ++j) {
            const double prev = inc[j - 1], curr = inc[j];
            double r_j;
            if (prev == 0.0)
                r_j = curr == 0.0 ? 0.0 : kInf;
            else
                r_j = curr / prev;
            rlo = std::min(rlo, r_j);
            rhi = std::max(rhi, r_j);
            if (r_j > 0.0 && std::isfinite(r_j)) {
                rprod *= r_j;
                ++nr;
            }
            if (!std::isfinite(r_j)) ratios_ok = false;
        }
        v.growth_ratio = nr > 0 ? std::pow(rprod, 1.0 / nr) : 0.0;
        if (!ratios_ok) continue;

        if (rhi <= ccfg.theta_finite) {
            const double rho = rhi;
            const double tail = rho < 1.0 ? inc.back() * rho / (1.0 - rho) : kInf;
            if (tail <= ccfg.tail_rel * std::max(F, 1e-300)) {
                v.decision = Decision::Finite;
                v.value = F + tail;
                v.rationale = ratio_note(rlo, rhi, ccfg.window) +
                              "; geometric tail bound met";
                return v;
            }
        } else if (rlo >= ccfg.theta_infinite) {
            v.decision = Decision::Infinite;
            v.value = kInf;
            v.rationale = ratio_note(rlo, rhi, ccfg.window) + "; increments not summable";
            return v;
        }
    }
    v.decision = Decision::Inconclusive;
    v.value = kNaN;
    v.rationale = saw_nan ? "integrand evaluated NaN before classification"
                          : "no conclusive growth pattern within level budget";
    return v;
}

}  // namespace

Verdict improper_verdict(const Fn& h, double a, double end, const ClassifierConfig& ccfg,
                         const QuadConfig& qcfg) {
    if (a == end) {
        Verdict v;
        v.decision = Decision::Finite;
        v.value = 0.0;
        v.rationale = "empty range";
        return v;
    }
    Cutoffs cut(a, end);
    Verdict v = classify_levels(h, cut, ccfg, qcfg);
    if (v.conclusive()) return v;

    // Slowly varying tails are sometimes easier to read in 1/x coordinates.
    if (std::isinf(end) && a != 0.0 && ((end > 0) == (a > 0))) {
        Fn h2 = [&h](double t) {
            const double u = 1.0 / t;
            return h(u) * u * u;
        };
        Cutoffs cut2(1.0 / a, 0.0);
        Verdict v2 = classify_levels(h2, cut2, ccfg, qcfg);
        if (v2.conclusive()) {
            v2.rationale += " (after substitution t = 1/x)";
            return v2;
        }
    }
    return v;
}

Verdict double_verdict(const Fn& outer, const Fn& inner, double end, double base,
                       const ClassifierConfig& ccfg, const QuadConfig& qcfg) {
    Verdict vout = improper_verdict(outer, base, end, ccfg, qcfg);
    const double lo = std::min(base, end);
    const double hi = std::max(base, end);
    if (vout.finite()) {
        const double o_end = vout.value;
        auto cum = std::make_shared<Antiderivative>(outer, base, lo, hi, qcfg);
        Fn fubini = [inner, cum, o_end](double beta) {
            return inner(beta) * std::max(0.0, o_end - std::fabs((*cum)(beta)));
        };
        Verdict v = improper_verdict(fubini, base, end, ccfg, qcfg);
        v.rationale = "Fubini form (outer cumulative finite): " + v.rationale;
        return v;
    }
    auto cum_in = std::make_shared<Antiderivative>(inner, base, lo, hi, qcfg);
    Fn nested = [outer, cum_in](double alpha) {
        return outer(alpha) * std::fabs((*cum_in)(alpha));
    };
    Verdict v = improper_verdict(nested, base, end, ccfg, qcfg);
    v.rationale = "nested form (outer cumulative not finite): " + v.rationale;
    return v;
}

}  // namespace perpetua
