#include "perpetua/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace perpetua {

const char* to_string(BoundaryKind k) {
    switch (k) {
        case BoundaryKind::Regular: return "Regular";
        case BoundaryKind::Exit: return "Exit";
        case BoundaryKind::Entrance: return "Entrance";
        case BoundaryKind::Natural: return "Natural";
        case BoundaryKind::Inconclusive: return "Inconclusive";
    }
    return "?";
}

Verdict potential_double_verdict(const Fn& phi_outer, const Fn& w_outer,
                                 const Fn& phi_inner, const Fn& w_inner, double base,
                                 double end, const ClassifierConfig& ccfg,
                                 const QuadConfig& qcfg) {
    // Route on whether the outer tail converges; the plain density underflows
    // harmlessly where phi_outer -> -inf and blows up (correctly signalling
    // divergence) where phi_outer -> +inf.
    Fn outer_plain = [phi_outer, w_outer](double u) {
        return w_outer(u) * std::exp(phi_outer(u));
    };
    Verdict vout = improper_verdict(outer_plain, base, end, ccfg, qcfg);
    if (vout.finite()) {
        auto tail = std::make_shared<LogTailIntegral>(w_outer, phi_outer, base, end, qcfg);
        if (tail->converged()) {
            Fn fubini = [phi_inner, w_inner, tail](double beta) {
                const double lg = phi_inner(beta) + tail->log_tail(beta);
                return lg < -745.0 ? 0.0 : w_inner(beta) * std::exp(lg);
            };
            Verdict v = improper_verdict(fubini, base, end, ccfg, qcfg);
            v.rationale = "Fubini form: " + v.rationale;
            return v;
        }
    }
    auto cum = std::make_shared<LogCumulative>(w_inner, phi_inner, base, end, qcfg);
    Fn nested = [phi_outer, w_outer, cum](double alpha) {
        const double lg = phi_outer(alpha) + cum->log_cum(alpha);
        return lg < -745.0 ? 0.0 : w_outer(alpha) * std::exp(lg);
    };
    Verdict v = improper_verdict(nested, base, end, ccfg, qcfg);
    v.rationale = "nested form: " + v.rationale;
    return v;
}

namespace {

BoundaryKind kind_from(const Verdict& I, const Verdict& J) {
    if (!I.conclusive() || !J.conclusive()) return BoundaryKind::Inconclusive;
    if (I.finite() && J.finite()) return BoundaryKind::Regular;
    if (I.finite()) return BoundaryKind::Exit;
    if (J.finite()) return BoundaryKind::Entrance;
    return BoundaryKind::Natural;
}

}  // namespace

BoundaryClass classify(const ScaleSpeed& ss, Endpoint end, const ClassifierConfig& ccfg) {
    const Diffusion& d = ss.model();
    const double e = end == Endpoint::Left ? d.l : d.r;
    Fn phi_s = [&ss](double u) { return -ss.B(u); };
    Fn phi_m = [&ss](double u) { return ss.B(u); };
    Fn w_one = [](double) { return 1.0; };
    Fn w_m = [&ss](double u) { return 2.0 / ss.sigma2(u); };

    BoundaryClass bc;
    bc.endpoint = end;
    bc.I = potential_double_verdict(phi_s, w_one, phi_m, w_m, d.x0, e, ccfg,
                                    ss.quad_config());
    bc.J = potential_double_verdict(phi_m, w_m, phi_s, w_one, d.x0, e, ccfg,
                                    ss.quad_config());
    bc.kind = kind_from(bc.I, bc.J);
    return bc;
}

double mean_additive_until_exit(const ScaleSpeed& ss, double a, double b, double x,
                                const Fn& f) {
    const Diffusion& d = ss.model();
    if (!(a < x && x < b) || !(a > d.l || (a == d.l && std::isfinite(a))) || b > d.r)
        throw ModelError("expected exit time requires l <= a < x < b <= r");
    const double Sa = ss.S(a), Sb = ss.S(b), Sx = ss.S(x);
    const double den = Sb - Sa;
    Fn kernel = [&](double z) {
        const double Sz = ss.S(z);
        const double up = Sb - std::max(Sx, Sz);
        const double dn = std::min(Sx, Sz) - Sa;
        return up * dn / den * ss.speed_density(z) * f(z);
    };
    // kernel has a kink at z = x; integrate the two smooth pieces separately
    return integrate(kernel, a, x, ss.quad_config()) +
           integrate(kernel, x, b, ss.quad_config());
}

double expected_exit_time(const ScaleSpeed& ss, double a, double b, double x) {
    return mean_additive_until_exit(ss, a, b, x, [](double) { return 1.0; });
}

// ---------------------------------------------------------------------------
// Increasing eigenfunction via an adaptive Cash-Karp RK45 on the first-order
// system u' = v e^{-B(x)}, v' = lambda u m(x), with periodic rescaling so the
// exponentially growing solution never overflows.

namespace {

struct EigenState {
    double u, v;
};

}  // namespace

double EigenTable::ratio(std::size_t i, std::size_t j) const {
    return std::exp(log_u[i] - log_u[j]);
}

EigenTable increasing_eigenfunction(const ScaleSpeed& ss, double lambda,
                                    std::vector<double> grid, double x_start, double v0) {
    if (lambda <= 0.0) throw ModelError("increasing_eigenfunction requires lambda > 0");
    if (grid.empty()) throw ModelError("empty eigenfunction grid");
    std::sort(grid.begin(), grid.end());
    const Diffusion& d = ss.model();
    if (grid.front() <= d.l || grid.back() >= d.r)
        throw ModelError("eigenfunction grid must lie inside (l,r)");

    if (std::isnan(x_start)) {
        if (std::isfinite(d.l))
            x_start = d.l + 1e-6 * (std::min(grid.front(), d.x0) - d.l);
        else
            x_start = grid.front() - 12.0 / std::sqrt(2.0 * lambda);
    }
    if (x_start >= grid.front()) x_start = grid.front() - 1e-9;

    auto rhs = [&](double x, const EigenState& s) -> EigenState {
        return {s.v * std::exp(-ss.B(x)), lambda * s.u * ss.speed_density(x)};
    };

    // Cash-Karp tableau
    static const double A[6] = {0, 1.0 / 5, 3.0 / 10, 3.0 / 5, 1.0, 7.0 / 8};
    static const double Bt[6][5] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {3.0 / 10, -9.0 / 10, 6.0 / 5},
        {-11.0 / 54, 5.0 / 2, -70.0 / 27, 35.0 / 27},
        {1631.0 / 55296, 175.0 / 512, 575.0 / 13824, 44275.0 / 110592, 253.0 / 4096}};
    static const double C5[6] = {37.0 / 378, 0, 250.0 / 621, 125.0 / 594, 0, 512.0 / 1771};
    static const double C4[6] = {2825.0 / 27648, 0,           18575.0 / 48384,
                                 13525.0 / 55296, 277.0 / 14336, 1.0 / 4};

    const double abs_tol = 1e-9, rel_tol = 1e-7;
    EigenTable out;
    EigenState s{1.0, v0};
    double log_scale = 0.0;
    double x = x_start;
    double h = (grid.back() - x_start) / 1024.0;
    std::size_t next = 0;

    while (next < grid.size()) {
        const double target = grid[next];
        if (x >= target) {
            out.x.push_back(target);
            out.log_u.push_back(std::log(std::max(s.u, 1e-300)) + log_scale);
            out.log_v.push_back(std::log(std::max(s.v, 1e-300)) + log_scale);
            ++next;
            continue;
        }
        double step = std::min(h, target - x);
        // one adaptive Cash-Karp step
        EigenState k[6];
        for (;;) {
            k[0] = rhs(x, s);
            for (int i = 1; i < 6; ++i) {
                EigenState si = s;
                for (int j = 0; j < i; ++j) {
                    si.u += step * Bt[i][j] * k[j].u;
                    si.v += step * Bt[i][j] * k[j].v;
                }
                k[i] = rhs(x + A[i] * step, si);
            }
            EigenState s5 = s, s4 = s;
            for (int i = 0; i < 6; ++i) {
                s5.u += step * C5[i] * k[i].u;
                s5.v += step * C5[i] * k[i].v;
                s4.u += step * C4[i] * k[i].u;
                s4.v += step * C4[i] * k[i].v;
            }
            const double sc_u = abs_tol + rel_tol * std::max(std::fabs(s.u), std::fabs(s5.u));
            const double sc_v = abs_tol + rel_tol * std::max(std::fabs(s.v), std::fabs(s5.v));
            const double err = std::max(std::fabs(s5.u - s4.u) / sc_u,
                                        std::fabs(s5.v - s4.v) / sc_v);
            if (err <= 1.0 || step <= 1e-14 * std::max(1.0, std::fabs(x))) {
                x += step;
                s = s5;
                h = step * std::clamp(0.9 * std::pow(err > 0 ? err : 1e-10, -0.2), 0.5, 4.0);
                break;
            }
            step *= std::clamp(0.9 * std::pow(err, -0.25), 0.1, 0.5);
        }
        if (s.u > 1e100) {
            log_scale += std::log(s.u);
            s.v /= s.u;
            s.u = 1.0;
        }
        if (!(s.u > 0.0) || !std::isfinite(s.u) || !std::isfinite(s.v))
            throw QuadratureError("eigenfunction integration failed (stiff step)");
    }

    const double lmax = *std::max_element(out.log_u.begin(), out.log_u.end());
    for (double lu : out.log_u) out.u.push_back(std::exp(lu - lmax));
    return out;
}

}  // namespace perpetua
