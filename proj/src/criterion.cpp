#include "perpetua/criterion.hpp"

#include <cmath>

namespace perpetua {

void require_transient_right(const ScaleSpeed& ss) {
    Limit sr = ss.scale_limit(Endpoint::Right);
    if (sr.kind == Limit::Kind::PlusInf)
        throw ModelError("criterion requires S(r) < inf: Y is not transient toward r");
    if (!sr.is_finite())
        throw ModelError("criterion requires S(r) < inf: scale limit at r inconclusive");
    Limit sl = ss.scale_limit(Endpoint::Left);
    if (sl.kind == Limit::Kind::MinusInf) return;  // l unattainable in natural scale
    if (!sl.conclusive())
        throw ModelError("scale limit at l inconclusive; cannot confirm transience toward r");
    // S(l) finite: l must be inaccessible (entrance or natural)
    BoundaryClass bc = classify(ss, Endpoint::Left);
    if (bc.kind == BoundaryKind::Entrance || bc.kind == BoundaryKind::Natural) return;
    throw ModelError(
        "criterion requires transience toward r, but the left boundary is attainable "
        "(S(l) finite and kind " +
        std::string(to_string(bc.kind)) + ")");
}

Verdict finiteness_via_Y(const ScaleSpeed& ss, const Expression& f,
                         const ClassifierConfig& ccfg) {
    require_transient_right(ss);
    const Diffusion& d = ss.model();
    Fn integrand = [&ss, f](double v) {
        const double lg = ss.B(v) + ss.log_scale_tail_right(v);
        const double fv = f.eval_raw(v);
        if (lg < -745.0) return 0.0;
        return fv * (2.0 / ss.sigma2(v)) * std::exp(lg);
    };
    Verdict v = improper_verdict(integrand, d.x0, d.r, ccfg, ss.quad_config());
    v.rationale = "int^r (S(r)-S(v)) f(v) m(dv): " + v.rationale;
    return v;
}

std::pair<Verdict, BoundaryClass> finiteness_via_Z(const TimeChanged& tc,
                                                   const ClassifierConfig& ccfg) {
    Limit zr = tc.z_right();
    if (!zr.conclusive())
        throw ModelError("g(r) limit inconclusive; Z route unavailable");
    const double end = zr.as_double();
    Fn phi_s = [&tc](double b) { return -tc.B_Z(b); };
    Fn phi_m = [&tc](double b) { return tc.B_Z(b); };
    Fn one = [](double) { return 1.0; };
    Fn two = [](double) { return 2.0; };

    BoundaryClass bc;
    bc.endpoint = Endpoint::Right;
    bc.I = potential_double_verdict(phi_s, one, phi_m, two, 0.0, end, ccfg);
    bc.J = potential_double_verdict(phi_m, two, phi_s, one, 0.0, end, ccfg);
    bc.kind = bc.I.conclusive() && bc.J.conclusive()
                  ? (bc.I.finite() ? (bc.J.finite() ? BoundaryKind::Regular
                                                    : BoundaryKind::Exit)
                                   : (bc.J.finite() ? BoundaryKind::Entrance
                                                    : BoundaryKind::Natural))
                  : BoundaryKind::Inconclusive;
    Verdict v = bc.I;
    v.rationale = "Feller exit integral at g(r): " + v.rationale;
    return {v, bc};
}

MeanFunctional mean_functional(const ScaleSpeed& ss, const Expression& f, double x,
                               const ClassifierConfig& ccfg) {
    const Diffusion& d = ss.model();
    if (!d.contains(x)) throw ModelError("mean_functional: x outside (l,r)");
    Limit sr = ss.scale_limit(Endpoint::Right);
    if (!sr.is_finite())
        throw ModelError("mean criterion inapplicable: S(r) is not finite");

    MeanFunctional out;
    // right piece: G0(x,y) = S(r)-S(y) for y >= x
    Fn right = [&ss, f](double y) {
        const double lg = ss.B(y) + ss.log_scale_tail_right(y);
        if (lg < -745.0) return 0.0;
        return f.eval_raw(y) * (2.0 / ss.sigma2(y)) * std::exp(lg);
    };
    out.right_tail = improper_verdict(right, x, d.r, ccfg, ss.quad_config());

    // left piece: G0(x,y) = S(r)-S(x), constant in y <= x
    const double g0x = std::exp(ss.log_scale_tail_right(x));
    Fn left = [&ss, f](double y) {
        return f.eval_raw(y) * ss.speed_density(y);
    };
    out.left_tail = improper_verdict(left, x, d.l, ccfg, ss.quad_config());

    if (out.right_tail.finite() && out.left_tail.finite()) {
        out.decision = Decision::Finite;
        out.value = out.right_tail.value + g0x * out.left_tail.value;
    } else if (out.right_tail.infinite() || out.left_tail.infinite()) {
        out.decision = Decision::Infinite;
        out.value = kInf;
    } else {
        out.decision = Decision::Inconclusive;
        out.value = kNaN;
    }
    return out;
}

FinitenessReport analyze(const Diffusion& d, const Expression& f, double x,
                         const ClassifierConfig& ccfg) {
    if (f.has_unbound_params())
        throw ModelError("integrand has unbound parameters: " + f.str());
    ScaleSpeed ss(d);
    FinitenessReport rep;
    rep.verdict_Y = finiteness_via_Y(ss, f, ccfg);

    try {
        auto tc = transform(d, f);
        auto [vz, bc] = finiteness_via_Z(*tc, ccfg);
        rep.verdict_Z = vz;
        rep.boundary_of_Z = bc;
    } catch (const NonDifferentiableError& e) {
        rep.z_note = std::string("Z route unavailable: ") + e.what();
    } catch (const ModelError& e) {
        rep.z_note = std::string("Z route unavailable: ") + e.what();
    }

    if (rep.verdict_Z && rep.verdict_Y.conclusive() && rep.verdict_Z->conclusive()) {
        if (rep.verdict_Y.decision != rep.verdict_Z->decision) {
            rep.agree = false;
            throw RouteDisagreement(
                "route disagreement (numerical defect): Y says " +
                std::string(to_string(rep.verdict_Y.decision)) + " [" +
                rep.verdict_Y.rationale + "], Z says " +
                std::string(to_string(rep.verdict_Z->decision)) + " [" +
                rep.verdict_Z->rationale + "]");
        }
    }
    rep.mean = mean_functional(ss, f, x, ccfg);
    return rep;
}

}  // namespace perpetua
