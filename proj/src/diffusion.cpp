#include "perpetua/diffusion.hpp"

#include <algorithm>
#include <cmath>

namespace perpetua {

Diffusion Diffusion::make(double l, double r, Expression b, Expression sigma, double x0,
                          const Bindings& params) {
    Diffusion d;
    d.l = l;
    d.r = r;
    d.b = b.bind(params);
    d.sigma = sigma.bind(params);
    d.x0 = x0;
    if (!(l < x0 && x0 < r))
        throw ModelError("reference point x0 must satisfy l < x0 < r");
    if (d.b.has_unbound_params())
        throw ModelError("drift has unbound parameters: " + d.b.str());
    if (d.sigma.has_unbound_params())
        throw ModelError("dispersion has unbound parameters: " + d.sigma.str());
    for (double x : probe_grid(d, 20)) {
        const double s = d.sigma.eval_raw(x);
        if (!(s > 0.0))
            throw ModelError("sigma(x) must be positive on (l,r); sigma(" +
                             std::to_string(x) + ") = " + std::to_string(s));
    }
    return d;
}

std::vector<double> probe_grid(const Diffusion& d, int n_per_side) {
    std::vector<double> g;
    g.reserve(2 * n_per_side + 1);
    for (int k = n_per_side; k >= 1; --k) {
        const double x = std::isinf(d.l) ? d.x0 - (std::ldexp(1.0, k / 2) - 1.0) -
                                               0.37 * (k % 2)
                                         : d.l + (d.x0 - d.l) * std::ldexp(1.0, -k);
        if (x > d.l && x < d.x0) g.push_back(x);
    }
    g.push_back(d.x0);
    for (int k = 1; k <= n_per_side; ++k) {
        const double x = std::isinf(d.r) ? d.x0 + (std::ldexp(1.0, k / 2) - 1.0) +
                                               0.37 * (k % 2)
                                         : d.r - (d.r - d.x0) * std::ldexp(1.0, -k);
        if (x < d.r && x > d.x0) g.push_back(x);
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

ScaleSpeed::ScaleSpeed(Diffusion d, QuadConfig qcfg) : d_(std::move(d)), qcfg_(qcfg) {
    const Expression b = d_.b;
    const Expression sig = d_.sigma;
    Fn bs2 = [b, sig](double z) {
        const double s = sig.eval_raw(z);
        return 2.0 * b.eval_raw(z) / (s * s);
    };
    B_ = std::make_shared<TabulatedAntiderivative>(std::move(bs2), d_.x0, d_.l, d_.r, qcfg_);
    auto Bp = B_;
    Fn sdens = [Bp](double u) { return std::exp(-(*Bp)(u)); };
    S_ = std::make_shared<Antiderivative>(std::move(sdens), d_.x0, d_.l, d_.r, qcfg_);
}

double ScaleSpeed::B(double x) const { return (*B_)(x); }

double ScaleSpeed::scale_density(double x) const { return std::exp(-B(x)); }

double ScaleSpeed::sigma2(double x) const {
    const double s = d_.sigma.eval_raw(x);
    return s * s;
}

double ScaleSpeed::speed_density(double x) const {
    return 2.0 * std::exp(B(x)) / sigma2(x);
}

double ScaleSpeed::S(double x) const { return (*S_)(x); }

Limit ScaleSpeed::scale_limit(Endpoint e) const {
    const int i = e == Endpoint::Left ? 0 : 1;
    std::call_once(limit_flag_[i], [this, e, i] {
        const double endpoint = e == Endpoint::Left ? d_.l : d_.r;
        auto Bp = B_;
        Verdict v = improper_verdict([Bp](double u) { return std::exp(-(*Bp)(u)); },
                                     d_.x0, endpoint, {}, qcfg_);
        switch (v.decision) {
            case Decision::Finite:
                limits_[i] = Limit::finite(e == Endpoint::Left ? -v.value : v.value);
                break;
            case Decision::Infinite:
                limits_[i] = e == Endpoint::Left ? Limit::minus_inf() : Limit::plus_inf();
                break;
            case Decision::Inconclusive:
                limits_[i] = Limit::indeterminate();
                break;
        }
    });
    return limits_[i];
}

const LogTailIntegral& ScaleSpeed::right_tail() const {
    std::call_once(tail_flag_, [this] {
        auto Bp = B_;
        tail_ = std::make_shared<LogTailIntegral>(
            [](double) { return 1.0; }, [Bp](double u) { return -(*Bp)(u); }, d_.x0,
            d_.r, qcfg_);
    });
    if (!tail_->converged())
        throw ModelError("scale tail toward r does not converge: S(r) is not finite (" +
                         tail_->failure() + ")");
    return *tail_;
}

double ScaleSpeed::log_scale_tail_right(double x) const {
    Limit sr = scale_limit(Endpoint::Right);
    if (!sr.is_finite())
        throw ModelError("S(r) is not finite: scale tail undefined");
    return right_tail().log_tail(x);
}

double ScaleSpeed::green_zero(double x, double y) const {
    Limit sr = scale_limit(Endpoint::Right);
    if (!sr.is_finite())
        throw ModelError("mean criterion inapplicable: S(r) is not finite");
    return std::exp(log_scale_tail_right(std::max(x, y)));
}

}  // namespace perpetua
