#include "perpetua/timechange.hpp"

#include <algorithm>
#include <cmath>

namespace perpetua {

namespace {

constexpr double kTableTol = 1e-8;
constexpr int kMaxLadderNodes = 400;

Limit limit_of_density(const Fn& dens, double from, double end, bool left,
                       const QuadConfig& qcfg) {
    Verdict v = improper_verdict(dens, from, end, {}, qcfg);
    switch (v.decision) {
        case Decision::Finite: return Limit::finite(left ? -v.value : v.value);
        case Decision::Infinite: return left ? Limit::minus_inf() : Limit::plus_inf();
        default: return Limit::indeterminate();
    }
}

double ladder_next(double origin, double e, double current) {
    // next canonical anchor strictly past `current`, toward e
    if (std::isinf(e)) {
        const double d = std::fabs(current - origin);
        double step = 1.0;
        while (step <= d) step *= 2.0;
        return e > 0 ? origin + (2.0 * step - 1.0) : origin - (2.0 * step - 1.0);
    }
    return 0.5 * (current + e);
}

}  // namespace

TimeChanged::TimeChanged(Diffusion source, Expression f, QuadConfig qcfg)
    : src_(std::move(source)), f_(f.simplified()), qcfg_(qcfg) {
    for (double x : probe_grid(src_, 16)) {
        const double fv = f_.eval_raw(x);
        if (!(fv > 0.0))
            throw ModelError("time change requires f > 0 on (l,r); f(" +
                             std::to_string(x) + ") = " + std::to_string(fv));
    }
    gp_expr_ = (perpetua::sqrt(f_) / src_.sigma).simplified();
    gpp_expr_ = gp_expr_.differentiate();  // throws NonDifferentiableError
    G_expr_ = ((Expression::constant(0.5) * src_.sigma * src_.sigma * gpp_expr_ +
                src_.b * gp_expr_) /
               f_)
                  .simplified();

    const Expression gp = gp_expr_;
    g_exact_ = std::make_shared<Antiderivative>(
        [gp](double u) { return gp.eval_raw(u); }, src_.x0, src_.l, src_.r, qcfg_);
    table_.push_back({src_.x0, 0.0, gp_expr_.eval_raw(src_.x0)});
}

double TimeChanged::g(double x) const { return (*g_exact_)(x); }

double TimeChanged::g_prime(double x) const { return gp_expr_.eval_raw(x); }

double TimeChanged::drift_at_x(double x) const { return G_expr_.eval_raw(x); }

double TimeChanged::drift(double z) const { return drift_at_x(g_inv(z)); }

double TimeChanged::hermite(const TableNode& n0, const TableNode& n1, double x) const {
    const double h = n1.x - n0.x;
    const double t = (x - n0.x) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * n0.g + (t3 - 2 * t2 + t) * h * n0.gp +
           (-2 * t3 + 3 * t2) * n1.g + (t3 - t2) * h * n1.gp;
}

void TimeChanged::refine(std::vector<TableNode>& nodes) const {
    // nodes holds exactly two endpoints; subdivide until the midpoint
    // interpolation error is below tolerance
    struct Walker {
        const TimeChanged* tc;
        std::vector<TableNode>& out;
        void walk(const TableNode& a, const TableNode& b, int depth) {
            const double mx = 0.5 * (a.x + b.x);
            if (depth >= 40 || mx <= a.x || mx >= b.x) return;
            const double gm = (*tc->g_exact_)(mx);
            const double im = tc->hermite(a, b, mx);
            if (std::fabs(im - gm) <= kTableTol * std::max(1.0, std::fabs(gm))) return;
            TableNode m{mx, gm, tc->gp_expr_.eval_raw(mx)};
            walk(a, m, depth + 1);
            out.push_back(m);
            walk(m, b, depth + 1);
        }
    };
    std::vector<TableNode> interior;
    Walker w{this, interior};
    w.walk(nodes[0], nodes[1], 0);
    nodes.insert(nodes.begin() + 1, interior.begin(), interior.end());
}

TimeChanged::TableNode TimeChanged::node_at(double x) const {
    return {x, (*g_exact_)(x), gp_expr_.eval_raw(x)};
}

void TimeChanged::ensure_cover(double x) const {
    if (x <= src_.l || x >= src_.r)
        throw ModelError("time-change query outside (l,r)");
    int guard = 0;
    while (x > table_.back().x) {
        const double xb = table_.back().x;
        double anchor = ladder_next(src_.x0, src_.r, xb);
        if (!(anchor > xb && anchor < src_.r)) break;  // resolution exhausted
        std::vector<TableNode> seg{table_.back(), node_at(anchor)};
        refine(seg);
        table_.insert(table_.end(), seg.begin() + 1, seg.end());
        if (++guard > kMaxLadderNodes)
            throw ModelError("time-change table exhausted its node budget");
    }
    guard = 0;
    while (x < table_.front().x) {
        const double xf = table_.front().x;
        double anchor = ladder_next(src_.x0, src_.l, xf);
        if (!(anchor < xf && anchor > src_.l)) break;
        std::vector<TableNode> seg{node_at(anchor), table_.front()};
        refine(seg);
        table_.insert(table_.begin(), seg.begin(), seg.end() - 1);
        if (++guard > kMaxLadderNodes)
            throw ModelError("time-change table exhausted its node budget");
    }
}

double TimeChanged::g_interp(double x) const {
    std::lock_guard<std::mutex> lock(mu_);
    ensure_cover(x);
    auto it = std::upper_bound(table_.begin(), table_.end(), x,
                               [](double v, const TableNode& n) { return v < n.x; });
    if (it == table_.begin()) return table_.front().g;
    if (it == table_.end()) return table_.back().g;
    return hermite(*(it - 1), *it, x);
}

void TimeChanged::ensure_cover_z(double z) const {
    // extend the x-table until its g-range brackets z
    int guard = 0;
    while (z > table_.back().g) {
        const double xb = table_.back().x;
        double nx = ladder_next(src_.x0, src_.r, xb);
        if (!std::isinf(src_.r)) nx = std::min(nx, 0.5 * (xb + src_.r));
        if (nx <= xb)
            throw ModelError("g_inv target beyond representable range toward r");
        ensure_cover(nx);
        if (++guard > kMaxLadderNodes)
            throw ModelError("g_inv target appears to exceed g(r)");
    }
    guard = 0;
    while (z < table_.front().g) {
        const double xf = table_.front().x;
        double nx = ladder_next(src_.x0, src_.l, xf);
        if (!std::isinf(src_.l)) nx = std::max(nx, 0.5 * (xf + src_.l));
        if (nx >= xf)
            throw ModelError("g_inv target beyond representable range toward l");
        ensure_cover(nx);
        if (++guard > kMaxLadderNodes)
            throw ModelError("g_inv target appears to be below g(l)");
    }
}

double TimeChanged::g_inv(double z) const {
    std::lock_guard<std::mutex> lock(mu_);
    ensure_cover_z(z);
    auto it = std::upper_bound(table_.begin(), table_.end(), z,
                               [](double v, const TableNode& n) { return v < n.g; });
    if (it == table_.begin()) return table_.front().x;
    if (it == table_.end()) return table_.back().x;
    const TableNode& n0 = *(it - 1);
    const TableNode& n1 = *it;
    double lo = n0.x, hi = n1.x;
    double x = n0.x + (z - n0.g) / std::max(n1.g - n0.g, 1e-300) * (n1.x - n0.x);
    for (int i = 0; i < 60; ++i) {
        const double gv = hermite(n0, n1, x) - z;
        if (gv == 0.0) break;
        if (gv > 0.0)
            hi = x;
        else
            lo = x;
        const double dv = gp_expr_.eval_raw(x);
        double nxt = dv > 0.0 ? x - gv / dv : 0.5 * (lo + hi);
        if (!(nxt >= lo && nxt <= hi)) nxt = 0.5 * (lo + hi);  // bisection fallback
        if (std::fabs(nxt - x) <= 1e-15 * (std::fabs(x) + 1.0)) {
            x = nxt;
            break;
        }
        x = nxt;
    }
    return x;
}

Limit TimeChanged::z_left() const {
    std::call_once(zflag_[0], [this] {
        const Expression gp = gp_expr_;
        zlim_[0] = limit_of_density([gp](double u) { return gp.eval_raw(u); }, src_.x0,
                                    src_.l, true, qcfg_);
    });
    return zlim_[0];
}

Limit TimeChanged::z_right() const {
    std::call_once(zflag_[1], [this] {
        const Expression gp = gp_expr_;
        zlim_[1] = limit_of_density([gp](double u) { return gp.eval_raw(u); }, src_.x0,
                                    src_.r, false, qcfg_);
    });
    return zlim_[1];
}

double TimeChanged::B_Z(double beta) const {
    std::shared_ptr<TabulatedAntiderivative> local;
    {
        std::lock_guard<std::mutex> lock(mu_);
        local = bz_;
    }
    if (!local) {
        if (!z_left().conclusive() || !z_right().conclusive())
            throw ModelError("z-interval limits of the time change are inconclusive");
        const double zl = z_left().as_double();
        const double zr = z_right().as_double();
        // built unlocked: the integrand takes the table mutex through g_inv
        auto fresh = std::make_shared<TabulatedAntiderivative>(
            [this](double z) { return 2.0 * drift(z); }, 0.0, zl, zr, qcfg_);
        std::lock_guard<std::mutex> lock(mu_);
        if (!bz_) bz_ = fresh;
        local = bz_;
    }
    return (*local)(beta);
}

std::vector<std::pair<double, double>> TimeChanged::table_snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::pair<double, double>> out;
    out.reserve(table_.size());
    for (const auto& n : table_) out.emplace_back(n.x, n.g);
    return out;
}

namespace {

double hermite_nodes(double x0, double g0, double d0, double x1, double g1, double d1,
                     double x) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * g0 + (t3 - 2 * t2 + t) * h * d0 +
           (-2 * t3 + 3 * t2) * g1 + (t3 - t2) * h * d1;
}

}  // namespace

double TimeChanged::Frozen::g_inv(double z) const {
    const auto it = std::upper_bound(g.begin(), g.end(), z);
    std::size_t i = it == g.begin() ? 1 : static_cast<std::size_t>(it - g.begin());
    if (i >= g.size()) i = g.size() - 1;
    const double x0 = x[i - 1], g0 = g[i - 1], d0 = gp[i - 1];
    const double x1 = x[i], g1 = g[i], d1 = gp[i];
    double lo = x0, hi = x1;
    double xx = x0 + (z - g0) / std::max(g1 - g0, 1e-300) * (x1 - x0);
    for (int k = 0; k < 40; ++k) {
        const double gv = hermite_nodes(x0, g0, d0, x1, g1, d1, xx) - z;
        if (gv == 0.0) break;
        if (gv > 0.0)
            hi = xx;
        else
            lo = xx;
        const double slope =
            d0 + (d1 - d0) * (xx - x0) / (x1 - x0);  // interpolated g'
        double nxt = slope > 0.0 ? xx - gv / slope : 0.5 * (lo + hi);
        if (!(nxt >= lo && nxt <= hi)) nxt = 0.5 * (lo + hi);
        if (std::fabs(nxt - xx) <= 1e-15 * (std::fabs(xx) + 1.0)) {
            xx = nxt;
            break;
        }
        xx = nxt;
    }
    return xx;
}

TimeChanged::Frozen TimeChanged::freeze() const {
    std::lock_guard<std::mutex> lock(mu_);
    Frozen f;
    f.x.reserve(table_.size());
    f.g.reserve(table_.size());
    f.gp.reserve(table_.size());
    for (const auto& n : table_) {
        f.x.push_back(n.x);
        f.g.push_back(n.g);
        f.gp.push_back(n.gp);
    }
    f.G = G_expr_;
    return f;
}

std::shared_ptr<TimeChanged> transform(const Diffusion& d, const Expression& f,
                                       QuadConfig qcfg) {
    return std::make_shared<TimeChanged>(d, f, qcfg);
}

LampertiPair lamperti_pair(double mu, const Expression& g_fn) {
    if (!(mu > 0.0)) throw ModelError("lamperti_pair requires mu > 0");
    LampertiPair p;
    p.dimension = 2.0 * (1.0 + mu);
    p.bm = Diffusion::make(-kInf, kInf, Expression::constant(mu),
                           Expression::constant(1.0), 0.0);
    p.bm_integrand = g_fn;
    Expression x = Expression::variable();
    Expression delta_m1 = Expression::constant(p.dimension - 1.0);
    p.bessel = Diffusion::make(0.0, kInf, delta_m1 / (Expression::constant(2.0) * x),
                               Expression::constant(1.0), 1.0);
    p.bessel_integrand =
        (pow(x, Expression::constant(-2.0)) * g_fn.substitute_var(log(x))).simplified();
    return p;
}

}  // namespace perpetua
