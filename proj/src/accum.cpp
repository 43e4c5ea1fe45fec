#include "perpetua/accum.hpp"

#include <algorithm>
#include <cmath>

namespace perpetua {

double log_add(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

namespace {

// Canonical anchor ladder from `origin` toward endpoint `e`: doubling
// distances for an infinite endpoint, half-remaining-distance steps for a
// finite one. anchor(0) == origin always.
double ladder_at(double origin, double e, int k) {
    if (k <= 0) return origin;
    if (std::isinf(e)) {
        const double step = std::ldexp(1.0, k) - 1.0;
        return e > 0 ? origin + step : origin - step;
    }
    return e - (e - origin) * std::ldexp(1.0, -k);
}

// Largest k with anchor(k) between origin and x (nearest anchor on the
// origin side of x). Stops ascending when anchors collide at double
// resolution near a finite endpoint.
int ladder_locate(double origin, double e, double x) {
    const double d = std::fabs(x - origin);
    if (d == 0.0) return 0;
    int k;
    if (std::isinf(e)) {
        k = static_cast<int>(std::floor(std::log2(d + 1.0)));
    } else {
        const double q = std::fabs(e - x) / std::fabs(e - origin);
        k = q > 0.0 ? static_cast<int>(std::floor(-std::log2(q))) : 1080;
    }
    k = std::clamp(k, 0, 1080);
    auto dist = [&](int j) { return std::fabs(ladder_at(origin, e, j) - origin); };
    while (k > 0 && dist(k) > d) --k;
    for (;;) {
        const double next = ladder_at(origin, e, k + 1);
        if (next == ladder_at(origin, e, k)) break;  // resolution exhausted
        if (std::fabs(next - origin) > d) break;
        ++k;
    }
    return k;
}

double checked_segment(const Fn& h, double a, double b, const QuadConfig& cfg) {
    if (a == b) return 0.0;
    QuadResult r = integrate_result(h, std::min(a, b), std::max(a, b), cfg);
    if (r.nonfinite)
        throw QuadratureError("integrand non-finite on [" + std::to_string(a) + ", " +
                              std::to_string(b) + "]");
    if (!r.converged && r.error > 1e-5 * std::max(std::fabs(r.value), 1.0))
        throw QuadratureError("quadrature failed on [" + std::to_string(a) + ", " +
                              std::to_string(b) + "]");
    return r.value;
}

}  // namespace

// ---------------------------------------------------------------------------
// Antiderivative

Antiderivative::Antiderivative(Fn h, double x0, double lo, double hi, QuadConfig cfg)
    : h_(std::move(h)), x0_(x0), lo_(lo), hi_(hi), cfg_(cfg) {
    up_val_.push_back(0.0);
    dn_val_.push_back(0.0);
}

double Antiderivative::anchor_up(int k) const { return ladder_at(x0_, hi_, k); }
double Antiderivative::anchor_dn(int k) const { return ladder_at(x0_, lo_, k); }

void Antiderivative::extend_up(int k) const {
    while (static_cast<int>(up_val_.size()) <= k) {
        const int j = static_cast<int>(up_val_.size());
        up_val_.push_back(up_val_.back() +
                          checked_segment(h_, anchor_up(j - 1), anchor_up(j), cfg_));
    }
}

void Antiderivative::extend_dn(int k) const {
    while (static_cast<int>(dn_val_.size()) <= k) {
        const int j = static_cast<int>(dn_val_.size());
        dn_val_.push_back(dn_val_.back() -
                          checked_segment(h_, anchor_dn(j), anchor_dn(j - 1), cfg_));
    }
}

double Antiderivative::operator()(double x) const {
    if (x == x0_) return 0.0;
    std::lock_guard<std::mutex> lock(mu_);
    if (x > x0_) {
        const int k = ladder_locate(x0_, hi_, x);
        extend_up(k);
        return up_val_[k] + checked_segment(h_, anchor_up(k), x, cfg_);
    }
    const int k = ladder_locate(x0_, lo_, x);
    extend_dn(k);
    return dn_val_[k] - checked_segment(h_, x, anchor_dn(k), cfg_);
}

// ---------------------------------------------------------------------------
// TabulatedAntiderivative

namespace {

double hermite_point(double x0, double f0, double d0, double x1, double f1, double d1,
                     double x) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 +
           (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * h * d1;
}

}  // namespace

TabulatedAntiderivative::TabulatedAntiderivative(Fn h, double x0, double lo, double hi,
                                                 QuadConfig cfg, double tol)
    : h_(h), exact_(h, x0, lo, hi, cfg), x0_(x0), lo_(lo), hi_(hi), tol_(tol) {
    nodes_.push_back({x0, 0.0, h_(x0)});
}

void TabulatedAntiderivative::refine_segment(std::vector<Node>& seg) const {
    struct Walker {
        const TabulatedAntiderivative* t;
        std::vector<Node>& out;
        void walk(const Node& a, const Node& b, int depth) {
            const double mx = 0.5 * (a.x + b.x);
            if (depth >= 40 || mx <= a.x || mx >= b.x) return;
            const double fm = t->exact_(mx);
            const double im = hermite_point(a.x, a.F, a.d, b.x, b.F, b.d, mx);
            if (std::fabs(im - fm) <= t->tol_ * std::max(1.0, std::fabs(fm))) return;
            Node m{mx, fm, t->h_(mx)};
            walk(a, m, depth + 1);
            out.push_back(m);
            walk(m, b, depth + 1);
        }
    };
    std::vector<Node> interior;
    Walker w{this, interior};
    w.walk(seg[0], seg[1], 0);
    seg.insert(seg.begin() + 1, interior.begin(), interior.end());
}

void TabulatedAntiderivative::cover(double x) const {
    int guard = 0;
    while (x > nodes_.back().x) {
        const double xb = nodes_.back().x;
        const int k = ladder_locate(x0_, hi_, xb);
        double nx = ladder_at(x0_, hi_, k + 1);
        if (!(nx > xb)) nx = ladder_at(x0_, hi_, k + 2);
        if (!(nx > xb && nx < hi_)) break;
        std::vector<Node> seg{nodes_.back(), {nx, exact_(nx), h_(nx)}};
        refine_segment(seg);
        nodes_.insert(nodes_.end(), seg.begin() + 1, seg.end());
        if (++guard > 500) throw QuadratureError("potential table budget exhausted");
    }
    guard = 0;
    while (x < nodes_.front().x) {
        const double xf = nodes_.front().x;
        const int k = ladder_locate(x0_, lo_, xf);
        double nx = ladder_at(x0_, lo_, k + 1);
        if (!(nx < xf)) nx = ladder_at(x0_, lo_, k + 2);
        if (!(nx < xf && nx > lo_)) break;
        std::vector<Node> seg{{nx, exact_(nx), h_(nx)}, nodes_.front()};
        refine_segment(seg);
        nodes_.insert(nodes_.begin(), seg.begin(), seg.end() - 1);
        if (++guard > 500) throw QuadratureError("potential table budget exhausted");
    }
}

double TabulatedAntiderivative::operator()(double x) const {
    std::lock_guard<std::mutex> lock(mu_);
    cover(x);
    if (x <= nodes_.front().x) return nodes_.front().F + (x - nodes_.front().x) * nodes_.front().d;
    if (x >= nodes_.back().x) return nodes_.back().F + (x - nodes_.back().x) * nodes_.back().d;
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x,
                               [](double v, const Node& n) { return v < n.x; });
    const Node& a = *(it - 1);
    const Node& b = *it;
    return hermite_point(a.x, a.F, a.d, b.x, b.F, b.d, x);
}

// ---------------------------------------------------------------------------
// LogCumulative

LogCumulative::LogCumulative(Fn w, Fn phi, double base, double end, QuadConfig cfg)
    : w_(std::move(w)), phi_(std::move(phi)), base_(base), end_(end), cfg_(cfg) {
    log_val_.push_back(-kInf);
}

double LogCumulative::anchor(int k) const { return ladder_at(base_, end_, k); }

double LogCumulative::log_segment(double p, double q) const {
    if (p == q) return -kInf;
    double ref = -kInf;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) ref = std::max(ref, phi_(p + t * (q - p)));
    if (ref == -kInf || std::isnan(ref)) return -kInf;
    const Fn scaled = [this, ref](double u) {
        const double e = phi_(u) - ref;
        return e < -745.0 ? 0.0 : w_(u) * std::exp(e);
    };
    const double v = checked_segment(scaled, std::min(p, q), std::max(p, q), cfg_);
    if (v <= 0.0) return -kInf;
    return ref + std::log(v);
}

void LogCumulative::extend(int k) const {
    while (static_cast<int>(log_val_.size()) <= k) {
        const int j = static_cast<int>(log_val_.size());
        log_val_.push_back(log_add(log_val_.back(), log_segment(anchor(j - 1), anchor(j))));
    }
}

double LogCumulative::log_cum(double x) const {
    if (x == base_) return -kInf;
    std::lock_guard<std::mutex> lock(mu_);
    const int k = ladder_locate(base_, end_, x);
    extend(k);
    return log_add(log_val_[k], log_segment(anchor(k), x));
}

// ---------------------------------------------------------------------------
// LogTailIntegral

LogTailIntegral::LogTailIntegral(Fn w, Fn phi, double start, double end, QuadConfig cfg,
                                 int max_segments)
    : w_(std::move(w)), phi_(std::move(phi)), start_(start), end_(end), cfg_(cfg) {
    std::vector<double> log_inc;
    double total = -kInf;
    anchors_.push_back(start);
    for (int j = 0; j < max_segments; ++j) {
        const double p = ladder_at(start_, end_, j);
        const double q = ladder_at(start_, end_, j + 1);
        if (p == q || !std::isfinite(q)) {  // ladder exhausted: tail fully covered
            converged_ = true;
            break;
        }
        const double li = log_segment(p, q);
        log_inc.push_back(li);
        anchors_.push_back(q);
        total = log_add(total, li);
        if (j >= 4 && li < total + std::log(1e-15)) {
            converged_ = true;
            break;
        }
    }
    if (!converged_) {
        failure_ = "tail integral did not converge within segment budget "
                   "(divergent or extremely slowly varying)";
        return;
    }
    log_suffix_.assign(anchors_.size(), -kInf);
    for (int k = static_cast<int>(log_inc.size()) - 1; k >= 0; --k)
        log_suffix_[k] = log_add(log_suffix_[k + 1], log_inc[k]);
}

double LogTailIntegral::anchor(int k) const { return ladder_at(start_, end_, k); }

double LogTailIntegral::log_segment(double p, double q) const {
    if (p == q) return -kInf;
    double ref = -kInf;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) ref = std::max(ref, phi_(p + t * (q - p)));
    if (ref == -kInf || std::isnan(ref)) return -kInf;
    const Fn scaled = [this, ref](double u) {
        const double e = phi_(u) - ref;
        return e < -745.0 ? 0.0 : w_(u) * std::exp(e);
    };
    const double v = checked_segment(scaled, std::min(p, q), std::max(p, q), cfg_);
    if (v <= 0.0) return -kInf;
    return ref + std::log(v);
}

double LogTailIntegral::log_tail(double x) const {
    if (!converged_) throw QuadratureError("log_tail: " + failure_);
    if (x == end_) return -kInf;
    const int k = ladder_locate(start_, end_, x);
    const int last = static_cast<int>(anchors_.size()) - 1;
    if (k + 1 <= last) {
        // x lies in [anchor(k), anchor(k+1)): local piece plus cached suffix
        return log_add(log_segment(x, anchors_[k + 1]), log_suffix_[k + 1]);
    }
    // beyond the built frontier: the remaining tail is below the convergence
    // threshold; sum a fresh local ladder without touching shared state
    double total = -kInf;
    double p = x;
    for (int j = k; j < k + 120; ++j) {
        const double q = ladder_at(start_, end_, j + 1);
        if (q == p || !std::isfinite(q)) break;
        const double li = log_segment(p, q);
        total = log_add(total, li);
        if (li < total + std::log(1e-15)) break;
        p = q;
    }
    return total;
}

}  // namespace perpetua
