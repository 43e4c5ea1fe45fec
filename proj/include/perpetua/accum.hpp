#pragma once

#include <mutex>
#include <vector>

#include "perpetua/quadrature.hpp"

namespace perpetua {

// Memoized antiderivative  F(x) = int_{x0}^x h(u) du  on an interval (lo,hi).
// Values are cached at canonical anchor points laddering geometrically from
// x0 toward each endpoint, so results do not depend on query order and
// concurrent calls return what single-threaded execution would.
class Antiderivative {
public:
    Antiderivative(Fn h, double x0, double lo, double hi, QuadConfig cfg = {});

    double operator()(double x) const;
    double base() const { return x0_; }

private:
    double anchor_up(int k) const;
    double anchor_dn(int k) const;
    void extend_up(int k) const;
    void extend_dn(int k) const;

    Fn h_;
    double x0_, lo_, hi_;
    QuadConfig cfg_;
    mutable std::mutex mu_;
    mutable std::vector<double> up_val_;  // up_val_[k] = F(anchor_up(k))
    mutable std::vector<double> dn_val_;
};

// Antiderivative with a cubic-Hermite node table refined to `tol`, so that
// repeated evaluation costs a table lookup instead of a quadrature. Slopes
// at the nodes are exact (they are the integrand). Used for potentials that
// sit inside verdict/ODE inner loops.
class TabulatedAntiderivative {
public:
    TabulatedAntiderivative(Fn h, double x0, double lo, double hi, QuadConfig cfg = {},
                            double tol = 1e-9);

    double operator()(double x) const;

private:
    struct Node {
        double x, F, d;
    };
    void cover(double x) const;
    void refine_segment(std::vector<Node>& seg) const;

    Fn h_;
    Antiderivative exact_;
    double x0_, lo_, hi_, tol_;
    mutable std::mutex mu_;
    mutable std::vector<Node> nodes_;
};

// log of the cumulative integral  M(x) = int_{base}^x w(u) exp(phi(u)) du
// toward endpoint `end`, computed segment-by-segment with per-segment
// rescaling so that exp never overflows. Monotone in x; may grow without
// bound (log stays representable).
class LogCumulative {
public:
    LogCumulative(Fn w, Fn phi, double base, double end, QuadConfig cfg = {});

    // log M(x); -inf when the mass up to x is zero.
    double log_cum(double x) const;

private:
    double anchor(int k) const;
    void extend(int k) const;
    double log_segment(double p, double q) const;

    Fn w_, phi_;
    double base_, end_;
    QuadConfig cfg_;
    mutable std::mutex mu_;
    mutable std::vector<double> log_val_;  // log M(anchor(k))
};

// log of the tail integral  D(x) = int_x^{end} w(u) exp(phi(u)) du  for a
// tail that must converge. The ladder toward `end` is built eagerly at
// construction and is immutable afterwards, so evaluation is lock-free and
// deterministic.
class LogTailIntegral {
public:
    LogTailIntegral(Fn w, Fn phi, double start, double end, QuadConfig cfg = {},
                    int max_segments = 600);

    bool converged() const { return converged_; }
    const std::string& failure() const { return failure_; }

    // log D(x) for x between start and end. Throws QuadratureError if the
    // tail failed to converge.
    double log_tail(double x) const;

private:
    double anchor(int k) const;
    double log_segment(double p, double q) const;

    Fn w_, phi_;
    double start_, end_;
    QuadConfig cfg_;
    bool converged_ = false;
    std::string failure_;
    std::vector<double> anchors_;
    std::vector<double> log_suffix_;  // log_suffix_[k] = log int_{anchors_[k]}^{end}
};

// log(exp(a) + exp(b)) without overflow; -inf absorbs.
double log_add(double a, double b);

}  // namespace perpetua
