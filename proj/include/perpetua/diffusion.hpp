#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "perpetua/accum.hpp"
#include "perpetua/expr.hpp"
#include "perpetua/quadrature.hpp"

namespace perpetua {

// Invalid model specification, or a criterion that does not apply to the
// given model (e.g. S(r) infinite).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Endpoint { Left, Right };

// Extended real with an explicit indeterminate state, for boundary limits.
struct Limit {
    enum class Kind { Finite, PlusInf, MinusInf, Indeterminate };
    Kind kind = Kind::Indeterminate;
    double value = kNaN;

    static Limit finite(double v) { return {Kind::Finite, v}; }
    static Limit plus_inf() { return {Kind::PlusInf, kInf}; }
    static Limit minus_inf() { return {Kind::MinusInf, -kInf}; }
    static Limit indeterminate() { return {Kind::Indeterminate, kNaN}; }

    bool is_finite() const { return kind == Kind::Finite; }
    bool is_inf() const { return kind == Kind::PlusInf || kind == Kind::MinusInf; }
    bool conclusive() const { return kind != Kind::Indeterminate; }
    // value as a double with +-inf for the infinite kinds
    double as_double() const { return value; }
};

// Regular one-dimensional diffusion dY = sigma(Y) dW + b(Y) dt on (l,r),
// with a reference point x0 used to normalize B and S.
struct Diffusion {
    double l = -kInf;
    double r = kInf;
    Expression b;
    Expression sigma;
    double x0 = 0.0;

    // Validates l < x0 < r, binds parameters, and probes sigma > 0 on a
    // log-spaced interior grid. Throws ModelError.
    static Diffusion make(double l, double r, Expression b, Expression sigma, double x0,
                          const Bindings& params = {});

    bool contains(double x) const { return x > l && x < r; }
};

// n interior probe points on each side of x0, laddering geometrically
// toward the endpoints.
std::vector<double> probe_grid(const Diffusion& d, int n_per_side);

// Scale and speed machinery of a diffusion:
//   B(x)  = 2 int_{x0}^x b/sigma^2,           B(x0) = 0
//   s(x)  = exp(-B(x))        (scale density)
//   m(x)  = 2 exp(B(x))/sigma^2(x)  (speed density)
//   S(x)  = int_{x0}^x s(u) du,               S(x0) = 0
// B and S memoize on canonical anchor ladders; all methods are safe to call
// concurrently and return what single-threaded execution would.
class ScaleSpeed {
public:
    explicit ScaleSpeed(Diffusion d, QuadConfig qcfg = {});

    const Diffusion& model() const { return d_; }

    double B(double x) const;
    double scale_density(double x) const;
    double speed_density(double x) const;
    double sigma2(double x) const;
    double S(double x) const;

    // Limit of S at an endpoint, decided by the improper-integral machinery.
    Limit scale_limit(Endpoint e) const;

    // log of the scale tail S(r) - S(x), stable where the plain difference
    // cancels or underflows. Requires S(r) finite (ModelError otherwise).
    double log_scale_tail_right(double x) const;

    // Green kernel G0(x,y) = S(r) - S(max(x,y)) of the transient diffusion.
    // Requires S(r) finite.
    double green_zero(double x, double y) const;

    QuadConfig quad_config() const { return qcfg_; }

private:
    const LogTailIntegral& right_tail() const;

    Diffusion d_;
    QuadConfig qcfg_;
    std::shared_ptr<TabulatedAntiderivative> B_;
    std::shared_ptr<Antiderivative> S_;
    mutable std::once_flag tail_flag_;
    mutable std::shared_ptr<LogTailIntegral> tail_;
    mutable std::once_flag limit_flag_[2];
    mutable Limit limits_[2];
};

}  // namespace perpetua
