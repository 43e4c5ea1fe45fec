#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "perpetua/diffusion.hpp"

namespace perpetua {

// The time-changed diffusion Z with unit dispersion obtained from Y and a
// positive integrand f through g' = sqrt(f)/sigma, g(x0) = 0:
//   Z_t = g(Y_{a_t}),   dZ = dW + G(g^{-1}(Z)) dt,
//   G = (sigma^2 g''/2 + b g') / f.
// g is tabulated on an adaptively refined monotone grid (cubic Hermite
// interpolation between nodes); g^{-1} is bisection on the table plus Newton
// with the analytic g'.
class TimeChanged {
public:
    TimeChanged(Diffusion source, Expression f, QuadConfig qcfg = {});

    const Diffusion& source() const { return src_; }
    const Expression& f() const { return f_; }

    double g(double x) const;        // exact (memoized quadrature)
    double g_interp(double x) const; // table interpolant, error < 1e-8
    double g_prime(double x) const;  // sqrt(f)/sigma, analytic
    double g_inv(double z) const;

    double drift_at_x(double x) const;  // G(x)
    double drift(double z) const;       // G(g^{-1}(z)), the drift of Z

    Limit z_left() const;   // g(l)
    Limit z_right() const;  // g(r)

    // B^Z(beta) = 2 int_0^beta G(g^{-1}(z)) dz
    double B_Z(double beta) const;

    // table export (node coordinates and values) for reports
    std::vector<std::pair<double, double>> table_snapshot() const;

    // Immutable snapshot of the inverse table for lock-free evaluation in
    // simulation inner loops. Covers the table range at freeze time.
    struct Frozen {
        std::vector<double> x, g, gp;
        Expression G;

        bool covers(double z) const { return z >= g.front() && z <= g.back(); }
        double g_inv(double z) const;
        double drift(double z) const { return G.eval_raw(g_inv(z)); }
    };
    Frozen freeze() const;

private:
    struct TableNode {
        double x, g, gp;
    };

    TableNode node_at(double x) const;
    void ensure_cover(double x) const;
    void ensure_cover_z(double z) const;
    void refine(std::vector<TableNode>& nodes) const;
    double hermite(const TableNode& n0, const TableNode& n1, double x) const;

    Diffusion src_;
    Expression f_;
    Expression gp_expr_;   // sqrt(f)/sigma
    Expression gpp_expr_;  // d/dx of the above
    Expression G_expr_;    // (sigma^2 g''/2 + b g')/f
    QuadConfig qcfg_;
    std::shared_ptr<Antiderivative> g_exact_;
    mutable std::shared_ptr<TabulatedAntiderivative> bz_;
    mutable std::mutex mu_;
    mutable std::vector<TableNode> table_;
    mutable Limit zlim_[2];
    mutable std::once_flag zflag_[2];
};

// Builds the time change; throws NonDifferentiableError when sqrt(f)/sigma is
// not symbolically differentiable and ModelError when f is not positive.
std::shared_ptr<TimeChanged> transform(const Diffusion& d, const Expression& f,
                                       QuadConfig qcfg = {});

// The paired problems of the Lamperti representation: a Brownian motion with
// drift mu and integrand g_fn versus a Bessel process of dimension 2(1+mu)
// started at 1 with integrand u^-2 g_fn(log u). Their finiteness verdicts
// must agree.
struct LampertiPair {
    Diffusion bm;
    Expression bm_integrand;
    Diffusion bessel;
    Expression bessel_integrand;
    double dimension;  // 2 (1 + mu)
};

LampertiPair lamperti_pair(double mu, const Expression& g_fn);

}  // namespace perpetua
