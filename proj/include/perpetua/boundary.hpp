#pragma once

#include <vector>

#include "perpetua/diffusion.hpp"

namespace perpetua {

enum class BoundaryKind { Regular, Exit, Entrance, Natural, Inconclusive };
const char* to_string(BoundaryKind k);

// Feller classification of an endpoint from the two double integrals
//   I = int^e S(dalpha) int^alpha m(dbeta)   (toward the endpoint)
//   J = int^e m(dalpha) int^alpha S(dbeta)
// (I,J): (F,F) Regular, (F,inf) Exit, (inf,F) Entrance, (inf,inf) Natural.
struct BoundaryClass {
    Endpoint endpoint;
    BoundaryKind kind;
    Verdict I;
    Verdict J;
};

BoundaryClass classify(const ScaleSpeed& ss, Endpoint end,
                       const ClassifierConfig& ccfg = {});

// Feller double integral toward `end` for densities written as
// w(u) exp(phi(u)); computed through log-space tails/cumulatives so that
// exp(+-B) saturation cannot poison the integrands. Used for both legs of
// classify and for the exit test of the time-changed diffusion.
Verdict potential_double_verdict(const Fn& phi_outer, const Fn& w_outer,
                                 const Fn& phi_inner, const Fn& w_inner, double base,
                                 double end, const ClassifierConfig& ccfg = {},
                                 const QuadConfig& qcfg = {});

// E_x[H_{a,b}], the expected exit time from (a,b), via the Green kernel of
// the killed diffusion: int_a^b Ghat(x,z) m(z) dz.
double expected_exit_time(const ScaleSpeed& ss, double a, double b, double x);

// Same kernel with a state weight: E_x[ int_0^{H_ab} f(Y_s) ds ].
double mean_additive_until_exit(const ScaleSpeed& ss, double a, double b, double x,
                                const Fn& f);

// Increasing lambda-eigenfunction psi of (d/dm)(d/dS) u = lambda u, tabulated
// on `grid` (strictly increasing). Only ratios of psi are meaningful; log_u
// is the robust representation. v = du/dS.
struct EigenTable {
    std::vector<double> x;
    std::vector<double> log_u;
    std::vector<double> log_v;  // v = du/dS > 0, same scale as u
    std::vector<double> u;      // exp(log_u - max log_u), normalized to peak 1

    // psi(x_i)/psi(x_j)
    double ratio(std::size_t i, std::size_t j) const;
};

EigenTable increasing_eigenfunction(const ScaleSpeed& ss, double lambda,
                                    std::vector<double> grid,
                                    double x_start = kNaN, double v0 = 1e-8);

}  // namespace perpetua
