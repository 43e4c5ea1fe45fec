#pragma once

#include <memory>
#include <optional>
#include <string>

#include "perpetua/boundary.hpp"
#include "perpetua/diffusion.hpp"
#include "perpetua/timechange.hpp"

namespace perpetua {

// Conclusive verdicts from the two equivalent routes disagreed; this means a
// numerical defect, not a property of the model.
class RouteDisagreement : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct MeanFunctional {
    Decision decision = Decision::Inconclusive;
    double value = kNaN;  // finite value, +inf when Infinite
    Verdict right_tail;   // evidence toward r
    Verdict left_tail;    // evidence toward l
};

struct FinitenessReport {
    Verdict verdict_Y;                        // direct route on Y
    std::optional<Verdict> verdict_Z;         // exit test of the time change
    std::optional<BoundaryClass> boundary_of_Z;
    std::string z_note;                       // why the Z route is unavailable
    bool agree = true;  // false only records a contradiction; analyze() throws instead
    MeanFunctional mean;

    // the decision the report stands behind (the Y route)
    Decision decision() const { return verdict_Y.decision; }
};

// Checks that the model is transient toward r in the operational sense:
// S(r) < inf and (S(l) = -inf or l inaccessible). Throws ModelError.
void require_transient_right(const ScaleSpeed& ss);

// Direct route: verdict for  int^r (S(r)-S(v)) f(v) m(dv).
Verdict finiteness_via_Y(const ScaleSpeed& ss, const Expression& f,
                         const ClassifierConfig& ccfg = {});

// Time-change route: verdict for the Feller exit integral of Z at g(r),
// plus the full boundary classification of that endpoint.
std::pair<Verdict, BoundaryClass> finiteness_via_Z(const TimeChanged& tc,
                                                   const ClassifierConfig& ccfg = {});

// Mean of the perpetual functional started at x:
//   int_l^r G0(x,y) f(y) m(y) dy,  G0(x,y) = S(r) - S(x v y).
MeanFunctional mean_functional(const ScaleSpeed& ss, const Expression& f, double x,
                               const ClassifierConfig& ccfg = {});

// Composition of both routes, the mean, and the Z boundary class. Throws
// RouteDisagreement if the two conclusive verdicts differ.
FinitenessReport analyze(const Diffusion& d, const Expression& f, double x,
                         const ClassifierConfig& ccfg = {});

}  // namespace perpetua
