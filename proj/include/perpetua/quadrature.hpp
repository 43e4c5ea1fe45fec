#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace perpetua {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Fn = std::function<double(double)>;

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Decision { Finite, Infinite, Inconclusive };

const char* to_string(Decision d);

// Outcome of an improper-integral finiteness test. The partial integrals
// F_k over nested cutoffs T_k are the evidence; they are nondecreasing
// because the integrand is required to be nonnegative.
struct Verdict {
    Decision decision = Decision::Inconclusive;
    double value = kNaN;  // estimate including tail bound, when Finite
    std::vector<std::pair<double, double>> cutoffs;  // (T_k, F_k)
    double growth_ratio = kNaN;  // fitted ratio of successive increments
    std::string rationale;

    bool finite() const { return decision == Decision::Finite; }
    bool infinite() const { return decision == Decision::Infinite; }
    bool conclusive() const { return decision != Decision::Inconclusive; }
};

struct QuadConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_intervals = 1 << 20;
};

// Increment-ratio classifier over geometric cutoff levels. Increments that
// shrink with ratio <= theta_finite over `window` consecutive levels (and a
// geometric tail bound below tail_rel of the partial sum) give Finite;
// ratios >= theta_infinite over the window, a partial sum above cap, or an
// overflowing increment give Infinite; anything else is Inconclusive.
struct ClassifierConfig {
    double theta_finite = 0.95;
    double theta_infinite = 0.99;
    int window = 6;
    double cap = 1e12;
    double tail_rel = 1e-3;
    int max_levels = 160;           // toward an infinite endpoint
    int max_levels_finite = 45;     // half-distance ladder; double runs out near 2^-52
};

// Proper adaptive Gauss-Kronrod (G7/K15) integral of h on [a,b], a<b finite.
// Throws QuadratureError if the tolerance cannot be met or the integrand
// evaluates non-finite.
double integrate(const Fn& h, double a, double b, const QuadConfig& cfg = {});

// Internal-friendly variant that reports instead of throwing.
struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = false;
    bool nonfinite = false;
};
QuadResult integrate_result(const Fn& h, double a, double b, const QuadConfig& cfg = {});

// Finiteness of the improper integral of h >= 0 between `a` and `end`.
// `end` may be +-inf or finite, and may lie on either side of `a`.
Verdict improper_verdict(const Fn& h, double a, double end,
                         const ClassifierConfig& ccfg = {},
                         const QuadConfig& qcfg = {});

// Finiteness of  int^{end} outer(alpha) dalpha  int_{base}^{alpha} inner(beta) dbeta
// with nonnegative densities. Uses the Fubini form
// int^{end} inner(beta) (O(end) - O(beta)) dbeta when O(end) is finite,
// otherwise direct nested cutoffs.
Verdict double_verdict(const Fn& outer, const Fn& inner, double end, double base,
                       const ClassifierConfig& ccfg = {},
                       const QuadConfig& qcfg = {});

}  // namespace perpetua
