#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "perpetua/diffusion.hpp"
#include "perpetua/timechange.hpp"

namespace perpetua {

class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimConfig {
    double dt = 1e-4;
    long n_paths = 1000;
    std::uint64_t seed = 1;
    double y_start = 0.0;
    double y_target = 1.0;
    double t_max = 1e9;              // bailout horizon
    double boundary_guard = 1e-6;    // reflect band above an inaccessible left end
    std::optional<double> y_lower;   // absorb below this level instead of guarding
    std::optional<double> a_max;     // stop once the functional reaches this (censor)
    int threads = 0;                 // 0: PERPETUA_THREADS or hardware
};

enum class PathOutcome { HitTarget, HitLower, Timeout, FunctionalCap, Exploded };

struct PathSample {
    double hit_time;    // crossing time (linear-interpolated) or censor time
    double functional;  // accumulated int f(Y) dt at stop
    PathOutcome outcome;

    bool hit() const { return outcome == PathOutcome::HitTarget; }
};

struct SimReport {
    std::vector<PathSample> samples;
    long n_hit = 0;
    double mean_hit_time = kNaN;     // over paths that hit the target
    double stderr_hit_time = kNaN;
    double mean_functional = kNaN;   // over all paths
    double stderr_functional = kNaN;
    long guard_events = 0;
    long long total_steps = 0;
    std::optional<std::pair<double, std::pair<long, long>>> ks_against;
};

// Euler-Maruyama paths of Y with trapezoidal accumulation of int f(Y) dt,
// stopping at the first crossing of y_target. Deterministic given the seed:
// per-path counter-based streams, independent of thread count.
SimReport run_Y(const Diffusion& d, const Expression& f, const SimConfig& cfg);

// Same scheme for the unit-dispersion time-changed diffusion Z, from
// g(y_start) to g(y_target).
SimReport run_Z(const TimeChanged& tc, const SimConfig& cfg);

// Two-sample Kolmogorov-Smirnov statistic; requires n, m >= 100.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Asymptotic two-sample critical value at significance alpha.
double ks_critical(double alpha, std::size_t n, std::size_t m);

// Growth diagnostic of the accumulated functional at increasing horizons.
struct GrowthDiagnostic {
    std::vector<double> horizons;
    std::vector<double> medians;
    std::vector<double> p90s;
    bool plateau = false;  // successive medians changed < 1 percent at the end
};

GrowthDiagnostic empirical_finiteness(const Diffusion& d, const Expression& f,
                                      const SimConfig& cfg,
                                      const std::vector<double>& horizons);

}  // namespace perpetua
