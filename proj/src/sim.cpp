#include "perpetua/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace perpetua {

namespace {

constexpr double kExplodeGuard = 1e12;
constexpr double kTwoPi = 6.283185307179586476925287;

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Counter-based per-path stream: draw n is a pure function of
// (seed, path_index, n), so results are independent of thread scheduling.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path)
        : key_(mix64(seed ^ mix64(path + 0xD1B54A32D192ED03ULL))) {}

    double uniform() {  // in (0, 1]
        const std::uint64_t r = mix64(key_ + (++ctr_) * 0x9E3779B97F4A7C15ULL);
        return static_cast<double>((r >> 11) + 1) * 0x1.0p-53;
    }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

int thread_count(const SimConfig& cfg) {
    if (cfg.threads > 0) return cfg.threads;
    if (const char* env = std::getenv("PERPETUA_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
}

struct Engine {
    Fn drift, disp, weight;
    double lower_inaccessible;  // reflect above this (l + guard), -inf to disable
};

PathSample simulate_path(const Engine& en, const SimConfig& cfg, std::uint64_t path,
                         long& guard_events, long long& steps) {
    PathRng rng(cfg.seed, path);
    double y = cfg.y_start;
    double t = 0.0;
    double A = 0.0;
    double fy = en.weight(y);
    const double sdt = std::sqrt(cfg.dt);
    for (;;) {
        if (t >= cfg.t_max) return {cfg.t_max, A, PathOutcome::Timeout};
        const double z = rng.normal();
        const double sig = en.disp(y);
        double yn = y + en.drift(y) * cfg.dt + sig * sdt * z;
        ++steps;
        if (std::fabs(yn) > kExplodeGuard) return {t, A, PathOutcome::Exploded};

        // crossing of the target, linearly interpolated inside the step
        if (yn >= cfg.y_target) {
            const double theta = (cfg.y_target - y) / (yn - y);
            const double ft = en.weight(cfg.y_target);
            double a_hit = A + 0.5 * (fy + ft) * theta * cfg.dt;
            double t_hit = t + theta * cfg.dt;
            if (cfg.a_max && a_hit >= *cfg.a_max)
                return {t_hit, *cfg.a_max, PathOutcome::FunctionalCap};
            return {t_hit, a_hit, PathOutcome::HitTarget};
        }
        if (cfg.y_lower && yn <= *cfg.y_lower) {
            const double theta = (y - *cfg.y_lower) / (y - yn);
            const double ft = en.weight(*cfg.y_lower);
            const double a_low = A + 0.5 * (fy + ft) * theta * cfg.dt;
            return {t + theta * cfg.dt, a_low, PathOutcome::HitLower};
        }

        // Brownian-bridge crossing check for excursions between grid points:
        // discrete monitoring alone carries an O(sqrt(dt)) barrier bias that
        // the 3-SE acceptance bands cannot absorb
        const double s2dt = sig * sig * cfg.dt;
        {
            const double arg = -2.0 * (cfg.y_target - y) * (cfg.y_target - yn) / s2dt;
            if (arg > -30.0 && rng.uniform() < std::exp(arg)) {
                const double ft = en.weight(cfg.y_target);
                double a_hit = A + 0.5 * (fy + ft) * cfg.dt;
                if (cfg.a_max && a_hit >= *cfg.a_max)
                    return {t + cfg.dt, *cfg.a_max, PathOutcome::FunctionalCap};
                return {t + cfg.dt, a_hit, PathOutcome::HitTarget};
            }
        }
        if (cfg.y_lower) {
            const double arg = -2.0 * (y - *cfg.y_lower) * (yn - *cfg.y_lower) / s2dt;
            if (arg > -30.0 && rng.uniform() < std::exp(arg)) {
                const double ft = en.weight(*cfg.y_lower);
                return {t + cfg.dt, A + 0.5 * (fy + ft) * cfg.dt, PathOutcome::HitLower};
            }
        }

        if (yn <= en.lower_inaccessible) {
            yn = 2.0 * en.lower_inaccessible - yn;  // reflect
            ++guard_events;
        }
        const double fn = en.weight(yn);
        A += 0.5 * (fy + fn) * cfg.dt;
        if (cfg.a_max && A >= *cfg.a_max)
            return {t + cfg.dt, *cfg.a_max, PathOutcome::FunctionalCap};
        y = yn;
        fy = fn;
        t += cfg.dt;
    }
}

SimReport run_engine(const Engine& en, const SimConfig& cfg) {
    if (!(cfg.dt > 0.0) || cfg.n_paths < 1)
        throw SimError("SimConfig requires dt > 0 and n_paths >= 1");
    SimReport rep;
    rep.samples.resize(static_cast<std::size_t>(cfg.n_paths));
    const int nt = thread_count(cfg);
    std::vector<long> guards(nt, 0);
    std::vector<long long> steps(nt, 0);
    std::vector<std::thread> pool;
    const long chunk = (cfg.n_paths + nt - 1) / nt;
    for (int th = 0; th < nt; ++th) {
        pool.emplace_back([&, th] {
            const long lo = th * chunk;
            const long hi = std::min(cfg.n_paths, lo + chunk);
            for (long i = lo; i < hi; ++i)
                rep.samples[static_cast<std::size_t>(i)] = simulate_path(
                    en, cfg, static_cast<std::uint64_t>(i), guards[th], steps[th]);
        });
    }
    for (auto& t : pool) t.join();
    for (int th = 0; th < nt; ++th) {
        rep.guard_events += guards[th];
        rep.total_steps += steps[th];
    }
    if (std::isfinite(en.lower_inaccessible) && rep.total_steps > 0 &&
        rep.guard_events > 1e-3 * static_cast<double>(rep.total_steps))
        throw SimError("boundary guard events exceeded 0.1% of steps (" +
                       std::to_string(rep.guard_events) + " / " +
                       std::to_string(rep.total_steps) + ")");

    double sh = 0.0, sh2 = 0.0, sf = 0.0, sf2 = 0.0;
    for (const auto& s : rep.samples) {
        if (s.hit()) {
            ++rep.n_hit;
            sh += s.hit_time;
            sh2 += s.hit_time * s.hit_time;
        }
        sf += s.functional;
        sf2 += s.functional * s.functional;
    }
    const double n = static_cast<double>(rep.samples.size());
    rep.mean_functional = sf / n;
    const double varf = std::max(0.0, (sf2 - sf * sf / n) / std::max(1.0, n - 1.0));
    rep.stderr_functional = std::sqrt(varf / n);
    if (rep.n_hit > 1) {
        const double nh = static_cast<double>(rep.n_hit);
        rep.mean_hit_time = sh / nh;
        const double varh = std::max(0.0, (sh2 - sh * sh / nh) / (nh - 1.0));
        rep.stderr_hit_time = std::sqrt(varh / nh);
    }
    return rep;
}

}  // namespace

SimReport run_Y(const Diffusion& d, const Expression& f, const SimConfig& cfg) {
    if (!(d.l < cfg.y_start && cfg.y_start < cfg.y_target && cfg.y_target < d.r))
        throw SimError("run_Y requires l < y_start < y_target < r");
    Engine en;
    const Expression b = d.b, sig = d.sigma, fx = f;
    en.drift = [b](double x) { return b.eval_raw(x); };
    en.disp = [sig](double x) { return sig.eval_raw(x); };
    en.weight = [fx](double x) { return fx.eval_raw(x); };
    en.lower_inaccessible =
        std::isfinite(d.l) && !cfg.y_lower ? d.l + cfg.boundary_guard : -kInf;
    return run_engine(en, cfg);
}

SimReport run_Z(const TimeChanged& tc, const SimConfig& cfg) {
    SimConfig zcfg = cfg;
    zcfg.y_start = tc.g(cfg.y_start);
    zcfg.y_target = tc.g(cfg.y_target);
    if (cfg.y_lower) zcfg.y_lower = tc.g(*cfg.y_lower);

    // warm the inverse table across the plausible wander range, then step
    // through the time change's locked interpolant only on rare excursions
    const double span = std::max(1.0, zcfg.y_target - zcfg.y_start);
    const double typical_wander =
        zcfg.y_start - (4.0 * std::sqrt(std::max(cfg.t_max, 1.0)) + 10.0 * span);
    Limit zl = tc.z_left();
    double cover_lo = typical_wander;
    if (zl.is_finite()) cover_lo = std::max(cover_lo, zl.value * (1.0 - 1e-9) + 1e-12);
    try {
        tc.g_inv(cover_lo);
        tc.g_inv(zcfg.y_target + 2.0 * span);
    } catch (const ModelError&) {
        // table covers what it can; excursions beyond will go to the slow path
    }

    Engine en;
    auto frozen = std::make_shared<TimeChanged::Frozen>(tc.freeze());
    const TimeChanged* tcp = &tc;
    en.drift = [frozen, tcp](double z) {
        if (frozen->covers(z)) return frozen->drift(z);
        return tcp->drift(z);  // rare excursion: locked slow path
    };
    en.disp = [](double) { return 1.0; };
    en.weight = [](double) { return 1.0; };
    en.lower_inaccessible =
        zl.is_finite() && !cfg.y_lower ? zl.value + cfg.boundary_guard : -kInf;
    SimReport rep = run_engine(en, zcfg);
    return rep;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.size() < 100 || b.size() < 100)
        throw SimError("ks_two_sample requires at least 100 samples on each side");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na -
                                  static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical(double alpha, std::size_t n, std::size_t m) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    return c * std::sqrt((nn + mm) / (nn * mm));
}

GrowthDiagnostic empirical_finiteness(const Diffusion& d, const Expression& f,
                                      const SimConfig& cfg,
                                      const std::vector<double>& horizons) {
    if (horizons.empty()) throw SimError("empirical_finiteness needs horizons");
    std::vector<double> hs(horizons);
    std::sort(hs.begin(), hs.end());
    const double t_end = hs.back();

    const Expression b = d.b, sig = d.sigma, fx = f;
    const double guard = std::isfinite(d.l) ? d.l + cfg.boundary_guard : -kInf;
    const long n = cfg.n_paths;
    std::vector<std::vector<double>> at_horizon(hs.size(),
                                                std::vector<double>(n, 0.0));

    const int nt = thread_count(cfg);
    std::vector<std::thread> pool;
    const long chunk = (n + nt - 1) / nt;
    const double sdt = std::sqrt(cfg.dt);
    for (int th = 0; th < nt; ++th) {
        pool.emplace_back([&, th] {
            const long lo = th * chunk;
            const long hi = std::min(n, lo + chunk);
            for (long i = lo; i < hi; ++i) {
                PathRng rng(cfg.seed, static_cast<std::uint64_t>(i));
                double y = cfg.y_start, t = 0.0, A = 0.0;
                double fy = fx.eval_raw(y);
                std::size_t hidx = 0;
                while (hidx < hs.size()) {
                    if (t >= hs[hidx]) {
                        at_horizon[hidx][i] = A;
                        ++hidx;
                        continue;
                    }
                    double yn = y + b.eval_raw(y) * cfg.dt +
                                sig.eval_raw(y) * sdt * rng.normal();
                    if (yn <= guard) yn = 2.0 * guard - yn;
                    if (std::fabs(yn) > kExplodeGuard) {
                        for (; hidx < hs.size(); ++hidx) at_horizon[hidx][i] = A;
                        break;
                    }
                    const double fn = fx.eval_raw(yn);
                    A += 0.5 * (fy + fn) * cfg.dt;
                    y = yn;
                    fy = fn;
                    t += cfg.dt;
                }
                (void)t_end;
            }
        });
    }
    for (auto& t : pool) t.join();

    GrowthDiagnostic out;
    out.horizons = hs;
    for (std::size_t h = 0; h < hs.size(); ++h) {
        std::vector<double>& v = at_horizon[h];
        std::sort(v.begin(), v.end());
        out.medians.push_back(v[v.size() / 2]);
        out.p90s.push_back(v[static_cast<std::size_t>(0.9 * (v.size() - 1))]);
    }
    const std::size_t k = hs.size();
    if (k >= 2) {
        const double prev = out.medians[k - 2], last = out.medians[k - 1];
        out.plateau = std::fabs(last - prev) < 0.01 * std::max(prev, 1e-12);
    }
    return out;
}

}  // namespace perpetua
