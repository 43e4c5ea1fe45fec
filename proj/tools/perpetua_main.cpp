#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "perpetua/catalogue.hpp"
#include "perpetua/criterion.hpp"
#include "perpetua/json_io.hpp"
#include "perpetua/sim.hpp"

using namespace perpetua;

namespace {

constexpr const char* kVersion = "0.1.0";

// exit codes: 0 conclusive, 2 inconclusive, 3 criterion precondition failed,
// 64 malformed input, 1 internal defect
enum ExitCode { kOk = 0, kInternal = 1, kInconclusive = 2, kPrecondition = 3, kUsage = 64 };

struct ToolConfig {
    ClassifierConfig ccfg;
    QuadConfig qcfg;
    double dt = 1e-4;
    long paths = 10000;
    std::uint64_t seed = 1;
    double censor = 12.0;  // functional/time censor level for validate
};

json config_to_json(const ToolConfig& c) {
    return json{{"theta_finite", c.ccfg.theta_finite},
                {"theta_infinite", c.ccfg.theta_infinite},
                {"window", c.ccfg.window},
                {"cap", c.ccfg.cap},
                {"tail_rel", c.ccfg.tail_rel},
                {"max_levels", c.ccfg.max_levels},
                {"max_levels_finite", c.ccfg.max_levels_finite},
                {"abs_tol", c.qcfg.abs_tol},
                {"rel_tol", c.qcfg.rel_tol},
                {"max_intervals", c.qcfg.max_intervals},
                {"dt", c.dt},
                {"paths", c.paths},
                {"seed", c.seed},
                {"censor", c.censor}};
}

// flat TOML: `key = value` lines, # comments
void load_config(const std::string& path, ToolConfig& c) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const double x = std::stod(val);
        if (key == "theta_finite") c.ccfg.theta_finite = x;
        else if (key == "theta_infinite") c.ccfg.theta_infinite = x;
        else if (key == "window") c.ccfg.window = static_cast<int>(x);
        else if (key == "cap") c.ccfg.cap = x;
        else if (key == "tail_rel") c.ccfg.tail_rel = x;
        else if (key == "max_levels") c.ccfg.max_levels = static_cast<int>(x);
        else if (key == "max_levels_finite") c.ccfg.max_levels_finite = static_cast<int>(x);
        else if (key == "abs_tol") c.qcfg.abs_tol = x;
        else if (key == "rel_tol") c.qcfg.rel_tol = x;
        else if (key == "max_intervals") c.qcfg.max_intervals = static_cast<int>(x);
        else if (key == "dt") c.dt = x;
        else if (key == "paths") c.paths = static_cast<long>(x);
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(x);
        else if (key == "censor") c.censor = x;
        else
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": unknown key '" + key + "'");
    }
}

struct ModelSelection {
    std::string model_path;
    std::string family;
    std::vector<std::string> params;  // k=v

    Bindings bindings() const {
        Bindings b;
        for (const auto& kv : params) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw ModelError("bad --param '" + kv + "' (expected k=v)");
            b[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        }
        return b;
    }

    Diffusion resolve() const {
        if (!model_path.empty()) {
            std::ifstream in(model_path);
            if (!in) throw ModelError("model document: cannot open " + model_path);
            json j = json::parse(in);
            return diffusion_from_json(j);
        }
        if (!family.empty()) return catalogue_get(family, bindings());
        throw ModelError("model document: select one with --model PATH or --family NAME");
    }

    json describe() const {
        json j;
        if (!model_path.empty()) j["model"] = model_path;
        if (!family.empty()) {
            j["family"] = family;
            json p;
            for (const auto& [k, v] : bindings()) p[k] = v;
            j["params"] = p;
        }
        return j;
    }
};

void add_model_options(CLI::App* cmd, ModelSelection& sel) {
    cmd->add_option("--model", sel.model_path, "model JSON document");
    cmd->add_option("--family", sel.family, "catalogue family name");
    cmd->add_option("--param", sel.params, "family parameter k=v (repeatable)");
}

struct Manifest {
    std::string command;
    json inputs;
    json config;
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void write(const std::string& out_path) const {
        const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        json j{{"command", command},  {"inputs", inputs}, {"config", config},
               {"outputs", outputs},  {"wall_ms", wall},  {"version", kVersion},
               {"seed", seed}};
        std::ofstream f(out_path);
        f << j.dump(2) << "\n";
    }
};

void write_json_file(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << j.dump(2) << "\n";
}

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

// ---------------------------------------------------------------------------
// minimal SVG output for validate --plot

struct SvgCanvas {
    std::ostringstream body;
    int w, h;

    SvgCanvas(int w_, int h_) : w(w_), h(h_) {}

    void polyline(const std::vector<std::pair<double, double>>& pts, const char* color) {
        body << "<polyline fill=\"none\" stroke=\"" << color
             << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : pts) body << x << ',' << y << ' ';
        body << "\"/>\n";
    }
    void text(double x, double y, const std::string& s, int size = 12) {
        body << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size
             << "\" font-family=\"sans-serif\">" << s << "</text>\n";
    }
    void rect(double x, double y, double rw, double rh) {
        body << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << rw
             << "\" height=\"" << rh << "\" fill=\"none\" stroke=\"#444\"/>\n";
    }
    void save(const std::string& path) {
        std::ofstream f(path);
        f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
          << h << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
          << body.str() << "</svg>\n";
    }
};

std::vector<std::pair<double, double>> cdf_polyline(std::vector<double> xs, double x0,
                                                    double y0, double pw, double ph,
                                                    double lo, double hi) {
    std::sort(xs.begin(), xs.end());
    std::vector<std::pair<double, double>> pts;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double fx = x0 + (std::clamp(xs[i], lo, hi) - lo) / (hi - lo) * pw;
        const double fy = y0 + ph - (static_cast<double>(i + 1) / n) * ph;
        pts.emplace_back(fx, fy);
    }
    return pts;
}

void write_validate_svg(const std::string& path, const std::vector<double>& ay,
                        const std::vector<double>& hz, const GrowthDiagnostic& g) {
    SvgCanvas svg(900, 360);
    const double lo = 0.0;
    double hi = 0.0;
    for (double v : ay) hi = std::max(hi, v);
    for (double v : hz) hi = std::max(hi, v);
    hi = hi > 0 ? hi : 1.0;
    svg.rect(50, 30, 350, 280);
    svg.polyline(cdf_polyline(ay, 50, 30, 350, 280, lo, hi), "#1f77b4");
    svg.polyline(cdf_polyline(hz, 50, 30, 350, 280, lo, hi), "#d62728");
    svg.text(60, 20, "empirical CDF: A_H(Y) [blue] vs H(Z) [red]");
    svg.rect(500, 30, 350, 280);
    double gmax = 1e-12;
    for (double m : g.p90s) gmax = std::max(gmax, m);
    std::vector<std::pair<double, double>> med, p90;
    for (std::size_t i = 0; i < g.horizons.size(); ++i) {
        const double fx = 500 + (i + 0.5) / g.horizons.size() * 350;
        med.emplace_back(fx, 30 + 280 - g.medians[i] / gmax * 280);
        p90.emplace_back(fx, 30 + 280 - g.p90s[i] / gmax * 280);
    }
    svg.polyline(med, "#2ca02c");
    svg.polyline(p90, "#9467bd");
    svg.text(510, 20, "A at horizons: median [green], p90 [purple]");
    svg.text(510, 330, g.plateau ? "flag: plateau" : "flag: growth");
    svg.save(path);
}

// ---------------------------------------------------------------------------

int cmd_analyze(const Diffusion& d, const std::string& f_text, double x,
                const std::string& out, const ToolConfig& tc, Manifest& man) {
    Expression f = Expression::parse(f_text);
    FinitenessReport rep = analyze(d, f, x, tc.ccfg);

    json doc{{"model", diffusion_to_json(d)},
             {"f", f.str()},
             {"x", x},
             {"report", to_json(rep)}};
    if (!out.empty()) {
        write_json_file(out, doc);
        man.outputs.push_back(out);
    }
    std::printf("verdict_Y: %-12s %s\n", to_string(rep.verdict_Y.decision),
                rep.verdict_Y.rationale.c_str());
    if (rep.verdict_Z)
        std::printf("verdict_Z: %-12s %s\n", to_string(rep.verdict_Z->decision),
                    rep.verdict_Z->rationale.c_str());
    else
        std::printf("verdict_Z: unavailable  %s\n", rep.z_note.c_str());
    if (rep.boundary_of_Z)
        std::printf("g(r) kind: %s\n", to_string(rep.boundary_of_Z->kind));
    std::printf("mean:      %-12s %s\n", to_string(rep.mean.decision),
                rep.mean.decision == Decision::Finite
                    ? std::to_string(rep.mean.value).c_str()
                    : "");
    return rep.verdict_Y.conclusive() ? kOk : kInconclusive;
}

int cmd_classify(const Diffusion& d, const std::string& end_name, const std::string& out,
                 const ToolConfig& tc, Manifest& man) {
    Endpoint end;
    if (end_name == "left")
        end = Endpoint::Left;
    else if (end_name == "right")
        end = Endpoint::Right;
    else
        throw ModelError("model document: --end must be left or right");
    ScaleSpeed ss(d, tc.qcfg);
    BoundaryClass bc = classify(ss, end, tc.ccfg);
    json doc = to_json(bc);
    if (!out.empty()) {
        write_json_file(out, doc);
        man.outputs.push_back(out);
    }
    std::printf("%s endpoint: %s   (I: %s, J: %s)\n", end_name.c_str(),
                to_string(bc.kind), to_string(bc.I.decision), to_string(bc.J.decision));
    return bc.kind != BoundaryKind::Inconclusive ? kOk : kInconclusive;
}

int cmd_transform(const Diffusion& d, const std::string& f_text, const std::string& out,
                  const ToolConfig& tc, Manifest& man) {
    Expression f = Expression::parse(f_text);
    auto t = transform(d, f, tc.qcfg);
    for (double x : probe_grid(d, 10)) (void)t->g_interp(x);
    auto snap = t->table_snapshot();
    json table = json::array();
    json drift = json::array();
    for (const auto& [x, g] : snap) {
        table.push_back(json::array({x, g}));
        drift.push_back(json::array({g, t->drift_at_x(x)}));
    }
    json doc{{"model", diffusion_to_json(d)},
             {"f", f.str()},
             {"z_interval", json::array({endpoint_to_json(t->z_left().as_double()),
                                         endpoint_to_json(t->z_right().as_double())})},
             {"g_table", table},
             {"drift_samples", drift}};
    if (!out.empty()) {
        write_json_file(out, doc);
        man.outputs.push_back(out);
    }
    std::printf("g: %zu table nodes, z-interval [%s, %s]\n", snap.size(),
                doc["z_interval"][0].dump().c_str(), doc["z_interval"][1].dump().c_str());
    return kOk;
}

int cmd_mean(const Diffusion& d, const std::string& f_text, double x,
             const std::string& out, const ToolConfig& tc, Manifest& man) {
    Expression f = Expression::parse(f_text);
    ScaleSpeed ss(d, tc.qcfg);
    MeanFunctional m = mean_functional(ss, f, x, tc.ccfg);
    json doc{{"model", diffusion_to_json(d)}, {"f", f.str()}, {"x", x},
             {"mean", to_json(m)}};
    if (!out.empty()) {
        write_json_file(out, doc);
        man.outputs.push_back(out);
    }
    if (m.decision == Decision::Finite)
        std::printf("mean: Finite  value %.10g\n", m.value);
    else
        std::printf("mean: %s\n", to_string(m.decision));
    return m.decision != Decision::Inconclusive ? kOk : kInconclusive;
}

int cmd_validate(const Diffusion& d, const std::string& f_text, double x, double y,
                 const std::string& out, bool plot, const ToolConfig& tc, Manifest& man) {
    Expression f = Expression::parse(f_text);
    if (std::isnan(x)) x = d.x0;
    if (std::isnan(y)) y = d.x0 + 1.0;
    if (!(d.l < x && x < y && y < d.r))
        throw ModelError("model document: validation needs l < x < y < r (got x=" +
                         std::to_string(x) + ", y=" + std::to_string(y) + ")");

    SimConfig cfg;
    cfg.dt = tc.dt;
    cfg.n_paths = tc.paths;
    cfg.seed = tc.seed;
    cfg.y_start = x;
    cfg.y_target = y;
    cfg.t_max = 1e9;
    cfg.a_max = tc.censor;
    SimReport ry = run_Y(d, f, cfg);

    auto t = transform(d, f, tc.qcfg);
    SimConfig zcfg = cfg;
    zcfg.seed = tc.seed + 1;
    zcfg.a_max.reset();
    zcfg.t_max = tc.censor;
    SimReport rz = run_Z(*t, zcfg);

    std::vector<double> ay, hz;
    for (const auto& s : ry.samples) ay.push_back(s.hit() ? s.functional : tc.censor);
    for (const auto& s : rz.samples) hz.push_back(s.hit() ? s.hit_time : tc.censor);
    const double stat = ks_two_sample(ay, hz);
    const double crit = ks_critical(0.01, ay.size(), hz.size());
    ry.ks_against = {stat, {static_cast<long>(ay.size()), static_cast<long>(hz.size())}};

    SimConfig gcfg = cfg;
    gcfg.n_paths = std::min<long>(tc.paths, 400);
    gcfg.dt = std::max(tc.dt, 1e-3);
    gcfg.a_max.reset();
    GrowthDiagnostic diag = empirical_finiteness(d, f, gcfg, {10.0, 40.0, 160.0});

    json doc{{"model", diffusion_to_json(d)},
             {"f", f.str()},
             {"x", x},
             {"y", y},
             {"censor", tc.censor},
             {"Y", to_json(ry)},
             {"Z", to_json(rz)},
             {"ks",
              json{{"statistic", stat}, {"critical_1pct", crit}, {"pass", stat < crit}}},
             {"growth", to_json(diag)}};
    if (!out.empty()) {
        write_json_file(out, doc);
        man.outputs.push_back(out);
    }
    if (plot) {
        const std::string svg = out.empty() ? "validate.svg" : out + ".svg";
        write_validate_svg(svg, ay, hz, diag);
        man.outputs.push_back(svg);
    }
    std::printf("KS: %.5f (critical %.5f at 1%%): %s\n", stat, crit,
                stat < crit ? "pass" : "FAIL");
    std::printf("growth flag: %s\n", diag.plateau ? "plateau" : "growth");
    return stat < crit ? kOk : kInternal;
}

int cmd_catalogue() {
    std::printf("families:\n");
    for (const auto& fam : catalogue_families())
        std::printf("  %-10s %-14s %s\n", fam.name.c_str(), fam.params.c_str(),
                    fam.note.c_str());
    std::printf("\nknown answers:\n");
    for (const auto& k : known_answers()) {
        std::string p;
        for (const auto& [key, v] : k.params) p += key + "=" + std::to_string(v) + " ";
        std::printf("  %-9s %-22s f=%-16s -> %-9s  [%s]\n", k.family.c_str(), p.c_str(),
                    k.f_text.c_str(), to_string(k.expected), k.provenance.c_str());
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"perpetual integral functionals of transient diffusions"};
    app.require_subcommand(1);

    ToolConfig tc;
    std::string config_path;
    app.add_option("--config", config_path, "flat TOML config (key = value)");

    ModelSelection sel;
    std::string f_text = "1";
    double x = kNaN, y = kNaN;
    std::string out;
    std::string end_name = "right";
    bool plot = false;

    auto* a = app.add_subcommand("analyze", "decide a.s. finiteness of the functional");
    add_model_options(a, sel);
    a->add_option("--f", f_text, "integrand expression")->required();
    a->add_option("--x", x, "starting point (defaults to x0)");
    a->add_option("--out", out, "report JSON path");

    auto* c = app.add_subcommand("classify", "Feller boundary classification");
    add_model_options(c, sel);
    c->add_option("--end", end_name, "left|right");
    c->add_option("--out", out, "report JSON path");

    auto* t = app.add_subcommand("transform", "build the time-changed diffusion Z");
    add_model_options(t, sel);
    t->add_option("--f", f_text, "integrand expression")->required();
    t->add_option("--out", out, "g-table JSON path");

    auto* m = app.add_subcommand("mean", "mean of the perpetual functional");
    add_model_options(m, sel);
    m->add_option("--f", f_text, "integrand expression")->required();
    m->add_option("--x", x, "starting point (defaults to x0)");
    m->add_option("--out", out, "report JSON path");

    auto* v = app.add_subcommand("validate", "Monte Carlo validation of the time change");
    add_model_options(v, sel);
    v->add_option("--f", f_text, "integrand expression")->required();
    v->add_option("--x", x, "start (defaults to x0)");
    v->add_option("--y", y, "target level (defaults to x0+1)");
    v->add_option("--paths", tc.paths, "number of paths");
    v->add_option("--dt", tc.dt, "step size");
    v->add_option("--seed", tc.seed, "RNG seed");
    v->add_option("--censor", tc.censor, "censoring level for the KS comparison");
    v->add_option("--out", out, "report JSON path");
    v->add_flag("--plot", plot, "write an SVG next to the report");

    auto* k = app.add_subcommand("catalogue", "list built-in families and known answers");
    (void)k;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kUsage;
    }

    Manifest man;
    man.command = join_args(argc, argv);

    try {
        if (!config_path.empty()) load_config(config_path, tc);
        man.config = config_to_json(tc);
        man.seed = tc.seed;
        man.inputs = sel.describe();
        man.inputs["f"] = f_text;

        int code = kOk;
        if (app.got_subcommand(k)) {
            code = cmd_catalogue();
        } else {
            Diffusion d = sel.resolve();
            if (std::isnan(x) && !app.got_subcommand(v)) x = d.x0;
            if (app.got_subcommand(a)) {
                man.inputs["x"] = x;
                code = cmd_analyze(d, f_text, x, out, tc, man);
            } else if (app.got_subcommand(c)) {
                code = cmd_classify(d, end_name, out, tc, man);
            } else if (app.got_subcommand(t)) {
                code = cmd_transform(d, f_text, out, tc, man);
            } else if (app.got_subcommand(m)) {
                man.inputs["x"] = x;
                code = cmd_mean(d, f_text, x, out, tc, man);
            } else if (app.got_subcommand(v)) {
                code = cmd_validate(d, f_text, x, y, out, plot, tc, man);
            }
        }
        if (!out.empty()) man.write(out + ".manifest.json");
        return code;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kUsage;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kUsage;
    } catch (const ModelError& e) {
        const std::string w = e.what();
        if (w.find("unknown catalogue") != std::string::npos ||
            w.find("missing parameter") != std::string::npos ||
            w.find("model document") != std::string::npos ||
            w.find("unbound parameter") != std::string::npos ||
            w.find("bad --param") != std::string::npos ||
            w.find("bad endpoint") != std::string::npos) {
            std::fprintf(stderr, "input error: %s\n", w.c_str());
            return kUsage;
        }
        std::fprintf(stderr, "criterion precondition failed: %s\n", w.c_str());
        return kPrecondition;
    } catch (const RouteDisagreement& e) {
        std::fprintf(stderr, "internal: %s\n", e.what());
        return kInternal;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    }
}
