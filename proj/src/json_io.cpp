#include "perpetua/json_io.hpp"

#include <cmath>

namespace perpetua {

json endpoint_to_json(double v) {
    if (v == kInf) return json("inf");
    if (v == -kInf) return json("-inf");
    return json(v);
}

double endpoint_from_json(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
        throw ModelError("bad endpoint string '" + s + "' (use \"inf\", \"-inf\" or a number)");
    }
    return j.get<double>();
}

namespace {

json num_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
    return json(v);
}

}  // namespace

json to_json(const Verdict& v) {
    json cut = json::array();
    for (const auto& [t, f] : v.cutoffs) cut.push_back(json::array({t, f}));
    return json{{"decision", to_string(v.decision)},
                {"value", num_or_null(v.value)},
                {"cutoffs", cut},
                {"growth_ratio", num_or_null(v.growth_ratio)},
                {"rationale", v.rationale}};
}

json to_json(const BoundaryClass& bc) {
    return json{{"endpoint", bc.endpoint == Endpoint::Left ? "left" : "right"},
                {"kind", to_string(bc.kind)},
                {"I", to_json(bc.I)},
                {"J", to_json(bc.J)}};
}

json to_json(const MeanFunctional& m) {
    return json{{"decision", to_string(m.decision)},
                {"value", num_or_null(m.value)},
                {"right_tail", to_json(m.right_tail)},
                {"left_tail", to_json(m.left_tail)}};
}

json to_json(const FinitenessReport& rep) {
    json j{{"verdict_Y", to_json(rep.verdict_Y)},
           {"verdict_Z", rep.verdict_Z ? to_json(*rep.verdict_Z) : json(nullptr)},
           {"boundary_of_Z",
            rep.boundary_of_Z ? to_json(*rep.boundary_of_Z) : json(nullptr)},
           {"agree", rep.agree},
           {"mean", to_json(rep.mean)}};
    if (!rep.z_note.empty()) j["z_note"] = rep.z_note;
    return j;
}

namespace {

const char* outcome_name(PathOutcome o) {
    switch (o) {
        case PathOutcome::HitTarget: return "hit";
        case PathOutcome::HitLower: return "hit_lower";
        case PathOutcome::Timeout: return "timeout";
        case PathOutcome::FunctionalCap: return "functional_cap";
        case PathOutcome::Exploded: return "exploded";
    }
    return "?";
}

}  // namespace

json to_json(const SimReport& rep, bool include_samples) {
    json j{{"n_paths", rep.samples.size()},
           {"n_hit", rep.n_hit},
           {"mean_hit_time", num_or_null(rep.mean_hit_time)},
           {"stderr_hit_time", num_or_null(rep.stderr_hit_time)},
           {"mean_functional", num_or_null(rep.mean_functional)},
           {"stderr_functional", num_or_null(rep.stderr_functional)},
           {"guard_events", rep.guard_events},
           {"total_steps", rep.total_steps}};
    if (rep.ks_against) {
        j["ks"] = json{{"statistic", rep.ks_against->first},
                       {"n", rep.ks_against->second.first},
                       {"m", rep.ks_against->second.second}};
    }
    if (include_samples) {
        json s = json::array();
        for (const auto& p : rep.samples)
            s.push_back(json{{"hit_time", p.hit_time},
                             {"functional", p.functional},
                             {"outcome", outcome_name(p.outcome)}});
        j["samples"] = s;
    }
    return j;
}

json to_json(const GrowthDiagnostic& g) {
    return json{{"horizons", g.horizons},
                {"medians", g.medians},
                {"p90s", g.p90s},
                {"flag", g.plateau ? "plateau" : "growth"}};
}

Diffusion diffusion_from_json(const json& j) {
    if (!j.is_object()) throw ModelError("model document must be a JSON object");
    for (const char* key : {"l", "r", "b", "sigma", "x0"})
        if (!j.contains(key))
            throw ModelError(std::string("model document missing field '") + key + "'");
    Bindings params;
    if (j.contains("params"))
        for (const auto& [k, v] : j.at("params").items())
            params[k] = v.get<double>();
    return Diffusion::make(endpoint_from_json(j.at("l")), endpoint_from_json(j.at("r")),
                           Expression::parse(j.at("b").get<std::string>()),
                           Expression::parse(j.at("sigma").get<std::string>()),
                           j.at("x0").get<double>(), params);
}

json diffusion_to_json(const Diffusion& d) {
    return json{{"l", endpoint_to_json(d.l)},
                {"r", endpoint_to_json(d.r)},
                {"b", d.b.str()},
                {"sigma", d.sigma.str()},
                {"x0", d.x0}};
}

}  // namespace perpetua
