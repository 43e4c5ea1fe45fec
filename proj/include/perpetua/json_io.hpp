#pragma once

#include <json.hpp>

#include "perpetua/boundary.hpp"
#include "perpetua/criterion.hpp"
#include "perpetua/diffusion.hpp"
#include "perpetua/sim.hpp"

namespace perpetua {

using json = nlohmann::ordered_json;

// -inf/inf encode as strings, finite values as numbers
json endpoint_to_json(double v);
double endpoint_from_json(const json& j);

json to_json(const Verdict& v);
json to_json(const BoundaryClass& bc);
json to_json(const MeanFunctional& m);
json to_json(const FinitenessReport& rep);
json to_json(const SimReport& rep, bool include_samples = false);
json to_json(const GrowthDiagnostic& g);

// {"l": "-inf"|num, "r": "inf"|num, "b": expr, "sigma": expr, "x0": num,
//  "params": {...}}
Diffusion diffusion_from_json(const json& j);
json diffusion_to_json(const Diffusion& d);

}  // namespace perpetua
