#pragma once

#include <string>
#include <vector>

#include "perpetua/diffusion.hpp"
#include "perpetua/quadrature.hpp"

namespace perpetua {

// Built-in diffusion families with closed-form scale objects and known
// criterion answers; the regression anchor for the numeric machinery.
//   bessel(delta)   b = (delta-1)/(2x), sigma = 1, on (0,inf), x0 = 1
//   bm_drift(mu)    b = mu,             sigma = 1, on R,       x0 = 0
//   bm              b = 0,              sigma = 1, on R,       x0 = 0
//   ou(theta)       b = -theta x,       sigma = 1, on R,       x0 = 0
//   gbm(mu, s)      b = mu x,           sigma = s x, on (0,inf), x0 = 1
Diffusion catalogue_get(const std::string& name, const Bindings& params = {});

struct FamilyInfo {
    std::string name;
    std::string params;  // comma-separated names with constraints
    std::string note;
};
const std::vector<FamilyInfo>& catalogue_families();

struct KnownAnswer {
    std::string family;
    Bindings params;
    std::string f_text;
    Decision expected;
    std::string provenance;  // one-line derivation note
};

// >= 10 (model, f) pairs with conclusive expected verdicts, away from the
// borderline band.
const std::vector<KnownAnswer>& known_answers();

}  // namespace perpetua
