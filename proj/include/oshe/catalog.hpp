#pragma once

#include <optional>
#include <string>

#include "oshe/conditions.hpp"
#include "oshe/scalar_fn.hpp"

namespace oshe {

// Drift, diffusion, and envelope bundle resolved from catalog names.
struct NonlinearitySpec {
    ScalarFn b;
    ScalarFn sigma;
    ScalarFn h;
    double alpha = 0.5;
    std::optional<double> sigma_sup;    // known global bound on |sigma|
    bool b_nondecreasing_convex = false; // on [0, inf); needed by the blow-up runs
};

// Catalog lookups. Names carry an optional parameter after ':', e.g.
//   h.ulogu[:C]        C u max(log u, 1), default C = exp(1/alpha)
//   h.repeated_log:K   iterated-log family of order K
//   h.power:p          u^p
//   b.zero | b.linear:L | b.power:p | b.uloge[:s]   (s u log(e + |u|) sign u)
//   sigma.zero | sigma.linear:L | sigma.const:c | sigma.bounded:K
//   sigma.envelope[:r] exact growth envelope for (h, alpha), scaled by r
//   fhat.white | fhat.gaussian:l | fhat.riesz:beta
// Throws ConfigError for unknown names or bad parameters.

ScalarFn catalog_h(const std::string& name, double alpha);
ScalarFn catalog_b(const std::string& name);
ScalarFn catalog_sigma(const std::string& name, const ScalarFn& h, double alpha);
std::optional<double> catalog_sigma_bound(const std::string& name);
bool catalog_b_is_monotone_convex(const std::string& name);

struct NoiseModel;
NoiseSpectrum catalog_density(const std::string& name, double alpha, int dimension);

// Resolve a full nonlinearity bundle.
NonlinearitySpec resolve_nonlinearity(const std::string& b_name,
                                      const std::string& sigma_name,
                                      const std::string& h_name, double alpha);

} // namespace oshe
