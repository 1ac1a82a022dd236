#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "oshe/quadrature.hpp"
#include "oshe/scalar_fn.hpp"

namespace oshe {

// Numerical verification of the structural hypotheses: Osgood integrals,
// superlinearity of h(u)/u, drift/diffusion growth envelopes, and the
// noise spectral conditions.

inline constexpr double DIVERGE_THRESH = 1e6;
inline constexpr double CONV_TOL = 1e-9;
inline constexpr double REL_TOL = 1e-10;

enum class OsgoodKind { Finite, Infinite };

struct OsgoodVerdict {
    OsgoodKind kind = OsgoodKind::Infinite;
    double value = 0.0;        // integral of 1/h over [lower_limit, inf) when Finite
    double lower_limit = 1.0;  // the c of the integral
    ImproperResult diagnostics;

    bool finite() const { return kind == OsgoodKind::Finite; }
};

struct NoiseSpectrum {
    std::function<double(double)> density; // f_hat as a function of |xi|
    double alpha = 0.5;                    // in (0, 1]
    int dimension = 1;
    std::string label;
};

struct EnvelopeReport {
    bool holds = false;
    double worst_ratio = 0.0;
    double worst_point = 0.0;
    std::size_t samples_checked = 0;
    std::string check; // which condition this report certifies
};

// Log-spaced sample grid used by the envelope checks.
std::vector<double> make_sample_grid(double lo = 1e-8, double hi = 1e12,
                                     std::size_t n = 10000);

// Default policy used by osgood_classify.
ImproperPolicy osgood_policy();

// Classify integral_c^inf du/h(u) as finite or infinite.
// Throws NonPositiveH if h <= 0 at a quadrature node, DomainError if c <= 0.
OsgoodVerdict osgood_classify(const ScalarFn& h, double c,
                              const ImproperPolicy& policy = osgood_policy());

// h(u)/u nondecreasing across the grid and >= exp(1/alpha) at its low end.
EnvelopeReport check_superlinear_ratio(const ScalarFn& h, double alpha,
                                       const std::vector<double>& grid);

// |b(u)| <= h(|u|) over the grid (both signs).
EnvelopeReport check_drift_envelope(const ScalarFn& b, const ScalarFn& h,
                                    const std::vector<double>& grid);

// |sigma(u)| <= |u|^(1-a/2) h(|u|)^(a/2) (log(h(|u|)/|u|))^(-1/2) over the grid.
// Throws LogDomainError if h(u)/u <= 1 at a node.
EnvelopeReport check_sigma_envelope(const ScalarFn& sigma, const ScalarFn& h,
                                    double alpha, const std::vector<double>& grid);

// The sigma envelope as a scalar function of |u| (shared with the field tests).
double sigma_envelope_value(const ScalarFn& h, double alpha, double u);

// Upsilon_alpha = (2pi)^-d * integral of f_hat(xi) / (1+|xi|^2)^(1-alpha),
// reduced to a radial integral (isotropic density).
// Throws DivergentIntegral when the integral diverges.
double dalang_upsilon(const NoiseSpectrum& spec,
                      const QuadraturePolicy& policy = {1e-8, 0.0, 48});

// Checks sup_s s^(1-alpha) * g(s) boundedness on s in [1e-8, 1], where
// g(s) = integral of exp(-s|xi|^2) f_hat(xi) dxi. The proxy: bounded by
// 10x the value at s = 1e-2.
EnvelopeReport noise_alpha_check(const NoiseSpectrum& spec);

// g(s) itself, exposed for oracles.
double spectral_heat_trace(const NoiseSpectrum& spec, double s);

// Iterated-log growth family: h(u) = C_K u prod_k log(u,k) and the matching
// sigma growth bound, with each log factor frozen at 1 below its domain
// threshold and C_K = exp(1/alpha).
struct RepeatedLogFamily {
    ScalarFn h;
    ScalarFn sigma_bound;
    int K = 1;
    double alpha = 0.5;
    double prefactor = 1.0;
};

RepeatedLogFamily repeated_log_family(int K, double alpha);

// k-fold iterated logarithm with each level frozen at 1 below its threshold.
double frozen_log(double u, int k);

} // namespace oshe
