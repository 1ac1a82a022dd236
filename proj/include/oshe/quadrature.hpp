#pragma once

#include <functional>
#include <vector>

namespace oshe {

struct QuadraturePolicy {
    double rel_tol = 1e-9;   // per-call relative target
    double abs_tol = 0.0;
    int max_depth = 30;      // bisection depth for the adaptive rule
};

// Adaptive Gauss-Kronrod 7/15 on a finite interval.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadraturePolicy& policy = {});

// Finite-range integral over [a, b], 0 < a < b, split into decades and
// integrated in log coordinates; robust when b/a spans many orders.
double integrate_decades(const std::function<double(double)>& f, double a,
                         double b, const QuadraturePolicy& policy = {});

// --- Improper integrals over [a, +inf) -------------------------------------
//
// The integrand is walked over a geometric ladder of segments
// [a*10^k, a*10^(k+1)] until the partial sums either pass the divergence
// threshold, become Cauchy (relative increments below conv_tol), or the
// ladder runs out of representable arguments (cap). At the stopping point a
// local log-log slope analysis of the integrand decides the remaining tail:
// a stable slope s > 1 gives the first-order tail g(x)*x/(s-1); a stable
// slope <= 1 means divergence; a drifting slope is peeled with x -> log x
// and re-analysed, which turns iterated-logarithm integrands into exact
// power laws after finitely many substitutions.

struct ImproperPolicy {
    double conv_tol = 1e-9;        // Cauchy threshold on relative increments
    double diverge_thresh = 1e6;   // partial-sum divergence threshold
    double arg_cap = 1e300;        // largest representable integrand argument
    double slope_margin = 0.25;    // slope must exceed 1+margin to call a tail finite
    double drift_tol = 0.01;       // slope variation across the probe window
    int max_peel = 4;
    QuadraturePolicy segment;      // per-segment quadrature
};

struct TailProbe {
    int level = 0;        // how many log-substitutions were applied
    double slope = 0.0;   // local slope at the window end
    double drift = 0.0;   // slope variation over the window
    double estimate = 0.0;
};

enum class ImproperKind { Converged, Divergent };

struct ImproperResult {
    ImproperKind kind = ImproperKind::Divergent;
    double value = 0.0;             // meaningful when Converged
    double partial = 0.0;           // integral up to the ladder stop
    double tail = 0.0;              // extrapolated remainder beyond the stop
    bool cauchy_stop = false;       // ladder converged on its own
    bool exhausted = false;         // ladder hit the argument cap
    bool tail_warning = false;      // slope analysis gave up (treated divergent)
    std::vector<double> partials;   // per-segment running sums (diagnostics)
    std::vector<TailProbe> probes;  // slope analysis per substitution level
};

// Integrate f over [a, inf). f must be evaluable on [a, arg_cap].
ImproperResult integrate_improper(const std::function<double(double)>& f,
                                  double a, const ImproperPolicy& policy = {});

} // namespace oshe
