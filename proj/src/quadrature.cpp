#include "oshe/quadrature.hpp"

#include <cmath>
#include <limits>

namespace oshe {

namespace {

// QUADPACK's 15-point Kronrod extension of the 7-point Gauss rule.
const double XGK[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
const double WGK[8] = {
    0.02293532201052922, 0.06309209262997855, 0.10479001032225018,
    0.14065325971552591, 0.16900472663926790, 0.19035057806478540,
    0.20443294007529889, 0.20948214108472782};
const double WG[4] = {
    0.12948496616886969, 0.27970539148927666, 0.38183005050511894,
    0.41795918367346938};

struct GkEstimate {
    double value;
    double error;
};

GkEstimate gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double gauss = fc * WG[3];
    double kronrod = fc * WGK[7];
    for (int i = 0; i < 7; ++i) {
        const double dx = h * XGK[i];
        const double fsum = f(c - dx) + f(c + dx);
        kronrod += fsum * WGK[i];
        if (i % 2 == 1)
            gauss += fsum * WG[i / 2];
    }
    kronrod *= h;
    gauss *= h;
    return {kronrod, std::abs(kronrod - gauss)};
}

double adapt(const std::function<double(double)>& f, double a, double b,
             double tol_abs, int depth, const QuadraturePolicy& policy) {
    GkEstimate e = gk15(f, a, b);
    // The |K - G| estimate bottoms out at rounding noise; accepting there
    // keeps the split tree finite on panels that are already resolved.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                         std::abs(e.value);
    if (e.error <= std::max(tol_abs, floor) || depth >= policy.max_depth)
        return e.value;
    const double c = 0.5 * (a + b);
    return adapt(f, a, c, 0.5 * tol_abs, depth + 1, policy) +
           adapt(f, c, b, 0.5 * tol_abs, depth + 1, policy);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadraturePolicy& policy) {
    if (a == b)
        return 0.0;
    GkEstimate coarse = gk15(f, a, b);
    double tol = std::max(policy.abs_tol,
                          policy.rel_tol * std::max(std::abs(coarse.value), 1e-300));
    if (coarse.error <= tol)
        return coarse.value;
    return adapt(f, a, b, tol, 0, policy);
}

double integrate_decades(const std::function<double(double)>& f, double a,
                         double b, const QuadraturePolicy& policy) {
    if (!(a > 0.0) || !(b > a))
        return integrate(f, a, b, policy);
    double sum = 0.0;
    double lo = a;
    while (lo < b) {
        double hi = std::min(lo * 10.0, b);
        sum += integrate(
            [&](double w) {
                double u = std::exp(w);
                return u * f(u);
            },
            std::log(lo), std::log(hi), policy);
        lo = hi;
    }
    return sum;
}

namespace {

// ln g_m(x) where g_0 = f and g_{m+1}(y) = e^y g_m(e^y). The integral of g_m
// over [log^(m)(X), inf) equals the tail of f beyond X, so each substitution
// re-expresses the same tail in coordinates where iterated-log integrands
// flatten into power laws.
double log_integrand(const std::function<double(double)>& f, double x, int level) {
    double arg = x;
    double log_jacobian = 0.0;
    for (int m = 0; m < level; ++m) {
        log_jacobian += arg;
        arg = std::exp(arg);
    }
    double v = f(arg);
    if (!(v > 0.0) || !std::isfinite(v))
        return -std::numeric_limits<double>::infinity();
    return log_jacobian + std::log(v);
}

// Local slope -dlog g/dlog x by a symmetric difference.
double local_slope(const std::function<double(double)>& f, double x, int level) {
    const double delta = 0.02;
    double lo = log_integrand(f, x * (1.0 - delta), level);
    double hi = log_integrand(f, x * (1.0 + delta), level);
    return -(hi - lo) / (std::log1p(delta) - std::log1p(-delta));
}

struct TailDecision {
    bool finite = false;
    bool gave_up = false;
    double tail = 0.0;
    std::vector<TailProbe> probes;
};

// Decide the tail of integral_{cap}^inf f. At each substitution level the
// slope is probed over [cap/2, cap]:
//   stable and  > 1+margin  -> finite tail, power-law extrapolation
//   stable and  < 1-margin  -> divergent
//   stable near 1, or drifting -> peel one more log and retry
// Slopes that never leave the near-1 band within max_peel levels are
// reported divergent with a warning; only integrands slower than every
// iterated logarithm land there.
TailDecision analyze_tail(const std::function<double(double)>& f, double cap,
                          const ImproperPolicy& policy) {
    TailDecision out;
    double x_cap = cap;
    for (int level = 0; level < policy.max_peel; ++level) {
        const int n_probe = 6;
        const double x_end = x_cap / 1.03; // keep probe stencils inside the cap
        double s_first = 0.0, s_last = 0.0;
        double drift = 0.0;
        bool bad = false;
        double prev = 0.0;
        for (int i = 0; i < n_probe; ++i) {
            double t = static_cast<double>(i) / (n_probe - 1);
            double x = x_end * std::pow(0.5, 1.0 - t);
            double s = local_slope(f, x, level);
            if (!std::isfinite(s)) {
                bad = true;
                break;
            }
            if (i == 0)
                s_first = s;
            else
                drift = std::max(drift, std::abs(s - prev) * (n_probe - 1));
            prev = s;
            s_last = s;
        }
        drift = std::max(drift, std::abs(s_last - s_first));

        TailProbe probe;
        probe.level = level;
        probe.slope = bad ? std::numeric_limits<double>::quiet_NaN() : s_last;
        probe.drift = drift;
        out.probes.push_back(probe);

        if (bad) {
            out.gave_up = true;
            return out;
        }
        bool stable = drift <= policy.drift_tol;
        if (stable && s_last > 1.0 + policy.slope_margin) {
            // Anchor the fitted power law g ~ A x^{-s} at the exact cap.
            double lg = log_integrand(f, x_end, level);
            double log_tail = lg + s_last * std::log(x_end) +
                              (1.0 - s_last) * std::log(x_cap) - std::log(s_last - 1.0);
            out.probes.back().estimate = std::exp(log_tail);
            out.finite = true;
            out.tail = out.probes.back().estimate;
            return out;
        }
        if (stable && s_last < 1.0 - policy.slope_margin) {
            out.finite = false;
            return out;
        }
        // Near-1 or drifting: peel.
        double next_cap = std::log(x_cap);
        if (!(next_cap > 1.0)) {
            out.gave_up = true;
            return out;
        }
        x_cap = next_cap;
    }
    out.gave_up = true;
    return out;
}

} // namespace

ImproperResult integrate_improper(const std::function<double(double)>& f,
                                  double a, const ImproperPolicy& policy) {
    ImproperResult res;
    double lo = a;
    double sum = 0.0;
    int quiet = 0; // consecutive segments below the Cauchy threshold

    while (lo < policy.arg_cap) {
        double hi = std::min(lo * 10.0, policy.arg_cap);
        // Integrate the segment in log coordinates: u = e^w.
        double wlo = std::log(lo), whi = std::log(hi);
        double seg = integrate(
            [&](double w) {
                double u = std::exp(w);
                return u * f(u);
            },
            wlo, whi, policy.segment);
        sum += seg;
        res.partials.push_back(sum);

        if (sum > policy.diverge_thresh) {
            res.kind = ImproperKind::Divergent;
            res.partial = sum;
            return res;
        }
        double scale = std::max(std::abs(sum), 1e-300);
        if (std::abs(seg) <= policy.conv_tol * scale) {
            if (++quiet >= 2) {
                res.cauchy_stop = true;
                lo = hi;
                break;
            }
        } else {
            quiet = 0;
        }
        lo = hi;
    }
    res.exhausted = !res.cauchy_stop;
    res.partial = sum;

    TailDecision tail = analyze_tail(f, lo, policy);
    res.probes = tail.probes;
    if (res.cauchy_stop) {
        // Ladder converged on its own; the tail estimate (if available) only
        // sharpens the value.
        res.kind = ImproperKind::Converged;
        res.tail = tail.finite ? tail.tail : 0.0;
        res.value = sum + res.tail;
        return res;
    }
    if (tail.finite) {
        res.kind = ImproperKind::Converged;
        res.tail = tail.tail;
        res.value = sum + tail.tail;
        return res;
    }
    res.kind = ImproperKind::Divergent;
    res.tail_warning = tail.gave_up;
    return res;
}

} // namespace oshe
