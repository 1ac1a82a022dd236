#include "oshe/conditions.hpp"

#include <cmath>

#include "oshe/errors.hpp"

namespace oshe {

std::vector<double> make_sample_grid(double lo, double hi, std::size_t n) {
    std::vector<double> grid(n);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                     static_cast<double>(n - 1));
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

ImproperPolicy osgood_policy() {
    ImproperPolicy p;
    p.conv_tol = CONV_TOL;
    p.diverge_thresh = DIVERGE_THRESH;
    p.arg_cap = U_MAX;
    p.segment.rel_tol = 1e-10;
    return p;
}

OsgoodVerdict osgood_classify(const ScalarFn& h, double c,
                              const ImproperPolicy& policy) {
    if (!(c > 0.0))
        throw DomainError("osgood_classify: lower limit c must be positive, got " +
                          std::to_string(c));
    auto inv_h = [&](double u) {
        double v = h(u);
        if (!(v > 0.0))
            throw NonPositiveH("osgood_classify: h(" + std::to_string(u) +
                               ") = " + std::to_string(v) + " is not positive (h '" +
                               h.label + "')");
        return 1.0 / v;
    };
    ImproperResult r = integrate_improper(inv_h, c, policy);
    OsgoodVerdict verdict;
    verdict.lower_limit = c;
    verdict.kind = (r.kind == ImproperKind::Converged) ? OsgoodKind::Finite
                                                       : OsgoodKind::Infinite;
    verdict.value = r.value;
    verdict.diagnostics = std::move(r);
    return verdict;
}

EnvelopeReport check_superlinear_ratio(const ScalarFn& h, double alpha,
                                       const std::vector<double>& grid) {
    EnvelopeReport rep;
    rep.check = "superlinear_ratio";
    rep.samples_checked = grid.size();
    rep.holds = true;
    rep.worst_ratio = 0.0;

    double prev_ratio = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u = grid[i];
        const double hv = h(u);
        if (!(hv > 0.0))
            throw NonPositiveH("check_superlinear_ratio: h(" + std::to_string(u) +
                               ") not positive");
        const double ratio = hv / u;
        if (i == 0) {
            // Small-u limit condition: h(u)/u >= exp(1/alpha) at the lowest node.
            const double need = std::exp(1.0 / alpha);
            const double rel = need / ratio;
            if (rel > rep.worst_ratio) {
                rep.worst_ratio = rel;
                rep.worst_point = u;
            }
            if (ratio < need * (1.0 - REL_TOL))
                rep.holds = false;
        } else {
            // Monotonicity: ratio may not drop between consecutive nodes.
            const double rel = prev_ratio / ratio;
            if (rel > rep.worst_ratio) {
                rep.worst_ratio = rel;
                rep.worst_point = u;
            }
            if (ratio < prev_ratio * (1.0 - REL_TOL)) {
                rep.holds = false;
            }
        }
        prev_ratio = ratio;
    }
    return rep;
}

EnvelopeReport check_drift_envelope(const ScalarFn& b, const ScalarFn& h,
                                    const std::vector<double>& grid) {
    EnvelopeReport rep;
    rep.check = "drift_envelope";
    rep.samples_checked = 2 * grid.size();
    rep.holds = true;
    rep.worst_ratio = 0.0;

    for (double u : grid) {
        const double hv = h(u);
        if (!(hv > 0.0))
            throw NonPositiveH("check_drift_envelope: h(" + std::to_string(u) +
                               ") not positive");
        const double bv = std::max(std::abs(b(u)), std::abs(b(-u)));
        const double ratio = bv / hv;
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_point = u;
        }
    }
    rep.holds = rep.worst_ratio <= 1.0 + REL_TOL;
    return rep;
}

double sigma_envelope_value(const ScalarFn& h, double alpha, double u) {
    const double au = std::abs(u);
    if (au == 0.0)
        return 0.0;
    const double hv = h(au);
    const double g = hv / au;
    if (!(g > 1.0))
        throw LogDomainError("sigma envelope undefined: h(u)/u = " +
                             std::to_string(g) + " <= 1 at u = " + std::to_string(au));
    return std::pow(au, 1.0 - alpha / 2.0) * std::pow(hv, alpha / 2.0) /
           std::sqrt(std::log(g));
}

EnvelopeReport check_sigma_envelope(const ScalarFn& sigma, const ScalarFn& h,
                                    double alpha, const std::vector<double>& grid) {
    EnvelopeReport rep;
    rep.check = "sigma_envelope";
    rep.samples_checked = 2 * grid.size();
    rep.holds = true;
    rep.worst_ratio = 0.0;

    for (double u : grid) {
        const double env = sigma_envelope_value(h, alpha, u);
        const double sv = std::max(std::abs(sigma(u)), std::abs(sigma(-u)));
        const double ratio = sv / env;
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_point = u;
        }
    }
    rep.holds = rep.worst_ratio <= 1.0 + REL_TOL;
    return rep;
}

namespace {

// Angular measure of the unit sphere in R^d for the radial reduction.
double sphere_surface(int d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return 2.0 * M_PI;
        default: return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
    }
}

// integral_0^1 of the radial integrand, with a descending decade ladder so
// densities singular at zero (Riesz) converge geometrically.
double integrate_unit_ball(const std::function<double(double)>& radial,
                           const QuadraturePolicy& policy) {
    double sum = 0.0;
    double hi = 1.0;
    for (int k = 0; k < 40; ++k) {
        double lo = hi * 0.1;
        double seg = integrate(radial, lo, hi, policy);
        sum += seg;
        if (std::abs(seg) <= 1e-14 * std::max(std::abs(sum), 1e-300))
            break;
        hi = lo;
    }
    return sum;
}

} // namespace

double dalang_upsilon(const NoiseSpectrum& spec, const QuadraturePolicy& policy) {
    const int d = spec.dimension;
    const double alpha = spec.alpha;
    const double angular = sphere_surface(d);
    auto radial = [&](double r) {
        // (1 + r^2)^(alpha-1) in log space so r^2 past the double range
        // degrades gracefully instead of collapsing the integrand to zero.
        double log1pr2 = r > 1.0 ? 2.0 * std::log(r) + std::log1p(1.0 / (r * r))
                                 : std::log1p(r * r);
        return spec.density(r) * std::exp((alpha - 1.0) * log1pr2) *
               std::pow(r, d - 1);
    };

    double inner = integrate_unit_ball(radial, policy);

    ImproperPolicy outer;
    outer.diverge_thresh = 1e12;
    outer.segment = policy;
    ImproperResult r = integrate_improper(radial, 1.0, outer);
    if (r.kind == ImproperKind::Divergent)
        throw DivergentIntegral("dalang_upsilon: spectral integral diverges for '" +
                                spec.label + "' at alpha = " + std::to_string(alpha));
    return std::pow(2.0 * M_PI, -d) * angular * (inner + r.value);
}

double spectral_heat_trace(const NoiseSpectrum& spec, double s) {
    const int d = spec.dimension;
    const double angular = sphere_surface(d);
    auto radial = [&](double r) {
        return spec.density(r) * std::exp(-s * r * r) * std::pow(r, d - 1);
    };
    QuadraturePolicy qp;
    qp.rel_tol = 1e-9;
    double inner = integrate_unit_ball(radial, qp);
    ImproperPolicy outer;
    outer.diverge_thresh = 1e12;
    outer.segment = qp;
    ImproperResult r = integrate_improper(radial, 1.0, outer);
    if (r.kind == ImproperKind::Divergent)
        throw DivergentIntegral("spectral_heat_trace: integral diverges at s = " +
                                std::to_string(s));
    return angular * (inner + r.value);
}

EnvelopeReport noise_alpha_check(const NoiseSpectrum& spec) {
    EnvelopeReport rep;
    rep.check = "noise_alpha";

    // Log-spaced s grid over [1e-8, 1] containing the reference point 1e-2.
    const int n = 129;
    std::vector<double> svals(n);
    for (int i = 0; i < n; ++i)
        svals[i] = std::pow(10.0, -8.0 + 8.0 * i / (n - 1.0));
    const double s_ref = 1e-2;

    double ref = std::pow(s_ref, 1.0 - spec.alpha) * spectral_heat_trace(spec, s_ref);
    rep.samples_checked = svals.size();
    rep.worst_ratio = 0.0;
    for (double s : svals) {
        double v = std::pow(s, 1.0 - spec.alpha) * spectral_heat_trace(spec, s);
        double ratio = v / (10.0 * ref);
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_point = s;
        }
    }
    rep.holds = rep.worst_ratio <= 1.0 + 1e-12;
    return rep;
}

double frozen_log(double u, int k) {
    // Iterate x -> log(max(x, e)); levels below their threshold freeze at 1.
    double x = u;
    for (int i = 0; i < k; ++i)
        x = std::log(std::max(x, M_E));
    return std::max(x, 1.0);
}

RepeatedLogFamily repeated_log_family(int K, double alpha) {
    if (K < 1)
        throw DomainError("repeated_log_family: K must be >= 1, got " +
                          std::to_string(K));
    if (!(alpha > 0.0) || alpha > 1.0)
        throw DomainError("repeated_log_family: alpha must be in (0,1]");

    const double c_k = std::exp(1.0 / alpha);
    RepeatedLogFamily fam;
    fam.K = K;
    fam.alpha = alpha;
    fam.prefactor = c_k;

    fam.h = make_scalar_fn(
        [K, c_k](double u) {
            double v = c_k * u;
            for (int k = 1; k <= K; ++k)
                v *= frozen_log(u, k);
            return v;
        },
        "h.repeated_log:" + std::to_string(K));

    fam.sigma_bound = make_scalar_fn(
        [K, alpha](double u) {
            double au = std::abs(u);
            if (au == 0.0)
                return 0.0;
            double v = au / std::sqrt(frozen_log(au, 2));
            for (int k = 1; k <= K; ++k)
                v *= std::pow(frozen_log(au, k), alpha / 2.0);
            return v;
        },
        "sigma.repeated_log_bound:" + std::to_string(K));

    return fam;
}

} // namespace oshe
