#include <doctest.h>

#include <cmath>

#include "oshe/catalog.hpp"
#include "oshe/conditions.hpp"
#include "oshe/errors.hpp"

using namespace oshe;

namespace {

// Bare test functions with closed-form antiderivatives of 1/h.
ScalarFn bare(double (*f)(double), const char* label) {
    return make_scalar_fn([f](double u) { return f(u); }, label, true);
}

double h_sq(double u) { return u * u; }
double h_p15(double u) { return std::pow(u, 1.5); }
double h_ulog2(double u) { return u * std::log(u) * std::log(u); }
double h_ulog(double u) { return u * std::log(u); }
double h_uloglog(double u) { return u * std::log(u) * std::log(std::log(u)); }
double h_ulll(double u) {
    double l = std::log(u), ll = std::log(l);
    return u * l * ll * std::log(ll);
}
double h_ulog_ll2(double u) {
    double l = std::log(u), ll = std::log(l);
    return u * l * ll * ll;
}

} // namespace

TEST_CASE("osgood classification of the analytic catalog") {
    // h(u) = u^2 from 1: integral = 1.
    OsgoodVerdict v1 = osgood_classify(bare(h_sq, "u^2"), 1.0);
    CHECK(v1.kind == OsgoodKind::Finite);
    CHECK(v1.value == doctest::Approx(1.0).epsilon(1e-6));

    // h(u) = u^1.5 from 4: integral = 2/sqrt(4) = 1.
    OsgoodVerdict v2 = osgood_classify(bare(h_p15, "u^1.5"), 4.0);
    CHECK(v2.kind == OsgoodKind::Finite);
    CHECK(v2.value == doctest::Approx(1.0).epsilon(1e-6));

    // h(u) = u log^2 u from e: integral = 1/log(e) = 1.
    OsgoodVerdict v3 = osgood_classify(bare(h_ulog2, "u log^2 u"), M_E);
    CHECK(v3.kind == OsgoodKind::Finite);
    CHECK(v3.value == doctest::Approx(1.0).epsilon(1e-6));

    // h(u) = u log u (log log u)^2 from e^e: integral = 1.
    OsgoodVerdict v4 = osgood_classify(bare(h_ulog_ll2, "u log u llog^2 u"),
                                       std::exp(M_E));
    CHECK(v4.kind == OsgoodKind::Finite);
    CHECK(v4.value == doctest::Approx(1.0).epsilon(1e-6));

    // Infinite family.
    CHECK(osgood_classify(bare(h_ulog, "u log u"), M_E).kind == OsgoodKind::Infinite);
    CHECK(osgood_classify(bare(h_uloglog, "u log u llog u"), std::exp(M_E)).kind ==
          OsgoodKind::Infinite);
    CHECK(osgood_classify(bare(h_ulll, "u log llog lllog"),
                          std::exp(std::exp(M_E)))
              .kind == OsgoodKind::Infinite);
}

TEST_CASE("scaling invariance of the classification") {
    for (double c : {1e-3, 1.0, 1e3}) {
        ScalarFn scaled_fin = make_scalar_fn(
            [c](double u) { return c * u * u; }, "c u^2", true);
        OsgoodVerdict v = osgood_classify(scaled_fin, 1.0);
        CHECK(v.kind == OsgoodKind::Finite);
        CHECK(v.value == doctest::Approx(1.0 / c).epsilon(1e-6));

        ScalarFn scaled_inf = make_scalar_fn(
            [c](double u) { return c * u * std::log(u); }, "c u log u", true);
        CHECK(osgood_classify(scaled_inf, M_E).kind == OsgoodKind::Infinite);
    }
}

TEST_CASE("osgood error paths") {
    CHECK_THROWS_AS(osgood_classify(bare(h_sq, "u^2"), -1.0), DomainError);
    ScalarFn bad = make_scalar_fn([](double u) { return u - 10.0; }, "u-10");
    CHECK_THROWS_AS(osgood_classify(bad, 1.0), NonPositiveH);
}

TEST_CASE("superlinear ratio check") {
    auto grid = make_sample_grid();

    // e^2 u max(1, log u) at alpha = 1/2: ratio e^2 max(1, log u) is
    // nondecreasing and >= e^2 = exp(1/alpha).
    ScalarFn good = catalog_h("h.ulogu", 0.5);
    EnvelopeReport r1 = check_superlinear_ratio(good, 0.5, grid);
    CHECK(r1.holds);

    // sqrt(u): ratio u^-1/2 decreasing.
    ScalarFn bad1 = make_scalar_fn([](double u) { return std::sqrt(u); }, "sqrt");
    EnvelopeReport r2 = check_superlinear_ratio(bad1, 1.0, grid);
    CHECK_FALSE(r2.holds);

    // u max(log u, 1) without the prefactor: ratio < e^2 at small u.
    ScalarFn bad2 = make_scalar_fn(
        [](double u) { return u * std::max(std::log(u), 1.0); }, "u log u");
    EnvelopeReport r3 = check_superlinear_ratio(bad2, 0.5, grid);
    CHECK_FALSE(r3.holds);
}

TEST_CASE("drift envelope check") {
    auto grid = make_sample_grid();
    ScalarFn h = make_scalar_fn(
        [](double u) { return 2.0 * u * std::log1p(u) + u; }, "2u log1p + u");

    ScalarFn b1 = make_scalar_fn(
        [](double u) { return u * std::log1p(std::abs(u)); }, "u log1p");
    EnvelopeReport r1 = check_drift_envelope(b1, h, grid);
    CHECK(r1.holds);

    ScalarFn b2 = make_scalar_fn([](double u) { return u * u; }, "u^2");
    ScalarFn h2 = make_scalar_fn(
        [](double u) { return u * std::log1p(u); }, "u log1p");
    EnvelopeReport r2 = check_drift_envelope(b2, h2, grid);
    CHECK_FALSE(r2.holds);

    ScalarFn b3 = make_scalar_fn([](double) { return 0.0; }, "zero");
    EnvelopeReport r3 = check_drift_envelope(b3, h, grid);
    CHECK(r3.holds);
    CHECK(r3.worst_ratio == 0.0);
}

TEST_CASE("sigma envelope check") {
    auto grid = make_sample_grid();
    ScalarFn h = catalog_h("h.ulogu", 0.5);

    ScalarFn s0 = make_scalar_fn([](double) { return 0.0; }, "zero");
    CHECK(check_sigma_envelope(s0, h, 0.5, grid).holds);

    // Exactly the envelope: equality case.
    ScalarFn s1 = catalog_sigma("sigma.envelope", h, 0.5);
    EnvelopeReport r1 = check_sigma_envelope(s1, h, 0.5, grid);
    CHECK(r1.holds);
    CHECK(r1.worst_ratio == doctest::Approx(1.0).epsilon(1e-9));

    // At alpha = 1/2 the envelope over |u| is g^{1/4} (log g)^{-1/2} with
    // g = h(u)/u >= e^2, whose minimum is e^{1/2}/sqrt(2) ~ 1.166. A sigma
    // slightly above that multiple of u violates the bound near the minimum.
    ScalarFn h2 = make_scalar_fn(
        [](double u) { return M_E * M_E * u * std::log(M_E + u); }, "e^2 u log(e+u)");
    ScalarFn s2 = make_scalar_fn([](double u) { return 2.0 * u; }, "2u");
    EnvelopeReport r2 = check_sigma_envelope(s2, h2, 0.5, grid);
    CHECK_FALSE(r2.holds);

    // u sqrt(log(e+u)) outgrows the (log u)^{1/4}-type envelope for large u.
    ScalarFn s3 = make_scalar_fn(
        [](double u) { return u * std::sqrt(std::log(M_E + std::abs(u))); },
        "u sqrt(log)");
    EnvelopeReport r3 = check_sigma_envelope(s3, h2, 0.5, grid);
    CHECK_FALSE(r3.holds);
    CHECK(r3.worst_point > 1e6);

    // LogDomainError when h(u)/u <= 1.
    ScalarFn h3 = make_scalar_fn([](double u) { return 0.5 * u; }, "u/2");
    CHECK_THROWS_AS(check_sigma_envelope(s2, h3, 0.5, grid), LogDomainError);
}

TEST_CASE("dalang upsilon") {
    // f_hat = 1, d = 1, alpha = 1/4: finite; oracle = independent Riemann sum.
    NoiseSpectrum flat{[](double) { return 1.0; }, 0.25, 1, "white"};
    double v = dalang_upsilon(flat);
    double riemann = 0.0;
    const double dxi = 1e-3;
    for (double xi = 0.5 * dxi; xi < 2e4; xi += dxi)
        riemann += 2.0 * std::pow(1.0 + xi * xi, -0.75) * dxi;
    riemann /= 2.0 * M_PI;
    // The Riemann oracle truncates at 2e4; add its analytic tail ~ 2 xi^-1/2.
    double tail = 2.0 * std::pow(2e4, -0.5) * 2.0 / (2.0 * M_PI);
    CHECK(v == doctest::Approx(riemann + tail).epsilon(1e-3));

    // Same density at alpha = 1/2: log-divergent.
    NoiseSpectrum flat_half{[](double) { return 1.0; }, 0.5, 1, "white"};
    CHECK_THROWS_AS(dalang_upsilon(flat_half), DivergentIntegral);

    // Gaussian density at alpha = 1: (2 pi)^-1 sqrt(pi).
    NoiseSpectrum gauss{[](double k) { return std::exp(-k * k); }, 1.0, 1, "gauss"};
    CHECK(dalang_upsilon(gauss) ==
          doctest::Approx(std::sqrt(M_PI) / (2.0 * M_PI)).epsilon(1e-8));
}

TEST_CASE("dalang upsilon is monotone in alpha") {
    NoiseSpectrum gauss{[](double k) { return std::exp(-k * k); }, 0.0, 1, "gauss"};
    double prev = 0.0;
    for (double a : {0.2, 0.4, 0.6, 0.8, 1.0}) {
        gauss.alpha = a;
        double v = dalang_upsilon(gauss);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("noise alpha check") {
    // White noise d=1: g(s) = sqrt(pi/s), so s^{1/2} g(s) is constant.
    NoiseSpectrum white{[](double) { return 1.0; }, 0.5, 1, "white"};
    EnvelopeReport ok = noise_alpha_check(white);
    CHECK(ok.holds);

    // Same density claimed at alpha = 3/4 blows up as s -> 0.
    NoiseSpectrum white_bad{[](double) { return 1.0; }, 0.75, 1, "white"};
    CHECK_FALSE(noise_alpha_check(white_bad).holds);

    // Integrable density: alpha = 1.
    NoiseSpectrum gauss{[](double k) { return std::exp(-k * k); }, 1.0, 1, "gauss"};
    CHECK(noise_alpha_check(gauss).holds);
}

TEST_CASE("noise alpha check is monotone in alpha") {
    NoiseSpectrum white{[](double) { return 1.0; }, 0.5, 1, "white"};
    CHECK(noise_alpha_check(white).holds);
    for (double a : {0.4, 0.3, 0.2, 0.1}) {
        white.alpha = a;
        CHECK(noise_alpha_check(white).holds);
    }
}

TEST_CASE("spectral heat trace closed form for white noise") {
    NoiseSpectrum white{[](double) { return 1.0; }, 0.5, 1, "white"};
    for (double s : {1e-6, 1e-3, 1e-1, 1.0})
        CHECK(spectral_heat_trace(white, s) ==
              doctest::Approx(std::sqrt(M_PI / s)).epsilon(1e-7));
}

TEST_CASE("repeated log family") {
    // K=1, alpha=1/2: sigma bound proportional to
    // u (log u)^{1/4} (log log u)^{-1/2}.
    RepeatedLogFamily f1 = repeated_log_family(1, 0.5);
    double u = 1e8;
    double expect = u * std::pow(std::log(u), 0.25) /
                    std::sqrt(std::log(std::log(u)));
    CHECK(f1.sigma_bound(u) == doctest::Approx(expect).epsilon(1e-12));

    // K=2, alpha=1: the log log factors cancel, leaving u (log u)^{1/2}.
    RepeatedLogFamily f2 = repeated_log_family(2, 1.0);
    double expect2 = u * std::sqrt(std::log(u));
    CHECK(f2.sigma_bound(u) == doctest::Approx(expect2).epsilon(1e-12));

    CHECK_THROWS_AS(repeated_log_family(0, 0.5), DomainError);
}

TEST_CASE("repeated log family passes its own checks") {
    auto grid = make_sample_grid();
    for (int K : {1, 2, 3}) {
        RepeatedLogFamily fam = repeated_log_family(K, 0.5);
        CHECK(check_superlinear_ratio(fam.h, 0.5, grid).holds);
        CHECK(osgood_classify(fam.h, 1.0).kind == OsgoodKind::Infinite);
    }
    for (int K : {1, 2}) {
        RepeatedLogFamily fam = repeated_log_family(K, 1.0);
        CHECK(check_superlinear_ratio(fam.h, 1.0, grid).holds);
        CHECK(osgood_classify(fam.h, 1.0).kind == OsgoodKind::Infinite);
    }
}

TEST_CASE("frozen log freezes below the threshold") {
    CHECK(frozen_log(2.0, 1) == 1.0);      // below e
    CHECK(frozen_log(std::exp(2.0), 1) == doctest::Approx(2.0));
    CHECK(frozen_log(10.0, 2) == 1.0);     // below e^e
    CHECK(frozen_log(std::exp(std::exp(2.0)), 2) == doctest::Approx(2.0));
}
