#include <doctest.h>

#include <cmath>

#include "oshe/errors.hpp"
#include "oshe/noise.hpp"
#include "oshe/quadrature.hpp"

using namespace oshe;

namespace {

NoiseModel white_model() {
    NoiseModel m;
    m.white = true;
    m.spectrum = NoiseSpectrum{[](double) { return 1.0; }, 0.5, 1, "fhat.white"};
    m.label = "fhat.white";
    return m;
}

NoiseModel gaussian_model(double l = 1.0) {
    NoiseModel m;
    m.white = false;
    m.spectrum = NoiseSpectrum{[l](double k) { return std::exp(-k * k * l * l); },
                               1.0, 1, "fhat.gaussian"};
    m.label = "fhat.gaussian";
    return m;
}

} // namespace

TEST_CASE("build_spectrum") {
    Lattice lat = make_lattice(1, 8.0, 64);

    SpectralWeights w = build_spectrum(white_model(), lat);
    CHECK(w.white_flag);
    for (double v : w.weights)
        CHECK(v == 1.0);

    SpectralWeights g = build_spectrum(gaussian_model(), lat);
    CHECK_FALSE(g.white_flag);
    CHECK(g.weights[0] == 1.0); // f_hat(0) = 1

    // White noise in 2d is rejected.
    Lattice lat2 = make_lattice(2, 4.0, 16);
    CHECK_THROWS_AS(build_spectrum(white_model(), lat2), DimensionError);

    // Riesz density: zero mode regularized to the smallest wavenumber.
    NoiseModel riesz;
    riesz.white = false;
    riesz.spectrum =
        NoiseSpectrum{[](double k) { return std::pow(k, -0.5); }, 0.5, 1, "riesz"};
    SpectralWeights r = build_spectrum(riesz, lat);
    CHECK(std::isfinite(r.weights[0]));
    CHECK(r.weights[0] ==
          doctest::Approx(std::pow(M_PI / (lat.L * lat.N), -0.5)).epsilon(1e-12));
}

TEST_CASE("white increments: cell variance dt/dx and no correlations") {
    Lattice lat = make_lattice(1, 8.0, 256);
    SpectralWeights spec = build_spectrum(white_model(), lat);
    const double dt = 1e-3;

    std::vector<NoiseIncrement> inc;
    for (std::uint32_t i = 0; i < 10000; ++i)
        inc.push_back(sample_increment(spec, dt, SeedPath{99, 0, i}));

    CovarianceProfile prof = empirical_covariance(inc, 4);
    const double expect0 = 1.0 / lat.dx();
    CHECK(std::abs(prof.c[0] - expect0) < 0.03 * expect0);
    for (int r = 1; r <= 4; ++r)
        CHECK(std::abs(prof.c[r]) <= 3.0 * prof.se[r]);
    CHECK(std::abs(prof.temporal_corr) <= 3.0 * prof.temporal_se);
}

TEST_CASE("colored increments match the quadrature covariance oracle") {
    Lattice lat = make_lattice(1, 16.0, 256);
    SpectralWeights spec = build_spectrum(gaussian_model(), lat);
    SpectralEngine engine(lat);
    const double dt = 0.1;

    std::vector<NoiseIncrement> inc;
    for (std::uint32_t i = 0; i < 10000; ++i)
        inc.push_back(sample_increment(spec, dt, SeedPath{7, 0, i}, engine));
    CovarianceProfile prof = empirical_covariance(inc, 8);

    // Oracle: f(r) = (2 pi)^-1 integral e^{-xi^2} cos(xi r) dxi.
    auto f_exact = [](double r) {
        return integrate(
                   [r](double xi) { return std::exp(-xi * xi) * std::cos(xi * r); },
                   0.0, 40.0, QuadraturePolicy{1e-10, 0.0, 30}) /
               M_PI;
    };
    for (int lag : {0, 1, 2, 4, 8}) {
        double expect = f_exact(lag * lat.dx());
        CHECK(std::abs(prof.c[lag] - expect) < 0.05 * f_exact(0.0));
    }
    CHECK(std::abs(prof.temporal_corr) <= 3.0 * prof.temporal_se);
}

TEST_CASE("increments are bit-identical given the same seed path") {
    Lattice lat = make_lattice(1, 8.0, 64);
    SpectralWeights spec = build_spectrum(gaussian_model(), lat);
    SpectralEngine e1(lat), e2(lat);
    NoiseIncrement a = sample_increment(spec, 0.01, SeedPath{5, 3, 17}, e1);
    NoiseIncrement b = sample_increment(spec, 0.01, SeedPath{5, 3, 17}, e2);
    for (std::size_t i = 0; i < a.field.size(); ++i)
        CHECK(a.field[i] == b.field[i]);

    NoiseIncrement c = sample_increment(spec, 0.01, SeedPath{5, 4, 17}, e1);
    bool all_same = true;
    for (std::size_t i = 0; i < a.field.size(); ++i)
        all_same = all_same && a.field[i] == c.field[i];
    CHECK_FALSE(all_same);
}

TEST_CASE("gaussian additivity: two half-steps sum to one full step in law") {
    // Spectral amplitudes scale with sqrt(dt), so Var(half) + Var(half)
    // equals Var(full) exactly; verify on the sampled fields' second moments.
    Lattice lat = make_lattice(1, 8.0, 64);
    SpectralWeights spec = build_spectrum(gaussian_model(), lat);
    SpectralEngine engine(lat);
    const double dt = 0.2;

    double var_sum = 0.0, var_full = 0.0;
    const int n = 4000;
    for (std::uint32_t i = 0; i < n; ++i) {
        NoiseIncrement h1 = sample_increment(spec, dt / 2, SeedPath{41, 0, 2 * i}, engine);
        NoiseIncrement h2 =
            sample_increment(spec, dt / 2, SeedPath{41, 0, 2 * i + 1}, engine);
        NoiseIncrement full = sample_increment(spec, dt, SeedPath{42, 0, i}, engine);
        for (std::size_t j = 0; j < h1.field.size(); ++j) {
            double s = h1.field[j] + h2.field[j];
            var_sum += s * s;
            var_full += full.field[j] * full.field[j];
        }
    }
    var_sum /= n * lat.size();
    var_full /= n * lat.size();
    CHECK(var_sum == doctest::Approx(var_full).epsilon(0.05));
}

TEST_CASE("independence across streams") {
    Lattice lat = make_lattice(1, 8.0, 64);
    SpectralWeights spec = build_spectrum(white_model(), lat);
    const double dt = 1e-2;
    std::vector<double> prods;
    for (std::uint32_t i = 0; i < 2000; ++i) {
        NoiseIncrement a = sample_increment(spec, dt, SeedPath{13, 1, i});
        NoiseIncrement b = sample_increment(spec, dt, SeedPath{13, 2, i});
        double acc = 0.0;
        for (std::size_t j = 0; j < a.field.size(); ++j)
            acc += a.field[j] * b.field[j];
        prods.push_back(acc / (a.field.size() * dt));
    }
    double mean = 0.0;
    for (double v : prods)
        mean += v;
    mean /= prods.size();
    double var = 0.0;
    for (double v : prods)
        var += (v - mean) * (v - mean);
    var /= prods.size() - 1;
    CHECK(std::abs(mean) <= 3.0 * std::sqrt(var / prods.size()));
}

TEST_CASE("covariance profile is symmetric within statistical error") {
    // Covariance at lag r vs N - r (periodic mirror) agree.
    Lattice lat = make_lattice(1, 8.0, 64);
    SpectralWeights spec = build_spectrum(gaussian_model(0.5), lat);
    SpectralEngine engine(lat);
    std::vector<NoiseIncrement> inc;
    for (std::uint32_t i = 0; i < 2000; ++i)
        inc.push_back(sample_increment(spec, 0.05, SeedPath{31, 0, i}, engine));
    CovarianceProfile prof = empirical_covariance(inc, 63);
    for (int r = 1; r < 8; ++r) {
        double diff = std::abs(prof.c[r] - prof.c[64 - r]);
        CHECK(diff <= 3.0 * (prof.se[r] + prof.se[64 - r]));
    }
}

TEST_CASE("empirical covariance wants enough samples") {
    Lattice lat = make_lattice(1, 8.0, 64);
    SpectralWeights spec = build_spectrum(white_model(), lat);
    std::vector<NoiseIncrement> few;
    for (std::uint32_t i = 0; i < 99; ++i)
        few.push_back(sample_increment(spec, 0.01, SeedPath{1, 0, i}));
    CHECK_THROWS_AS(empirical_covariance(few, 2), InsufficientSamples);
}

TEST_CASE("2d colored sampling produces real symmetric covariance") {
    Lattice lat = make_lattice(2, 4.0, 16);
    NoiseModel m = gaussian_model();
    m.spectrum.dimension = 2;
    SpectralWeights spec = build_spectrum(m, lat);
    SpectralEngine engine(lat);
    std::vector<NoiseIncrement> inc;
    for (std::uint32_t i = 0; i < 500; ++i)
        inc.push_back(sample_increment(spec, 0.1, SeedPath{8, 0, i}, engine));
    CHECK(engine.max_imag_residue() < 1e-12);
    CovarianceProfile prof = empirical_covariance(inc, 3);
    CHECK(prof.c[0] > 0.0);
    CHECK(prof.c[1] < prof.c[0]);
}
