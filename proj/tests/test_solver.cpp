#include <doctest.h>

#include <cmath>

#include "oshe/catalog.hpp"
#include "oshe/errors.hpp"
#include "oshe/solver.hpp"

using namespace oshe;

namespace {

ScalarFn zero_fn() { return make_scalar_fn([](double) { return 0.0; }, "zero"); }

NoiseModel white_model() {
    NoiseModel m;
    m.white = true;
    m.spectrum = NoiseSpectrum{[](double) { return 1.0; }, 0.5, 1, "fhat.white"};
    return m;
}

RunSetup basic_setup(const Lattice& lat) {
    RunSetup s;
    s.lattice = lat;
    s.noise = build_spectrum(white_model(), lat);
    s.b = zero_fn();
    s.sigma = zero_fn();
    s.h = catalog_h("h.ulogu", 0.5);
    s.alpha = 0.5;
    s.u0 = make_field(lat, 0.0);
    s.solver.p = 6.0;
    return s;
}

} // namespace

TEST_CASE("cutoff clamps outside +-3^n") {
    ScalarFn sq = make_scalar_fn([](double u) { return u * u; }, "u^2");
    CutoffFn c = make_cutoff(sq, 1);
    CHECK(c(5.0) == 9.0);
    CHECK(c(-5.0) == 9.0);
    CHECK(c(2.0) == 4.0);
    CHECK(c(0.0) == 0.0);

    // Pointwise recovery once the level passes |u|.
    CutoffFn c3 = make_cutoff(sq, 3); // level 27
    CHECK(c3(11.0) == 121.0);
}

TEST_CASE("cutoff is Lipschitz with the local constant") {
    ScalarFn sq = make_scalar_fn([](double u) { return u * u; }, "u^2");
    for (int n : {1, 2, 3}) {
        CutoffFn c = make_cutoff(sq, n);
        const double level = std::pow(3.0, n);
        const double lip = 2.0 * level; // max slope of u^2 on [-3^n, 3^n]
        // Dense sampling across and beyond the clamp.
        for (double u = -2.0 * level; u < 2.0 * level; u += level / 64.0) {
            double v = u + level / 128.0;
            CHECK(std::abs(c(u) - c(v)) <= lip * std::abs(u - v) * (1 + 1e-12));
        }
    }
}

TEST_CASE("tripling sequence") {
    // h(u) = u: a_n = min(theta, 1/n).
    ScalarFn lin = make_scalar_fn([](double u) { return u; }, "u");
    CHECK(tripling_sequence(lin, 0.3, 5) == doctest::Approx(0.2));
    CHECK(tripling_sequence(lin, 0.3, 2) == doctest::Approx(0.3));

    // h(u) = u log u at n = 1: a_1 = min(0.3/log 9, 1) = 0.3/log 9.
    ScalarFn ulog = make_scalar_fn([](double u) { return u * std::log(u); }, "ulogu");
    CHECK(tripling_sequence(ulog, 0.3, 1) ==
          doctest::Approx(0.3 / std::log(9.0)).epsilon(1e-12));
    CHECK(tripling_sequence(ulog, 0.3, 1) == doctest::Approx(0.13656).epsilon(1e-3));

    CHECK_THROWS_AS(tripling_sequence(lin, 0.5, 1), DomainError);
    CHECK_THROWS_AS(tripling_sequence(lin, -0.1, 1), DomainError);
}

TEST_CASE("sum of a_n diverges for infinite-Osgood h") {
    ScalarFn ulog = make_scalar_fn(
        [](double u) { return u * std::max(std::log(u), 1.0); }, "ulogu");
    double s1 = 0.0, s2 = 0.0;
    for (int n = 1; n <= 1000; ++n)
        s1 += tripling_sequence(ulog, 0.3, n);
    for (int n = 1; n <= 2000; ++n)
        s2 += tripling_sequence(ulog, 0.3, n);
    CHECK(s2 > s1 + 0.1); // partial sums keep growing, no plateau
}

TEST_CASE("mild step: pure semigroup decay of a single mode") {
    Lattice lat = make_lattice(1, 8.0, 128);
    SpectralEngine engine(lat);
    RunSetup s = basic_setup(lat);
    const double dt = 1e-3, nu = 0.5;
    const double k = M_PI / lat.L * 3.0;

    GridField u = make_field(lat);
    for (int j = 0; j < lat.N; ++j)
        u[j] = std::cos(k * lat.coord(j));

    CutoffFn b = make_cutoff(zero_fn(), 1);
    CutoffFn sg = make_cutoff(zero_fn(), 1);
    NoiseIncrement dW = sample_increment(s.noise, dt, SeedPath{1, 0, 0}, engine);
    GridField v = mild_step(u, dt, b, sg, dW, nu, engine);
    const double decay = std::exp(-nu * k * k * dt);
    for (int j = 0; j < lat.N; ++j)
        CHECK(v[j] == doctest::Approx(decay * u[j]).epsilon(1e-12));
}

TEST_CASE("mild step: Euler on the linear ODE for constant fields") {
    Lattice lat = make_lattice(1, 4.0, 64);
    SpectralEngine engine(lat);
    RunSetup s = basic_setup(lat);
    const double lambda = 0.7, dt = 1e-3, T = 1.0;

    ScalarFn lin = make_scalar_fn([lambda](double u) { return lambda * u; }, "lin");
    CutoffFn b = make_cutoff(lin, 6);
    CutoffFn sg = make_cutoff(zero_fn(), 6);

    GridField u = make_field(lat, 1.0);
    int steps = static_cast<int>(T / dt);
    for (int m = 0; m < steps; ++m) {
        NoiseIncrement dW = sample_increment(s.noise, dt, SeedPath{1, 0, m}, engine);
        u = mild_step(u, dt, b, sg, dW, 0.5, engine);
    }
    // (1 + lambda dt)^steps -> e^{lambda T} with O(dt) error.
    CHECK(u[0] == doctest::Approx(std::exp(lambda * T)).epsilon(2e-3));
    for (int j = 1; j < lat.N; ++j)
        CHECK(u[j] == doctest::Approx(u[0]).epsilon(1e-12));
}

TEST_CASE("mild step: stochastic convolution variance matches the OU closed form") {
    // sigma = 1, b = 0, u0 = 0: each Fourier mode is a discrete OU recursion
    //   u_m(k) = e^{-nu k^2 dt} (u_{m-1}(k) + W(k)),  Var W(k) = dt f(k)/(2L)^d.
    // After m steps Var(u_m(k)) = sum_j e^{-2 nu k^2 dt j} dt f(k) / (2L).
    Lattice lat = make_lattice(1, 4.0, 64);
    SpectralEngine engine(lat);
    RunSetup s = basic_setup(lat);
    const double dt = 1e-2, nu = 0.5;
    const int steps = 50, n_paths = 3000;

    ScalarFn one = make_scalar_fn([](double) { return 1.0; }, "one");
    CutoffFn b = make_cutoff(zero_fn(), 4);
    CutoffFn sg = make_cutoff(one, 4);

    // Mean and zero-mode variance across paths.
    double var0 = 0.0;
    double var_mode3 = 0.0;
    const double k3 = M_PI / lat.L * 3.0;
    for (std::uint32_t path = 0; path < n_paths; ++path) {
        GridField u = make_field(lat, 0.0);
        for (int m = 0; m < steps; ++m) {
            NoiseIncrement dW =
                sample_increment(s.noise, dt, SeedPath{77, path, m}, engine);
            u = mild_step(u, dt, b, sg, dW, nu, engine);
        }
        double mean = 0.0;
        for (double v : u.values)
            mean += v;
        mean /= lat.N;
        var0 += mean * mean;
        double re = 0.0;
        for (int j = 0; j < lat.N; ++j)
            re += u[j] * std::cos(k3 * lat.coord(j));
        re *= 2.0 / lat.N; // real amplitude of mode 3
        var_mode3 += re * re;
    }
    var0 /= n_paths;
    var_mode3 /= n_paths;

    // Zero mode: no decay, Var = steps * dt / (2L).
    double expect0 = steps * dt / (2.0 * lat.L);
    CHECK(var0 == doctest::Approx(expect0).epsilon(0.1));

    // Mode 3: geometric sum of decays. The sampled cos amplitude carries
    // Var = 2/(2L) * dt per step before decay (two conjugate modes).
    double q = std::exp(-2.0 * nu * k3 * k3 * dt);
    double geom = q * (1.0 - std::pow(q, steps)) / (1.0 - q);
    double expect3 = 2.0 * dt / (2.0 * lat.L) * geom;
    CHECK(var_mode3 == doctest::Approx(expect3).epsilon(0.1));
}

TEST_CASE("run_localized: pure heat flow triggers nothing") {
    Lattice lat = make_lattice(1, 8.0, 128);
    RunSetup s = basic_setup(lat);
    s.u0 = gaussian_profile(lat, 1.0, 2.0);
    s.solver.dt = 1e-3;
    s.solver.T = 0.5;
    PathResult r = run_localized(s, 5, 0);
    CHECK_FALSE(r.exploded);
    CHECK(r.ladder.tau.empty());
    CHECK(r.final_time == doctest::Approx(0.5));
    CHECK(r.max_vp <= vp_norm(s.u0, s.solver.p).vp_value * (1 + 1e-12));
}

TEST_CASE("run_localized: deterministic quadratic blow-up tracks the ODE") {
    // sigma = 0, b = u^2, constant initial data: the field stays constant in
    // space and follows v' = v^2 exactly, so t* ~ 1/c.
    Lattice lat = make_lattice(1, 4.0, 64);
    RunSetup s = basic_setup(lat);
    s.b = catalog_b("b.power:2");
    s.u0 = make_field(lat, 2.0); // blow-up at t = 0.5
    s.solver.dt = 1e-4;
    s.solver.T = 2.0;
    PathResult r = run_localized(s, 1, 0);
    CHECK(r.exploded);
    CHECK(r.t_explode.has_value());
    CHECK(*r.t_explode == doctest::Approx(0.5).epsilon(0.02));
    // The ladder recorded strictly increasing hitting times.
    for (std::size_t i = 1; i < r.ladder.tau.size(); ++i) {
        CHECK(r.ladder.tau[i].second > r.ladder.tau[i - 1].second);
        CHECK(r.ladder.tau[i].first == r.ladder.tau[i - 1].first + 1);
    }
    CHECK(r.ladder.tau.size() > 10); // crossed many levels on the way up
}

TEST_CASE("consistency: fixed cutoff levels agree bit-wise below the hit") {
    // Two runs with cutoffs frozen at n and m > n, same noise: identical
    // until the norm first exceeds 3^n.
    Lattice lat = make_lattice(1, 4.0, 64);
    RunSetup s = basic_setup(lat);
    s.b = catalog_b("b.uloge:2");
    s.sigma = catalog_sigma("sigma.bounded:1", s.h, 0.5);
    s.u0 = make_field(lat, 0.5);
    s.solver.dt = 1e-3;
    s.solver.T = 1.0;
    s.solver.trace_stride = 1;

    RunSetup sn = s, sm = s;
    sn.solver.fixed_cutoff_n = 1;
    sm.solver.fixed_cutoff_n = 3;
    PathResult rn = run_localized(sn, 33, 7);
    PathResult rm = run_localized(sm, 33, 7);

    double tau1 = 1e18;
    for (const auto& [lvl, t] : rn.ladder.tau)
        if (lvl == 1)
            tau1 = t;
    REQUIRE(rn.norm_trace.size() == rm.norm_trace.size());
    for (std::size_t i = 0; i < rn.norm_trace.size(); ++i) {
        if (rn.norm_trace[i].t < tau1) {
            CHECK(rn.norm_trace[i].norm.vp_value == rm.norm_trace[i].norm.vp_value);
        }
    }
}

TEST_CASE("positivity is preserved empirically") {
    Lattice lat = make_lattice(1, 4.0, 64);
    RunSetup s = basic_setup(lat);
    s.b = catalog_b("b.power:2");
    s.sigma = catalog_sigma("sigma.bounded:1", s.h, 0.5);
    s.u0 = gaussian_profile(lat, 0.5, 1.0);
    s.solver.dt = 1e-4; // below 1/L_loc for the active cutoff levels
    s.solver.T = 0.2;

    double min_seen = 0.0;
    double scale = 0.0;
    SpectralEngine engine(lat);
    auto observer = [&](std::uint64_t, double, const GridField& u) {
        for (double v : u.values) {
            min_seen = std::min(min_seen, v);
            scale = std::max(scale, std::abs(v));
        }
    };
    for (std::uint32_t path = 0; path < 5; ++path) {
        PathResult r = run_localized(s, 4242, path, engine, observer);
        CHECK_FALSE(r.exploded);
    }
    CHECK(min_seen >= -1e-10 * scale);
}

TEST_CASE("path result is a pure function of (config, seed)") {
    Lattice lat = make_lattice(1, 4.0, 64);
    RunSetup s = basic_setup(lat);
    s.b = catalog_b("b.uloge");
    s.sigma = catalog_sigma("sigma.bounded:1", s.h, 0.5);
    s.u0 = make_field(lat, 1.0);
    s.solver.dt = 1e-3;
    s.solver.T = 0.3;

    PathResult a = run_localized(s, 9, 3);
    PathResult b = run_localized(s, 9, 3);
    REQUIRE(a.norm_trace.size() == b.norm_trace.size());
    for (std::size_t i = 0; i < a.norm_trace.size(); ++i)
        CHECK(a.norm_trace[i].norm.vp_value == b.norm_trace[i].norm.vp_value);
    CHECK(a.max_vp == b.max_vp);

    PathResult c = run_localized(s, 10, 3);
    CHECK(c.max_vp != a.max_vp);
}

TEST_CASE("split-semigroup scheme matches the default at rounding level") {
    Lattice lat = make_lattice(1, 4.0, 64);
    RunSetup s = basic_setup(lat);
    s.b = catalog_b("b.uloge");
    s.sigma = catalog_sigma("sigma.bounded:1", s.h, 0.5);
    s.u0 = make_field(lat, 1.0);
    s.solver.dt = 1e-3;
    s.solver.T = 0.2;

    RunSetup s2 = s;
    s2.solver.scheme = StepScheme::SplitSemigroup;
    PathResult a = run_localized(s, 21, 0);
    PathResult b = run_localized(s2, 21, 0);
    CHECK(a.max_vp == doctest::Approx(b.max_vp).epsilon(1e-10));
}
