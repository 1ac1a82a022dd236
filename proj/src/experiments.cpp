#include "oshe/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "oshe/errors.hpp"
#include "oshe/parallel.hpp"
#include "oshe/quadrature.hpp"

namespace oshe {

namespace {

const double QNAN = std::numeric_limits<double>::quiet_NaN();

PathSummaryRow summarize_path(const PathResult& r, std::uint32_t id,
                              std::uint64_t seed) {
    PathSummaryRow row;
    row.path_id = id;
    row.seed = seed;
    row.exploded = r.exploded;
    row.t_explode = r.t_explode.value_or(QNAN);
    row.max_vp = r.max_vp;
    row.final_time = r.final_time;
    row.boundary_mass = r.boundary_mass_diag;
    return row;
}

McSummary summarize_paths(const std::vector<PathResult>& results,
                          std::uint64_t seed) {
    McSummary mc;
    mc.n_paths = results.size();
    for (std::size_t i = 0; i < results.size(); ++i) {
        const PathResult& r = results[i];
        if (r.exploded)
            ++mc.exploded_count;
        mc.paths.push_back(summarize_path(r, static_cast<std::uint32_t>(i), seed));
    }
    mc.explosion_fraction = wilson_interval(mc.exploded_count, mc.n_paths);

    // Mean/max vp over paths alive at each trace time of the longest trace.
    std::size_t longest = 0;
    for (const auto& r : results)
        longest = std::max(longest, r.norm_trace.size());
    for (std::size_t k = 0; k < longest; ++k) {
        double sum = 0.0, mx = 0.0;
        std::size_t alive = 0;
        double t = 0.0;
        for (const auto& r : results) {
            if (k < r.norm_trace.size()) {
                t = r.norm_trace[k].t;
                sum += r.norm_trace[k].norm.vp_value;
                mx = std::max(mx, r.norm_trace[k].norm.vp_value);
                ++alive;
            }
        }
        if (alive == 0)
            break;
        mc.trace_times.push_back(t);
        mc.mean_vp.push_back(sum / alive);
        mc.max_vp_trace.push_back(mx);
    }

    // Tripling-shortfall table aggregated per level.
    std::map<int, ShortfallRow> rows;
    for (const auto& r : results)
        for (const auto& [n, short_n] : r.ladder.tripling_shortfalls) {
            auto& row = rows[n];
            row.n = n;
            ++row.windows;
            if (short_n)
                ++row.shortfalls;
        }
    for (const auto& r : results)
        for (const auto& [n, a] : r.ladder.a_seq)
            if (rows.count(n))
                rows[n].a_n = a;
    for (auto& [n, row] : rows) {
        row.frequency =
            row.windows > 0 ? static_cast<double>(row.shortfalls) / row.windows : 0.0;
        mc.shortfalls.push_back(row);
    }
    return mc;
}

} // namespace

ValidationReport certify_global(const NonlinearitySpec& nl, const NoiseModel& noise) {
    ValidationReport rep;
    auto grid = make_sample_grid();

    auto add_envelope = [&rep](const char* name, const EnvelopeReport& r) {
        CheckOutcome c;
        c.name = name;
        c.passed = r.holds;
        c.worst_ratio = r.worst_ratio;
        c.worst_point = r.worst_point;
        rep.add(std::move(c));
    };
    auto add_failure = [&rep](const char* name, const std::exception& e) {
        CheckOutcome c;
        c.name = name;
        c.passed = false;
        c.detail = e.what();
        rep.add(std::move(c));
    };

    try {
        OsgoodVerdict v = osgood_classify(nl.h, 1.0);
        CheckOutcome c;
        c.name = "osgood_infinite";
        c.passed = v.kind == OsgoodKind::Infinite;
        c.value = v.finite() ? v.value : 0.0;
        if (v.finite())
            c.detail = "h has a finite Osgood integral";
        rep.add(std::move(c));
    } catch (const std::exception& e) {
        add_failure("osgood_infinite", e);
    }
    try {
        add_envelope("superlinear_ratio", check_superlinear_ratio(nl.h, nl.alpha, grid));
    } catch (const std::exception& e) {
        add_failure("superlinear_ratio", e);
    }
    try {
        add_envelope("drift_envelope", check_drift_envelope(nl.b, nl.h, grid));
    } catch (const std::exception& e) {
        add_failure("drift_envelope", e);
    }
    try {
        add_envelope("sigma_envelope",
                     check_sigma_envelope(nl.sigma, nl.h, nl.alpha, grid));
    } catch (const std::exception& e) {
        add_failure("sigma_envelope", e);
    }
    try {
        add_envelope("noise_alpha", noise_alpha_check(noise.spectrum));
    } catch (const std::exception& e) {
        add_failure("noise_alpha", e);
    }
    return rep;
}

ValidationReport certify_blowup(const NonlinearitySpec& nl) {
    ValidationReport rep;
    auto add = [&rep](const char* name, bool ok, double value,
                      const std::string& detail) {
        CheckOutcome c;
        c.name = name;
        c.passed = ok;
        c.value = value;
        c.detail = detail;
        rep.add(std::move(c));
    };
    try {
        OsgoodVerdict v = osgood_classify(nl.b, 1.0);
        add("osgood_finite", v.kind == OsgoodKind::Finite,
            v.finite() ? v.value : 0.0,
            v.finite() ? "" : "b does not satisfy the finite Osgood condition");
    } catch (const std::exception& e) {
        add("osgood_finite", false, 0.0, e.what());
    }
    add("b_vanishes_at_zero", std::abs(nl.b(0.0)) == 0.0, nl.b(0.0), "");
    add("sigma_vanishes_at_zero", std::abs(nl.sigma(0.0)) == 0.0, nl.sigma(0.0), "");
    add("sigma_bounded", nl.sigma_sup.has_value(), nl.sigma_sup.value_or(0.0),
        nl.sigma_sup ? "" : "no global bound known for sigma");
    bool monotone = nl.b_nondecreasing_convex;
    if (monotone) {
        // Numeric spot check on the positive axis.
        double prev = nl.b(0.0);
        for (double u = 0.25; u <= 64.0; u += 0.25) {
            double cur = nl.b(u);
            if (cur < prev * (1.0 - 1e-12)) {
                monotone = false;
                break;
            }
            prev = cur;
        }
    }
    add("b_nondecreasing_convex", monotone, 0.0,
        monotone ? "" : "b is not certified nondecreasing convex");
    return rep;
}

McSummary run_global_existence(const RunSetup& setup, const NonlinearitySpec& nl,
                               const NoiseModel& noise, std::uint64_t seed,
                               const GlobalExistenceParams& params) {
    if (!params.skip_certification) {
        ValidationReport rep = certify_global(nl, noise);
        if (!rep.all_passed) {
            std::string what = "run_global_existence: preconditions not certified:";
            for (const auto& c : rep.checks)
                if (!c.passed)
                    what += " " + c.name;
            throw ConditionsFailed(what);
        }
    }
    std::vector<PathResult> results(params.n_paths);
    parallel_for_index(params.n_paths, params.workers, [&](std::size_t i) {
        results[i] = run_localized(setup, seed, static_cast<std::uint32_t>(i),
                                   shared_engine(setup.lattice));
    });
    return summarize_paths(results, seed);
}

// ---------------------------------------------------------------------------

double deterministic_blowup_onset(const ScalarFn& b, int dimension, double horizon) {
    const double kernel0 = std::pow(4.0 * M_PI, -0.5 * dimension);
    auto blows = [&](double theta) {
        OdeOutcome o = ode_osgood_oracle(b, theta * kernel0, horizon);
        return o.blew_up && o.time <= horizon;
    };
    double lo = 1e-6, hi = 1e6;
    if (blows(lo))
        return lo;
    if (!blows(hi))
        return hi;
    for (int i = 0; i < 80; ++i) {
        double mid = std::sqrt(lo * hi);
        if (blows(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

namespace {

// sum_x g(u(x)) w(x) dx^d without allocating a composed field.
double weighted_compose_integral(const GridField& u, const GridField& w,
                                 const ScalarFn& g) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        acc += g(u.values[i]) * w.values[i];
    return acc * u.lattice.cell_volume();
}

} // namespace

std::vector<BlowupResult> run_blowup(const RunSetup& base,
                                     const NonlinearitySpec& nl,
                                     const NoiseModel& noise, std::uint64_t seed,
                                     const BlowupParams& params) {
    (void)noise;
    if (!params.skip_certification) {
        ValidationReport rep = certify_blowup(nl);
        if (!rep.all_passed) {
            std::string what = "run_blowup: preconditions not certified:";
            for (const auto& c : rep.checks)
                if (!c.passed)
                    what += " " + c.name;
            throw ConditionsFailed(what);
        }
    }

    const Lattice& lat = base.lattice;
    const double dt = base.solver.dt;
    const double eps_guard = 4.0 * dt;
    const double t_end = 1.0 - eps_guard;
    const std::uint64_t n_steps = static_cast<std::uint64_t>(std::llround(t_end / dt));

    // Weight fields p_{1-t} shared by every path and amplitude.
    std::vector<GridField> weights(n_steps + 1);
    for (std::uint64_t i = 0; i <= n_steps; ++i)
        weights[i] = gaussian_profile(lat, 1.0 - static_cast<double>(i) * dt, 1.0);

    // C_f = (2 pi)^-d integral_0^{1/2} g(tau) dtau with g the spectral heat trace.
    double c_f = std::pow(2.0 * M_PI, -lat.d) *
                 integrate_decades(
                     [&](double tau) { return spectral_heat_trace(noise.spectrum, tau); },
                     1e-20, 0.5, QuadraturePolicy{1e-8, 0.0, 30});

    const double kernel0 = std::pow(4.0 * M_PI, -0.5 * lat.d);

    std::vector<BlowupResult> out;
    for (double theta : params.amplitudes) {
        RunSetup setup = base;
        setup.solver.T = t_end;
        setup.u0 = gaussian_profile(lat, 1.0, theta);

        BlowupResult res;
        res.amplitude = theta;
        res.c_f = c_f;
        res.eps_guard = eps_guard;
        res.jensen_ode = ode_osgood_oracle(nl.b, theta * kernel0, t_end);

        std::vector<PathResult> results(params.n_paths);
        std::vector<BlowupPathStats> stats(params.n_paths);
        std::vector<BlowupTrace> traces(
            std::min<std::size_t>(params.n_sample_traces, params.n_paths));

        parallel_for_index(params.n_paths, params.workers, [&](std::size_t i) {
            SpectralEngine& engine = shared_engine(lat);
            const bool keep_trace = i < traces.size();

            BlowupPathStats st;
            st.path_id = static_cast<std::uint32_t>(i);
            double y_prev = weighted_integral(setup.u0, weights[0]);
            st.y0 = y_prev;
            double drift_pending =
                dt * weighted_compose_integral(setup.u0, weights[0], nl.b);
            double mstar = 0.0;
            double inf_mstar = 0.0;
            double mart_sum = 0.0;

            BlowupTrace trace;
            if (keep_trace) {
                trace.path_id = st.path_id;
                trace.theta = theta;
                trace.l_target = params.l_target;
                trace.t.push_back(0.0);
                trace.y.push_back(y_prev);
                trace.d_star.push_back(0.0);
                trace.m_star.push_back(0.0);
            }
            double dstar = 0.0;

            auto observer = [&](std::uint64_t step, double t, const GridField& u) {
                double y = weighted_integral(u, weights[step]);
                double dm = (y - y_prev) - drift_pending;
                if (t > 0.5) {
                    mstar += dm;
                    dstar += drift_pending;
                    inf_mstar = std::min(inf_mstar, mstar);
                }
                if (t <= params.mart_window)
                    mart_sum += dm;
                drift_pending = dt * weighted_compose_integral(u, weights[step], nl.b);
                y_prev = y;
                if (keep_trace) {
                    trace.t.push_back(t);
                    trace.y.push_back(y);
                    trace.d_star.push_back(dstar);
                    trace.m_star.push_back(mstar);
                }
            };

            results[i] = run_localized(setup, seed, static_cast<std::uint32_t>(i),
                                       engine, observer);
            st.exploded = results[i].exploded;
            st.inf_mstar = inf_mstar;
            st.mart_window_sum = mart_sum;
            stats[i] = st;
            if (keep_trace)
                traces[i] = std::move(trace);
        });

        res.summary = summarize_paths(results, seed);
        res.path_stats = std::move(stats);
        res.sample_traces = std::move(traces);
        out.push_back(std::move(res));
    }
    return out;
}

// ---------------------------------------------------------------------------

TailCurve run_tail_estimate(const Lattice& lat, const NoiseModel& noise,
                            std::uint64_t seed, const TailParams& params) {
    if (params.n_paths < 2 * params.min_exceedances)
        throw InsufficientPaths("run_tail_estimate: need at least " +
                                std::to_string(2 * params.min_exceedances) +
                                " paths");

    // Constant integrand with V_p norm exactly M.
    const double vol = std::pow(2.0 * lat.L, lat.d);
    const double c = params.M / std::max(std::pow(vol, 1.0 / params.p), 1.0);

    RunSetup setup;
    setup.lattice = lat;
    setup.noise = build_spectrum(noise, lat);
    setup.b = make_scalar_fn([](double) { return 0.0; }, "b.zero");
    setup.sigma = make_scalar_fn([c](double) { return c; }, "sigma.const");
    setup.h = catalog_h("h.ulogu", params.alpha);
    setup.alpha = params.alpha;
    setup.u0 = make_field(lat, 0.0);
    setup.solver.dt = params.dt;
    setup.solver.T = params.T;
    setup.solver.p = params.p;
    setup.solver.trace_stride = 0;

    std::vector<double> sups(params.n_paths);
    parallel_for_index(params.n_paths, params.workers, [&](std::size_t i) {
        PathResult r = run_localized(setup, seed, static_cast<std::uint32_t>(i),
                                     shared_engine(lat));
        sups[i] = r.max_vp;
    });

    TailCurve curve;
    curve.m_used = params.M;
    curve.t_used = params.T;
    curve.alpha_used = params.alpha;
    curve.sup_norms = sups;
    std::sort(curve.sup_norms.begin(), curve.sup_norms.end());

    std::vector<double> deltas = params.delta_grid;
    if (deltas.empty()) {
        // Quantile-spaced grid; every delta keeps enough exceedances to fit.
        for (double q = 0.50; q < 0.995; q += 0.04) {
            std::size_t idx = static_cast<std::size_t>(q * curve.sup_norms.size());
            std::size_t exceed = curve.sup_norms.size() - idx;
            if (exceed < params.min_exceedances)
                break;
            deltas.push_back(curve.sup_norms[idx]);
        }
    }

    std::vector<double> fit_x, fit_y;
    for (double delta : deltas) {
        std::size_t exceed =
            curve.sup_norms.end() -
            std::upper_bound(curve.sup_norms.begin(), curve.sup_norms.end(), delta);
        WilsonInterval w = wilson_interval(exceed, params.n_paths);
        curve.deltas.push_back(delta);
        curve.exceedances.push_back(exceed);
        curve.tail_probs.push_back(w.estimate);
        curve.lo.push_back(w.lo);
        curve.hi.push_back(w.hi);
        if (exceed >= params.min_exceedances && exceed < params.n_paths) {
            fit_x.push_back(delta * delta);
            fit_y.push_back(std::log(w.estimate));
        }
    }
    if (fit_x.size() < 3 ||
        curve.exceedances.empty() ||
        curve.exceedances.front() < params.min_exceedances)
        throw InsufficientPaths(
            "run_tail_estimate: fewer than the required exceedances at the "
            "smallest delta");

    LinearFit fit = linear_fit(fit_x, fit_y);
    curve.fitted_slope = fit.slope;
    curve.intercept = fit.intercept;
    curve.r2 = fit.r2;
    curve.collapse_stat = -fit.slope * params.M * params.M *
                          std::pow(params.T, params.alpha);
    return curve;
}

// ---------------------------------------------------------------------------

MomentCurves run_moment_growth(const Lattice& lat, const NoiseModel& noise,
                               std::uint64_t seed, const MomentParams& params) {
    if (params.n_paths < 100)
        throw InsufficientPaths("run_moment_growth: need >= 100 paths");

    const double Lb = params.Lb, Ls = params.Ls;
    RunSetup setup;
    setup.lattice = lat;
    setup.noise = build_spectrum(noise, lat);
    setup.b = make_scalar_fn([Lb](double u) { return Lb * u; }, "b.linear");
    setup.sigma = make_scalar_fn([Ls](double u) { return Ls * u; }, "sigma.linear");
    setup.h = catalog_h("h.ulogu", params.alpha);
    setup.alpha = params.alpha;
    setup.u0 = make_field(lat, params.u0_amplitude);
    setup.solver.dt = params.dt;
    setup.solver.T = *std::max_element(params.t_grid.begin(), params.t_grid.end());
    setup.solver.trace_stride = 0;

    // Step indices of the sampling times.
    std::vector<std::uint64_t> sample_steps;
    for (double t : params.t_grid)
        sample_steps.push_back(static_cast<std::uint64_t>(std::llround(t / params.dt)));

    const std::size_t origin =
        lat.d == 1 ? static_cast<std::size_t>(lat.N / 2)
                   : static_cast<std::size_t>(lat.N / 2) * lat.N + lat.N / 2;

    // samples[it][i] = u_i(t_it, 0); NaN marks an exploded path.
    std::vector<std::vector<double>> samples(
        params.t_grid.size(), std::vector<double>(params.n_paths, QNAN));

    parallel_for_index(params.n_paths, params.workers, [&](std::size_t i) {
        auto observer = [&](std::uint64_t step, double, const GridField& u) {
            for (std::size_t it = 0; it < sample_steps.size(); ++it)
                if (step == sample_steps[it])
                    samples[it][i] = u.values[origin];
        };
        run_localized(setup, seed, static_cast<std::uint32_t>(i),
                      shared_engine(lat), observer);
    });

    MomentCurves mc;
    mc.p_list = params.p_list;
    mc.t_grid = params.t_grid;
    mc.lb = Lb;
    mc.ls = Ls;

    GridField abs_u0 = setup.u0;
    for (double& v : abs_u0.values)
        v = std::abs(v);
    for (double t : params.t_grid)
        mc.j_plus.push_back(heat_semigroup(abs_u0, t, setup.solver.nu).values[origin]);

    mc.moments.assign(params.p_list.size(),
                      std::vector<double>(params.t_grid.size(), 0.0));
    for (std::size_t ip = 0; ip < params.p_list.size(); ++ip) {
        double p = params.p_list[ip];
        std::vector<double> logm;
        for (std::size_t it = 0; it < params.t_grid.size(); ++it) {
            double acc = 0.0;
            std::size_t n = 0;
            for (double v : samples[it])
                if (std::isfinite(v)) {
                    acc += std::pow(std::abs(v), p);
                    ++n;
                }
            double m = n > 0 ? std::pow(acc / n, 1.0 / p) : QNAN;
            mc.moments[ip][it] = m;
            logm.push_back(std::log(m));
        }
        mc.growth_rate.push_back(linear_fit(params.t_grid, logm).slope);
    }

    // Smallest single C with log m <= log C + log J + C t max(p^{1/a} Ls^{2/a}, Lb).
    auto satisfied = [&](double C) {
        for (std::size_t ip = 0; ip < params.p_list.size(); ++ip) {
            double p = params.p_list[ip];
            double rate = std::max(std::pow(p, 1.0 / params.alpha) *
                                       std::pow(Ls, 2.0 / params.alpha),
                                   Lb);
            for (std::size_t it = 0; it < params.t_grid.size(); ++it) {
                double bound = std::log(C) + std::log(mc.j_plus[it]) +
                               C * params.t_grid[it] * rate;
                if (std::log(mc.moments[ip][it]) > bound)
                    return false;
            }
        }
        return true;
    };
    double lo = 1e-9, hi = 1e9;
    if (!satisfied(hi)) {
        mc.fitted_c = QNAN;
    } else {
        for (int k = 0; k < 200; ++k) {
            double mid = std::sqrt(lo * hi);
            if (satisfied(mid))
                hi = mid;
            else
                lo = mid;
        }
        mc.fitted_c = hi;
    }
    return mc;
}

} // namespace oshe
