#include "oshe/solver.hpp"

#include <cmath>

#include "oshe/errors.hpp"

namespace oshe {

CutoffFn make_cutoff(const ScalarFn& g, int n) {
    CutoffFn c;
    c.base = g;
    c.n = n;
    c.level = std::pow(3.0, n);
    c.at_pos = g(c.level);
    c.at_neg = g(-c.level);
    return c;
}

double tripling_sequence(const ScalarFn& h, double theta, int n) {
    if (!(theta > 0.0) || !(theta < 1.0 / 3.0))
        throw DomainError("tripling_sequence: theta must lie in (0, 1/3), got " +
                          std::to_string(theta));
    if (n < 1)
        throw DomainError("tripling_sequence: n must be >= 1");
    const double level = std::pow(3.0, n + 1);
    const double hv = h(level);
    if (!(hv > 0.0))
        throw NonPositiveH("tripling_sequence: h(3^(n+1)) not positive at n = " +
                           std::to_string(n));
    return std::min(theta * level / hv, 1.0 / n);
}

GridField mild_step(const GridField& u, double dt, const CutoffFn& b,
                    const CutoffFn& sigma, const NoiseIncrement& dW, double nu,
                    SpectralEngine& engine, StepScheme scheme) {
    if (dW.dt != dt)
        throw DomainError("mild_step: increment dt mismatch");
    if (!(dW.field.lattice == u.lattice))
        throw DomainError("mild_step: lattice mismatch");

    GridField out;
    out.lattice = u.lattice;
    out.values.resize(u.values.size());

    if (scheme == StepScheme::ExpEuler) {
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            double v = u.values[i];
            out.values[i] = v + dt * b(v) + sigma(v) * dW.field.values[i];
        }
        engine.semigroup_inplace(out, dt, nu);
    } else {
        GridField transported = u;
        engine.semigroup_inplace(transported, dt, nu);
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            double v = u.values[i];
            out.values[i] = dt * b(v) + sigma(v) * dW.field.values[i];
        }
        engine.semigroup_inplace(out, dt, nu);
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] += transported.values[i];
    }

    if (!all_finite(out))
        out.exploded = true;
    return out;
}

namespace {

inline double pow3(int n) { return std::pow(3.0, n); }

int starting_level(double vp0) {
    if (!(vp0 > 0.0))
        return 1;
    int n = static_cast<int>(std::ceil(std::log(vp0) / std::log(3.0)));
    if (n < 1)
        n = 1;
    while (vp0 > pow3(n))
        ++n;
    return n;
}

// Linear interpolation of the first crossing of `threshold` inside one step.
double interpolate_crossing(double t_prev, double t, double v_prev, double v,
                            double threshold) {
    if (v <= v_prev)
        return t;
    double frac = (threshold - v_prev) / (v - v_prev);
    if (frac < 0.0)
        frac = 0.0;
    if (frac > 1.0)
        frac = 1.0;
    return t_prev + frac * (t - t_prev);
}

} // namespace

PathResult run_localized(const RunSetup& setup, std::uint64_t seed,
                         std::uint32_t path_id, SpectralEngine& engine,
                         const StepObserver& observer) {
    const SolverParams& sp = setup.solver;
    const double dt = sp.dt;
    const std::uint64_t n_steps =
        static_cast<std::uint64_t>(std::llround(sp.T / dt));

    PathResult res;
    res.seed_info = SeedPath{seed, path_id, 0};
    res.ladder.theta = sp.theta;

    GridField u = setup.u0;
    VpNorm vp = vp_norm(u, sp.p);
    double vp_prev = vp.vp_value;
    res.max_vp = vp_prev;

    int n_cur = sp.fixed_cutoff_n ? *sp.fixed_cutoff_n : starting_level(vp_prev);
    res.ladder.n_current = n_cur;
    CutoffFn b_cut = make_cutoff(setup.b, n_cur);
    CutoffFn s_cut = make_cutoff(setup.sigma, n_cur);

    const bool tracing = sp.trace_stride > 0;
    if (tracing) {
        res.norm_trace.push_back({0.0, vp});
        res.boundary_mass_diag = boundary_mass_fraction(u, sp.p);
    }

    double t_prev = 0.0;
    engine.take_clamp_magnitude();

    for (std::uint64_t m = 0; m < n_steps; ++m) {
        SeedPath sr{seed, path_id, static_cast<std::uint32_t>(m)};
        NoiseIncrement dW = sample_increment(setup.noise, dt, sr, engine);
        u = mild_step(u, dt, b_cut, s_cut, dW, sp.nu, engine, sp.scheme);
        const double t = static_cast<double>(m + 1) * dt;
        res.n_steps = m + 1;

        if (u.exploded) {
            res.exploded = true;
            res.t_explode = t;
            res.final_time = t;
            break;
        }
        if (observer)
            observer(m + 1, t, u);
        vp = vp_norm(u, sp.p);
        const double v = vp.vp_value;
        if (v > res.max_vp)
            res.max_vp = v;

        // Hitting times: raise the cutoff level for every 3^n crossed.
        bool crossed = false;
        while (v > pow3(n_cur)) {
            double tau = interpolate_crossing(t_prev, t, vp_prev, v, pow3(n_cur));
            res.ladder.tau.emplace_back(n_cur, tau);
            res.ladder.a_seq.emplace_back(n_cur,
                                          tripling_sequence(setup.h, sp.theta, n_cur));
            ++n_cur; // fixed-level runs still observe crossings above the frozen level
            crossed = true;
        }
        if (crossed && !sp.fixed_cutoff_n) {
            b_cut = make_cutoff(setup.b, n_cur);
            s_cut = make_cutoff(setup.sigma, n_cur);
            res.ladder.n_current = n_cur;
        }

        if (v > sp.explode_thresh) {
            res.exploded = true;
            res.t_explode =
                interpolate_crossing(t_prev, t, vp_prev, v, sp.explode_thresh);
            res.final_time = t;
            if (tracing)
                res.norm_trace.push_back({t, vp});
            break;
        }

        if (tracing && ((m + 1) % static_cast<std::uint64_t>(sp.trace_stride) == 0 ||
                        m + 1 == n_steps)) {
            res.norm_trace.push_back({t, vp});
            res.boundary_mass_diag =
                std::max(res.boundary_mass_diag, boundary_mass_fraction(u, sp.p));
        }

        vp_prev = v;
        t_prev = t;
        res.final_time = t;
    }

    // Shortfall table: for consecutive recorded levels, did the norm triple
    // faster than a_n? Windows cut off by the horizon count as no-shortfall
    // only when the full a_n window was observable.
    for (std::size_t i = 0; i < res.ladder.tau.size(); ++i) {
        int n = res.ladder.tau[i].first;
        double tau_n = res.ladder.tau[i].second;
        double a_n = 0.0;
        for (const auto& [lvl, a] : res.ladder.a_seq)
            if (lvl == n)
                a_n = a;
        bool have_next = false;
        double tau_next = 0.0;
        for (std::size_t j = i + 1; j < res.ladder.tau.size(); ++j)
            if (res.ladder.tau[j].first == n + 1) {
                have_next = true;
                tau_next = res.ladder.tau[j].second;
                break;
            }
        if (have_next)
            res.ladder.tripling_shortfalls.emplace_back(n, tau_next - tau_n < a_n);
        else if (res.final_time - tau_n >= a_n && !res.exploded)
            res.ladder.tripling_shortfalls.emplace_back(n, false);
    }

    res.clamp_magnitude = engine.take_clamp_magnitude();
    return res;
}

PathResult run_localized(const RunSetup& setup, std::uint64_t seed,
                         std::uint32_t path_id) {
    return run_localized(setup, seed, path_id, shared_engine(setup.lattice));
}

} // namespace oshe
