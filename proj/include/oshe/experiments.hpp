#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oshe/catalog.hpp"
#include "oshe/noise.hpp"
#include "oshe/ode.hpp"
#include "oshe/solver.hpp"
#include "oshe/stats.hpp"

namespace oshe {

// ---------------------------------------------------------------------------
// Validation (preconditions shared by the experiments and the CLI).

struct CheckOutcome {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double worst_ratio = 0.0;
    double worst_point = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckOutcome> checks;
    bool all_passed = true;

    void add(CheckOutcome c) {
        all_passed = all_passed && c.passed;
        checks.push_back(std::move(c));
    }
};

// Certifies the global-existence hypotheses: infinite Osgood h, superlinear
// ratio, drift and sigma envelopes, noise exponent.
ValidationReport certify_global(const NonlinearitySpec& nl, const NoiseModel& noise);

// Certifies the blow-up hypotheses: finite Osgood b, bounded sigma with
// sigma(0) = 0, b nondecreasing convex with b(0) = 0.
ValidationReport certify_blowup(const NonlinearitySpec& nl);

// ---------------------------------------------------------------------------
// Monte Carlo summaries.

struct PathSummaryRow {
    std::uint32_t path_id = 0;
    std::uint64_t seed = 0;
    bool exploded = false;
    double t_explode = 0.0; // NaN when not exploded
    double max_vp = 0.0;
    double final_time = 0.0;
    double boundary_mass = 0.0;
};

struct ShortfallRow {
    int n = 0;
    std::size_t shortfalls = 0;
    std::size_t windows = 0;
    double frequency = 0.0;
    double a_n = 0.0;
};

struct McSummary {
    std::size_t n_paths = 0;
    std::size_t exploded_count = 0;
    WilsonInterval explosion_fraction;
    std::vector<double> trace_times;
    std::vector<double> mean_vp; // over paths alive at each trace time
    std::vector<double> max_vp_trace;
    std::vector<PathSummaryRow> paths;
    std::vector<ShortfallRow> shortfalls;
};

// ---------------------------------------------------------------------------
// Global existence (zero-explosion proxy plus the tripling-shortfall table).

struct GlobalExistenceParams {
    std::size_t n_paths = 200;
    int workers = 1;
    bool skip_certification = false; // --force
};

McSummary run_global_existence(const RunSetup& setup, const NonlinearitySpec& nl,
                               const NoiseModel& noise, std::uint64_t seed,
                               const GlobalExistenceParams& params);

// ---------------------------------------------------------------------------
// Blow-up dichotomy with the weighted functional Y_t.

struct BlowupTrace {
    std::uint32_t path_id = 0;
    std::vector<double> t;
    std::vector<double> y;       // Y_t
    std::vector<double> d_star;  // drift part accumulated from t = 1/2
    std::vector<double> m_star;  // martingale part accumulated from t = 1/2
    double theta = 0.0;          // initial amplitude
    double l_target = 1.0;       // Doob threshold used in diagnostics
};

struct BlowupPathStats {
    std::uint32_t path_id = 0;
    bool exploded = false;
    double y0 = 0.0;
    double inf_mstar = 0.0;       // inf of M* over [1/2, 1 - eps]
    double mart_window_sum = 0.0; // Y increments minus drift over [0, t_mart]
};

struct BlowupResult {
    double amplitude = 0.0;  // Theta in u_0 = Theta p_1
    McSummary summary;
    OdeOutcome jensen_ode;   // comparison X' = b(X), X_0 = Theta (4 pi)^{-d/2}
    std::vector<BlowupTrace> sample_traces;
    std::vector<BlowupPathStats> path_stats;
    double c_f = 0.0;        // integral of p_{1-s}(y1) p_{1-s}(y2) f(y1-y2)
    double eps_guard = 0.0;  // 4 dt guard before t = 1
};

struct BlowupParams {
    std::vector<double> amplitudes;
    std::size_t n_paths = 100;
    int workers = 1;
    std::size_t n_sample_traces = 4;
    double mart_window = 0.75; // martingale residual window [0, t_mart]
    double l_target = 1.0;
    bool skip_certification = false;
};

std::vector<BlowupResult> run_blowup(const RunSetup& base,
                                     const NonlinearitySpec& nl,
                                     const NoiseModel& noise, std::uint64_t seed,
                                     const BlowupParams& params);

// Smallest amplitude whose Jensen comparison ODE blows up before the guard.
double deterministic_blowup_onset(const ScalarFn& b, int dimension, double horizon);

// ---------------------------------------------------------------------------
// Exponential tail estimate for the stochastic convolution.

struct TailCurve {
    std::vector<double> deltas;
    std::vector<double> tail_probs;
    std::vector<double> lo, hi;          // Wilson bounds
    std::vector<std::size_t> exceedances;
    double fitted_slope = 0.0;           // B in log p = A + B delta^2
    double intercept = 0.0;
    double r2 = 0.0;
    double collapse_stat = 0.0;          // -B * M^2 * T^alpha
    double m_used = 0.0;
    double t_used = 0.0;
    double alpha_used = 0.0;
    std::vector<double> sup_norms;       // per-path sup_t ||Z||_Vp (sorted)
};

struct TailParams {
    double M = 1.0;
    double T = 0.5;
    double p = 2.0;
    double dt = 2.5e-3;
    std::vector<double> delta_grid;      // empty: quantile-derived grid
    std::size_t n_paths = 20000;
    int workers = 1;
    std::size_t min_exceedances = 100;
    double alpha = 0.5;
};

TailCurve run_tail_estimate(const Lattice& lat, const NoiseModel& noise,
                            std::uint64_t seed, const TailParams& params);

// ---------------------------------------------------------------------------
// Moment growth under globally Lipschitz coefficients.

struct MomentCurves {
    std::vector<double> p_list;
    std::vector<double> t_grid;
    std::vector<std::vector<double>> moments; // moments[ip][it] = ||u(t,0)||_p
    std::vector<double> j_plus;               // (p_t * |u_0|)(0)
    std::vector<double> growth_rate;          // per-p slope of log moment vs t
    double fitted_c = 0.0;                    // single C satisfying the bound
    double lb = 0.0, ls = 0.0;
};

struct MomentParams {
    double Lb = 0.0;
    double Ls = 0.5;
    std::vector<double> p_list{2.0, 4.0};
    std::vector<double> t_grid{0.25, 0.5, 0.75, 1.0};
    double dt = 1e-3;
    double u0_amplitude = 1.0;
    std::size_t n_paths = 4000;
    int workers = 1;
    double alpha = 0.5;
};

MomentCurves run_moment_growth(const Lattice& lat, const NoiseModel& noise,
                               std::uint64_t seed, const MomentParams& params);

} // namespace oshe
