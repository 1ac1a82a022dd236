#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "oshe/fft.hpp"
#include "oshe/grid_field.hpp"
#include "oshe/noise.hpp"
#include "oshe/scalar_fn.hpp"

namespace oshe {

// Nonlinearity frozen outside [-3^n, 3^n]; globally Lipschitz whenever the
// base is locally Lipschitz.
struct CutoffFn {
    ScalarFn base;
    int n = 0;
    double level = 1.0;   // 3^n
    double at_pos = 0.0;  // base(3^n)
    double at_neg = 0.0;  // base(-3^n)

    double operator()(double u) const {
        if (u > level)
            return at_pos;
        if (u < -level)
            return at_neg;
        return base(u);
    }
};

CutoffFn make_cutoff(const ScalarFn& g, int n);

// a_n = min(theta * 3^(n+1) / h(3^(n+1)), 1/n).
// Throws DomainError for theta outside (0, 1/3), NonPositiveH if h(3^(n+1)) <= 0.
double tripling_sequence(const ScalarFn& h, double theta, int n);

enum class StepScheme {
    ExpEuler,       // S_dt [u + dt b(u) + sigma(u) dW]
    SplitSemigroup, // S_dt u + S_dt [dt b(u) + sigma(u) dW]
};

// One exponential-Euler step of the mild formulation. A non-finite result
// sets the exploded flag instead of throwing, so the caller can record the
// explosion time.
GridField mild_step(const GridField& u, double dt, const CutoffFn& b,
                    const CutoffFn& sigma, const NoiseIncrement& dW, double nu,
                    SpectralEngine& engine, StepScheme scheme = StepScheme::ExpEuler);

struct LadderState {
    double theta = 0.3;
    int n_current = 1;
    std::vector<std::pair<int, double>> tau;           // (level n, stopping time)
    std::vector<std::pair<int, double>> a_seq;         // (level n, a_n)
    std::vector<std::pair<int, bool>> tripling_shortfalls; // tau_{n+1}-tau_n < a_n
};

struct NormSample {
    double t = 0.0;
    VpNorm norm;
};

struct PathResult {
    bool exploded = false;
    std::optional<double> t_explode;
    double final_time = 0.0;
    double max_vp = 0.0;
    std::vector<NormSample> norm_trace;
    LadderState ladder;
    SeedPath seed_info;
    double boundary_mass_diag = 0.0; // max over trace points
    double clamp_magnitude = 0.0;
    std::uint64_t n_steps = 0;
};

struct SolverParams {
    double dt = 1e-3;
    double T = 1.0;
    double nu = 0.5;
    double theta = 0.3;
    double explode_thresh = 1e12;
    double p = 2.0;              // V_p exponent for the stopping times
    int trace_stride = 1;        // 0 disables the norm trace
    StepScheme scheme = StepScheme::ExpEuler;
    std::optional<int> fixed_cutoff_n; // freeze the ladder at one level (tests)
};

// Everything one path needs; immutable across paths.
struct RunSetup {
    Lattice lattice;
    SpectralWeights noise;
    ScalarFn b;
    ScalarFn sigma;
    ScalarFn h;
    double alpha = 0.5;
    GridField u0;
    SolverParams solver;
};

// Called after every completed finite step with the step index (1-based),
// time, and current field. Must not mutate shared state that feeds back
// into the path.
using StepObserver = std::function<void(std::uint64_t, double, const GridField&)>;

// Time-step one path with the localization ladder: cutoff level 3^n raised
// at each hitting time tau_n (linear interpolation between steps), explosion
// declared past explode_thresh, tripling shortfalls tau_{n+1}-tau_n < a_n
// recorded per level.
PathResult run_localized(const RunSetup& setup, std::uint64_t seed,
                         std::uint32_t path_id, SpectralEngine& engine,
                         const StepObserver& observer = nullptr);

// Convenience overload using the per-thread engine cache.
PathResult run_localized(const RunSetup& setup, std::uint64_t seed,
                         std::uint32_t path_id);

} // namespace oshe
