#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oshe/experiments.hpp"

namespace oshe {

enum class Experiment { Check, Simulate, Global, Blowup, Tails, Moments, Ode };

std::string experiment_name(Experiment e);
Experiment experiment_from_name(const std::string& name);

struct InitialSection {
    std::string kind = "gaussian"; // constant | gaussian | zero
    double amplitude = 1.0;
    double t = 1.0;                // width parameter for the gaussian profile
};

struct BlowupSection {
    std::vector<double> amplitudes;        // explicit Theta values, or
    std::vector<double> onset_multipliers; // multiples of the deterministic onset
    std::size_t n_sample_traces = 4;
    double mart_window = 0.75;
    double l_target = 1.0;
};

struct TailsSection {
    double M = 1.0;
    std::vector<double> T_list{0.25, 0.5};
    std::vector<double> deltas; // empty: quantile grid
    std::size_t min_exceedances = 100;
};

struct MomentsSection {
    double Lb = 0.0;
    double Ls = 0.5;
    std::vector<double> p_list{2.0, 4.0};
    std::vector<double> t_grid{0.25, 0.5, 0.75, 1.0};
    double u0_amplitude = 1.0;
};

struct OdeSection {
    std::string b = "b.power:2";
    double c = 1.0;
    double horizon = 10.0;
};

struct RunConfig {
    Experiment experiment = Experiment::Check;
    std::uint64_t seed = 0;
    bool seed_was_random = false;
    std::size_t n_paths = 100;
    int workers = 1;
    std::string output_dir = "out";

    Lattice lattice{1, 8.0, 128};
    NoiseModel noise;
    std::string b_name = "b.zero";
    std::string sigma_name = "sigma.zero";
    std::string h_name = "h.ulogu";
    NonlinearitySpec nonlinearity;
    SolverParams solver;
    InitialSection initial;

    BlowupSection blowup;
    TailsSection tails;
    MomentsSection moments;
    OdeSection ode;

    nlohmann::json echo; // canonical config document (no worker count)
};

// Parse TOML (default) or JSON (leading '{') into a RunConfig.
// Throws ConfigError naming the offending field.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical JSON echo and its FNV-1a fingerprint; both are deterministic
// functions of (config, seed).
nlohmann::json config_echo(const RunConfig& cfg);
std::string config_fingerprint(const RunConfig& cfg);

// Builds the initial field from the [initial] section.
GridField build_initial_field(const RunConfig& cfg);

// Assembles the solver-facing RunSetup.
RunSetup build_setup(const RunConfig& cfg);

// Front-loads the conditions checks appropriate for cfg.experiment.
// `refused` is set when the experiment's preconditions fail.
struct ConfigValidation {
    ValidationReport report;
    bool refused = false;
    std::string fingerprint;
};

ConfigValidation validate(const RunConfig& cfg);

// Runs the experiment, writes result files atomically under cfg.output_dir,
// prints a one-line summary. Returns the process exit status: 0 on success,
// 2 on refused validation, 3 on runtime explosion of a non-explosion-tolerant
// experiment.
int dispatch(const RunConfig& cfg, bool force = false);

} // namespace oshe
