#include "oshe/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "oshe/parallel.hpp"

#include "oshe/errors.hpp"
#include "oshe/io.hpp"
#include "oshe/toml_lite.hpp"

namespace oshe {

std::string experiment_name(Experiment e) {
    switch (e) {
        case Experiment::Check: return "check";
        case Experiment::Simulate: return "simulate";
        case Experiment::Global: return "global";
        case Experiment::Blowup: return "blowup";
        case Experiment::Tails: return "tails";
        case Experiment::Moments: return "moments";
        case Experiment::Ode: return "ode";
    }
    return "check";
}

Experiment experiment_from_name(const std::string& name) {
    if (name == "check") return Experiment::Check;
    if (name == "simulate") return Experiment::Simulate;
    if (name == "global") return Experiment::Global;
    if (name == "blowup") return Experiment::Blowup;
    if (name == "tails") return Experiment::Tails;
    if (name == "moments") return Experiment::Moments;
    if (name == "ode") return Experiment::Ode;
    throw ConfigError("unknown experiment '" + name + "'");
}

namespace {

const nlohmann::json* find_path(const nlohmann::json& root, const std::string& path) {
    const nlohmann::json* cur = &root;
    std::size_t pos = 0;
    while (pos != std::string::npos) {
        std::size_t dot = path.find('.', pos);
        std::string key =
            path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (!cur->is_object() || !cur->contains(key))
            return nullptr;
        cur = &(*cur)[key];
        pos = dot == std::string::npos ? dot : dot + 1;
    }
    return cur;
}

template <typename T>
T require(const nlohmann::json& root, const std::string& path) {
    const nlohmann::json* v = find_path(root, path);
    if (!v)
        throw ConfigError("missing config field '" + path + "'");
    try {
        return v->get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config field '" + path + "' has the wrong type");
    }
}

template <typename T>
T get_or(const nlohmann::json& root, const std::string& path, T fallback) {
    const nlohmann::json* v = find_path(root, path);
    if (!v)
        return fallback;
    try {
        return v->get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config field '" + path + "' has the wrong type");
    }
}

std::vector<double> get_list(const nlohmann::json& root, const std::string& path,
                             std::vector<double> fallback) {
    const nlohmann::json* v = find_path(root, path);
    if (!v)
        return fallback;
    if (!v->is_array())
        throw ConfigError("config field '" + path + "' must be an array");
    std::vector<double> out;
    for (const auto& e : *v)
        out.push_back(e.get<double>());
    return out;
}

} // namespace

RunConfig parse_config_text(const std::string& text) {
    nlohmann::json doc;
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            doc = nlohmann::json::parse(text);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("JSON parse error: ") + e.what());
        }
    } else {
        doc = parse_toml_lite(text);
    }

    RunConfig cfg;
    cfg.experiment = experiment_from_name(get_or<std::string>(doc, "experiment", "check"));

    if (const nlohmann::json* s = find_path(doc, "seed")) {
        cfg.seed = s->get<std::uint64_t>();
    } else {
        std::random_device rd;
        cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
        cfg.seed_was_random = true;
    }
    cfg.n_paths = get_or<std::size_t>(doc, "n_paths", 100);
    cfg.workers = get_or<int>(doc, "workers", 1);
    cfg.output_dir = get_or<std::string>(doc, "output_dir", "out");

    const bool needs_lattice = cfg.experiment != Experiment::Ode;
    if (needs_lattice) {
        int d = require<int>(doc, "lattice.d");
        double L = require<double>(doc, "lattice.L");
        int N = require<int>(doc, "lattice.N");
        try {
            cfg.lattice = make_lattice(d, L, N);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("lattice: ") + e.what());
        }
    }

    double alpha = get_or<double>(doc, "noise.alpha", 0.5);
    if (!(alpha > 0.0) || alpha > 1.0)
        throw ConfigError("noise.alpha must lie in (0, 1]");
    std::string kind = get_or<std::string>(doc, "noise.kind", "white");
    cfg.noise.white = kind == "white";
    if (!cfg.noise.white && kind != "spectral")
        throw ConfigError("noise.kind must be 'white' or 'spectral'");
    std::string density =
        get_or<std::string>(doc, "noise.density", cfg.noise.white ? "fhat.white" : "");
    if (density.empty())
        throw ConfigError("missing config field 'noise.density'");
    cfg.noise.spectrum = catalog_density(density, alpha, cfg.lattice.d);
    cfg.noise.label = density;

    cfg.b_name = get_or<std::string>(doc, "nonlinearity.b", "b.zero");
    cfg.sigma_name = get_or<std::string>(doc, "nonlinearity.sigma", "sigma.zero");
    cfg.h_name = get_or<std::string>(doc, "nonlinearity.h", "h.ulogu");
    double nl_alpha = get_or<double>(doc, "nonlinearity.alpha", alpha);
    cfg.nonlinearity =
        resolve_nonlinearity(cfg.b_name, cfg.sigma_name, cfg.h_name, nl_alpha);

    cfg.solver.dt = get_or<double>(doc, "solver.dt", 1e-3);
    cfg.solver.T = get_or<double>(doc, "solver.T", 1.0);
    cfg.solver.nu = get_or<double>(doc, "solver.nu", 0.5);
    cfg.solver.theta = get_or<double>(doc, "solver.theta", 0.3);
    cfg.solver.explode_thresh = get_or<double>(doc, "solver.explode_thresh", 1e12);
    double default_p =
        std::max(2.0, std::ceil((2.0 + cfg.lattice.d) / cfg.nonlinearity.alpha));
    cfg.solver.p = get_or<double>(doc, "solver.p", default_p);
    cfg.solver.trace_stride = get_or<int>(doc, "solver.trace_stride", 1);
    std::string scheme = get_or<std::string>(doc, "solver.scheme", "exp_euler");
    if (scheme == "exp_euler")
        cfg.solver.scheme = StepScheme::ExpEuler;
    else if (scheme == "split_semigroup")
        cfg.solver.scheme = StepScheme::SplitSemigroup;
    else
        throw ConfigError("solver.scheme must be 'exp_euler' or 'split_semigroup'");
    if (!(cfg.solver.dt > 0.0))
        throw ConfigError("solver.dt must be positive");

    cfg.initial.kind = get_or<std::string>(doc, "initial.kind", "gaussian");
    cfg.initial.amplitude = get_or<double>(doc, "initial.amplitude", 1.0);
    cfg.initial.t = get_or<double>(doc, "initial.t", 1.0);
    if (cfg.initial.kind != "gaussian" && cfg.initial.kind != "constant" &&
        cfg.initial.kind != "zero")
        throw ConfigError("initial.kind must be gaussian, constant, or zero");

    cfg.blowup.amplitudes = get_list(doc, "blowup.amplitudes", {});
    cfg.blowup.onset_multipliers =
        get_list(doc, "blowup.onset_multipliers",
                 cfg.blowup.amplitudes.empty()
                     ? std::vector<double>{0.1, 0.32, 1.0, 3.2, 10.0}
                     : std::vector<double>{});
    cfg.blowup.n_sample_traces =
        get_or<std::size_t>(doc, "blowup.n_sample_traces", 4);
    cfg.blowup.mart_window = get_or<double>(doc, "blowup.mart_window", 0.75);
    cfg.blowup.l_target = get_or<double>(doc, "blowup.l_target", 1.0);

    cfg.tails.M = get_or<double>(doc, "tails.M", 1.0);
    cfg.tails.T_list = get_list(doc, "tails.T_list", {0.25, 0.5});
    cfg.tails.deltas = get_list(doc, "tails.deltas", {});
    cfg.tails.min_exceedances = get_or<std::size_t>(doc, "tails.min_exceedances", 100);

    cfg.moments.Lb = get_or<double>(doc, "moments.Lb", 0.0);
    cfg.moments.Ls = get_or<double>(doc, "moments.Ls", 0.5);
    cfg.moments.p_list = get_list(doc, "moments.p_list", {2.0, 4.0});
    cfg.moments.t_grid = get_list(doc, "moments.t_grid", {0.25, 0.5, 0.75, 1.0});
    cfg.moments.u0_amplitude = get_or<double>(doc, "moments.u0_amplitude", 1.0);

    cfg.ode.b = get_or<std::string>(doc, "ode.b", "b.power:2");
    cfg.ode.c = get_or<double>(doc, "ode.c", 1.0);
    cfg.ode.horizon = get_or<double>(doc, "ode.horizon", 10.0);

    cfg.echo = config_echo(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

nlohmann::json config_echo(const RunConfig& cfg) {
    // Canonical document: everything that determines the run's outputs.
    // Worker count and output directory deliberately excluded.
    nlohmann::json j;
    j["experiment"] = experiment_name(cfg.experiment);
    j["seed"] = cfg.seed;
    j["n_paths"] = cfg.n_paths;
    if (cfg.experiment != Experiment::Ode) {
        j["lattice"] = {{"d", cfg.lattice.d}, {"L", cfg.lattice.L}, {"N", cfg.lattice.N}};
        j["noise"] = {{"kind", cfg.noise.white ? "white" : "spectral"},
                      {"density", cfg.noise.label},
                      {"alpha", cfg.noise.spectrum.alpha}};
        j["nonlinearity"] = {{"b", cfg.b_name},
                             {"sigma", cfg.sigma_name},
                             {"h", cfg.h_name},
                             {"alpha", cfg.nonlinearity.alpha}};
        j["solver"] = {{"dt", cfg.solver.dt},
                       {"T", cfg.solver.T},
                       {"nu", cfg.solver.nu},
                       {"theta", cfg.solver.theta},
                       {"explode_thresh", cfg.solver.explode_thresh},
                       {"p", cfg.solver.p},
                       {"trace_stride", cfg.solver.trace_stride},
                       {"scheme", cfg.solver.scheme == StepScheme::ExpEuler
                                      ? "exp_euler"
                                      : "split_semigroup"}};
        j["initial"] = {{"kind", cfg.initial.kind},
                        {"amplitude", cfg.initial.amplitude},
                        {"t", cfg.initial.t}};
    }
    switch (cfg.experiment) {
        case Experiment::Blowup:
            j["blowup"] = {{"amplitudes", cfg.blowup.amplitudes},
                           {"onset_multipliers", cfg.blowup.onset_multipliers},
                           {"n_sample_traces", cfg.blowup.n_sample_traces},
                           {"mart_window", cfg.blowup.mart_window},
                           {"l_target", cfg.blowup.l_target}};
            break;
        case Experiment::Tails:
            j["tails"] = {{"M", cfg.tails.M},
                          {"T_list", cfg.tails.T_list},
                          {"deltas", cfg.tails.deltas},
                          {"min_exceedances", cfg.tails.min_exceedances}};
            break;
        case Experiment::Moments:
            j["moments"] = {{"Lb", cfg.moments.Lb},
                            {"Ls", cfg.moments.Ls},
                            {"p_list", cfg.moments.p_list},
                            {"t_grid", cfg.moments.t_grid},
                            {"u0_amplitude", cfg.moments.u0_amplitude}};
            break;
        case Experiment::Ode:
            j["ode"] = {{"b", cfg.ode.b}, {"c", cfg.ode.c}, {"horizon", cfg.ode.horizon}};
            break;
        default:
            break;
    }
    return j;
}

std::string config_fingerprint(const RunConfig& cfg) {
    // FNV-1a over the canonical dump.
    std::string dump = config_echo(cfg).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

GridField build_initial_field(const RunConfig& cfg) {
    if (cfg.initial.kind == "zero")
        return make_field(cfg.lattice, 0.0);
    if (cfg.initial.kind == "constant")
        return make_field(cfg.lattice, cfg.initial.amplitude);
    return gaussian_profile(cfg.lattice, cfg.initial.t, cfg.initial.amplitude);
}

RunSetup build_setup(const RunConfig& cfg) {
    RunSetup setup;
    setup.lattice = cfg.lattice;
    setup.noise = build_spectrum(cfg.noise, cfg.lattice);
    setup.b = cfg.nonlinearity.b;
    setup.sigma = cfg.nonlinearity.sigma;
    setup.h = cfg.nonlinearity.h;
    setup.alpha = cfg.nonlinearity.alpha;
    setup.u0 = build_initial_field(cfg);
    setup.solver = cfg.solver;
    return setup;
}

ConfigValidation validate(const RunConfig& cfg) {
    ConfigValidation v;
    v.fingerprint = config_fingerprint(cfg);
    switch (cfg.experiment) {
        case Experiment::Global:
            v.report = certify_global(cfg.nonlinearity, cfg.noise);
            v.refused = !v.report.all_passed;
            break;
        case Experiment::Blowup:
            v.report = certify_blowup(cfg.nonlinearity);
            v.refused = !v.report.all_passed;
            break;
        case Experiment::Check:
        case Experiment::Simulate: {
            // Informational: run the full battery, refuse nothing.
            ValidationReport g = certify_global(cfg.nonlinearity, cfg.noise);
            for (auto& c : g.checks)
                v.report.checks.push_back(std::move(c));
            v.report.all_passed = g.all_passed;
            break;
        }
        default:
            break;
    }
    return v;
}

namespace {

nlohmann::json checks_json(const ValidationReport& rep) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : rep.checks) {
        nlohmann::json j = {{"check", c.name},
                            {"holds", c.passed},
                            {"worst_ratio", c.worst_ratio},
                            {"worst_point", c.worst_point},
                            {"value", c.value}};
        if (!c.detail.empty())
            j["detail"] = c.detail;
        arr.push_back(std::move(j));
    }
    return arr;
}

nlohmann::json base_summary(const RunConfig& cfg, const ConfigValidation& val) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["experiment"] = experiment_name(cfg.experiment);
    j["config"] = cfg.echo;
    j["seed"] = cfg.seed;
    j["validation"] = {{"config_fingerprint", val.fingerprint},
                       {"checks", checks_json(val.report)},
                       {"all_passed", val.report.all_passed}};
    return j;
}

std::string csv_header_line(const ConfigValidation& val) {
    return "# config_fingerprint=" + val.fingerprint + "\n";
}

void write_paths_csv(const std::string& path, const ConfigValidation& val,
                     const McSummary& mc, const std::string& extra_col = "",
                     const std::string& extra_val = "") {
    std::string csv = csv_header_line(val);
    csv += "path_id,seed,exploded,t_explode,max_vp,final_time,boundary_mass";
    if (!extra_col.empty())
        csv += "," + extra_col;
    csv += "\n";
    for (const auto& r : mc.paths) {
        csv += std::to_string(r.path_id) + "," + std::to_string(r.seed) + "," +
               (r.exploded ? "1" : "0") + "," + fmt_double(r.t_explode) + "," +
               fmt_double(r.max_vp) + "," + fmt_double(r.final_time) + "," +
               fmt_double(r.boundary_mass);
        if (!extra_val.empty())
            csv += "," + extra_val;
        csv += "\n";
    }
    atomic_write_text(path, csv);
}

void write_trace_csv(const std::string& path, const ConfigValidation& val,
                     const McSummary& mc) {
    std::string csv = csv_header_line(val);
    csv += "t,mean_vp,max_vp\n";
    for (std::size_t i = 0; i < mc.trace_times.size(); ++i)
        csv += fmt_double(mc.trace_times[i]) + "," + fmt_double(mc.mean_vp[i]) + "," +
               fmt_double(mc.max_vp_trace[i]) + "\n";
    atomic_write_text(path, csv);
}

void write_shortfalls_csv(const std::string& path, const ConfigValidation& val,
                          const McSummary& mc) {
    std::string csv = csv_header_line(val);
    csv += "n,a_n,windows,shortfalls,frequency\n";
    for (const auto& r : mc.shortfalls)
        csv += std::to_string(r.n) + "," + fmt_double(r.a_n) + "," +
               std::to_string(r.windows) + "," + std::to_string(r.shortfalls) + "," +
               fmt_double(r.frequency) + "\n";
    atomic_write_text(path, csv);
}

nlohmann::json mc_json(const McSummary& mc) {
    return {{"n_paths", mc.n_paths},
            {"exploded_count", mc.exploded_count},
            {"explosion_fraction", mc.explosion_fraction.estimate},
            {"explosion_fraction_lo", mc.explosion_fraction.lo},
            {"explosion_fraction_hi", mc.explosion_fraction.hi}};
}

void write_gnuplot(const std::string& path, const std::string& body) {
    atomic_write_text(path, "set datafile separator \",\"\nset key left top\n" + body);
}

int dispatch_ode(const RunConfig& cfg, const ConfigValidation& val) {
    ScalarFn b = catalog_b(cfg.ode.b);
    OdeOutcome o = ode_osgood_oracle(b, cfg.ode.c, cfg.ode.horizon);
    nlohmann::json j = base_summary(cfg, val);
    j["result"] = {{"blew_up", o.blew_up},
                   {"time", o.time},
                   {"v_final", o.v_final},
                   {"identity_residual", o.identity_residual},
                   {"n_steps", o.n_steps}};
    atomic_write_text(cfg.output_dir + "/summary.json", j.dump(2) + "\n");
    if (o.blew_up)
        std::printf("ode %s c=%g: BlowupAt(%.6g)\n", cfg.ode.b.c_str(), cfg.ode.c,
                    o.time);
    else
        std::printf("ode %s c=%g: SurvivedTo(%g)\n", cfg.ode.b.c_str(), cfg.ode.c,
                    cfg.ode.horizon);
    return 0;
}

int dispatch_check(const RunConfig& cfg, const ConfigValidation& val) {
    nlohmann::json j = base_summary(cfg, val);
    // Add the Dalang integral when it converges.
    try {
        double upsilon = dalang_upsilon(cfg.noise.spectrum);
        j["dalang_upsilon"] = upsilon;
    } catch (const DivergentIntegral& e) {
        j["dalang_upsilon"] = nullptr;
        j["dalang_detail"] = e.what();
    }
    atomic_write_text(cfg.output_dir + "/report.json", j.dump(2) + "\n");
    atomic_write_text(cfg.output_dir + "/summary.json", j.dump(2) + "\n");
    std::printf("check: %s (report written to %s)\n",
                val.report.all_passed ? "all checks passed" : "some checks FAILED",
                cfg.output_dir.c_str());
    return 0;
}

int dispatch_simulate(const RunConfig& cfg, const ConfigValidation& val) {
    RunSetup setup = build_setup(cfg);
    std::size_t n = std::max<std::size_t>(1, cfg.n_paths);
    std::vector<PathResult> results(n);
    parallel_for_index(n, cfg.workers, [&](std::size_t i) {
        results[i] = run_localized(setup, cfg.seed, static_cast<std::uint32_t>(i),
                                   shared_engine(setup.lattice));
    });

    McSummary mc;
    mc.n_paths = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (results[i].exploded)
            ++mc.exploded_count;
        mc.paths.push_back(PathSummaryRow{
            static_cast<std::uint32_t>(i), cfg.seed, results[i].exploded,
            results[i].t_explode.value_or(std::nan("")), results[i].max_vp,
            results[i].final_time, results[i].boundary_mass_diag});
    }
    mc.explosion_fraction = wilson_interval(mc.exploded_count, n);
    write_paths_csv(cfg.output_dir + "/paths.csv", val, mc);

    // Per-path norm traces (t, lp, linf, vp).
    for (std::size_t i = 0; i < n; ++i) {
        std::string csv = csv_header_line(val);
        csv += "t,lp,linf,vp\n";
        for (const auto& s : results[i].norm_trace)
            csv += fmt_double(s.t) + "," + fmt_double(s.norm.lp_value) + "," +
                   fmt_double(s.norm.linf_value) + "," + fmt_double(s.norm.vp_value) +
                   "\n";
        atomic_write_text(cfg.output_dir + "/trace_" + std::to_string(i) + ".csv", csv);
    }

    nlohmann::json j = base_summary(cfg, val);
    j["result"] = mc_json(mc);
    atomic_write_text(cfg.output_dir + "/summary.json", j.dump(2) + "\n");
    write_gnuplot(cfg.output_dir + "/plot_simulate.gp",
                  "set logscale y\nplot \"trace_0.csv\" using 1:4 with lines title "
                  "\"V_p norm\"\n");
    std::printf("simulate: %zu path(s), %zu exploded\n", n, mc.exploded_count);
    return 0;
}

int dispatch_global(const RunConfig& cfg, const ConfigValidation& val, bool force) {
    RunSetup setup = build_setup(cfg);
    GlobalExistenceParams params;
    params.n_paths = cfg.n_paths;
    params.workers = cfg.workers;
    params.skip_certification = force;
    McSummary mc = run_global_existence(setup, cfg.nonlinearity, cfg.noise, cfg.seed,
                                        params);

    write_paths_csv(cfg.output_dir + "/paths.csv", val, mc);
    write_trace_csv(cfg.output_dir + "/trace_mean.csv", val, mc);
    write_shortfalls_csv(cfg.output_dir + "/shortfalls.csv", val, mc);

    nlohmann::json j = base_summary(cfg, val);
    j["result"] = mc_json(mc);
    nlohmann::json sf = nlohmann::json::array();
    for (const auto& r : mc.shortfalls)
        sf.push_back({{"n", r.n},
                      {"a_n", r.a_n},
                      {"windows", r.windows},
                      {"shortfalls", r.shortfalls},
                      {"frequency", r.frequency}});
    j["result"]["shortfalls"] = sf;
    atomic_write_text(cfg.output_dir + "/summary.json", j.dump(2) + "\n");
    write_gnuplot(cfg.output_dir + "/plot_global.gp",
                  "plot \"trace_mean.csv\" using 1:2 with lines title \"mean V_p\", "
                  "\"trace_mean.csv\" using 1:3 with lines title \"max V_p\"\n");
    std::printf("global: %zu paths, explosion fraction %.4f [%.4f, %.4f]\n",
                mc.n_paths, mc.explosion_fraction.estimate, mc.explosion_fraction.lo,
                mc.explosion_fraction.hi);
    return 0;
}

int dispatch_blowup(const RunConfig& cfg, const ConfigValidation& val, bool force) {
    RunSetup setup = build_setup(cfg);
    BlowupParams params;
    params.n_paths = cfg.n_paths;
    params.workers = cfg.workers;
    params.n_sample_traces = cfg.blowup.n_sample_traces;
    params.mart_window = cfg.blowup.mart_window;
    params.l_target = cfg.blowup.l_target;
    params.skip_certification = force;

    double onset = 0.0;
    params.amplitudes = cfg.blowup.amplitudes;
    if (params.amplitudes.empty()) {
        onset = deterministic_blowup_onset(cfg.nonlinearity.b, cfg.lattice.d,
                                           1.0 - 4.0 * cfg.solver.dt);
        for (double m : cfg.blowup.onset_multipliers)
            params.amplitudes.push_back(m * onset);
    }

    std::vector<BlowupResult> results =
        run_blowup(setup, cfg.nonlinearity, cfg.noise, cfg.seed, params);

    std::string csv = csv_header_line(val);
    csv += "theta,explosion_fraction,lo,hi,ode_blowup_time\n";
    for (const auto& r : results)
        csv += fmt_double(r.amplitude) + "," +
               fmt_double(r.summary.explosion_fraction.estimate) + "," +
               fmt_double(r.summary.explosion_fraction.lo) + "," +
               fmt_double(r.summary.explosion_fraction.hi) + "," +
               fmt_double(r.jensen_ode.blew_up ? r.jensen_ode.time
                                               : std::nan("")) +
               "\n";
    atomic_write_text(cfg.output_dir + "/blowup.csv", csv);

    std::string traces = csv_header_line(val);
    traces += "theta,path_id,t,y,d_star,m_star\n";
    for (const auto& r : results)
        for (const auto& tr : r.sample_traces)
            for (std::size_t k = 0; k < tr.t.size(); ++k)
                traces += fmt_double(r.amplitude) + "," + std::to_string(tr.path_id) +
                          "," + fmt_double(tr.t[k]) + "," + fmt_double(tr.y[k]) + "," +
                          fmt_double(tr.d_star[k]) + "," + fmt_double(tr.m_star[k]) +
                          "\n";
    atomic_write_text(cfg.output_dir + "/traces.csv", traces);

    for (std::size_t i = 0; i < results.size(); ++i)
        write_paths_csv(cfg.output_dir + "/paths_theta" + std::to_string(i) + ".csv",
                        val, results[i].summary, "theta",
                        fmt_double(results[i].amplitude));

    nlohmann::json j = base_summary(cfg, val);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : results)
        arr.push_back({{"theta", r.amplitude},
                       {"summary", mc_json(r.summary)},
                       {"ode_blew_up", r.jensen_ode.blew_up},
                       {"ode_time", r.jensen_ode.time},
                       {"c_f", r.c_f},
                       {"eps_guard", r.eps_guard}});
    j["result"] = {{"per_theta", arr}};
    if (onset > 0.0)
        j["result"]["deterministic_onset"] = onset;
    atomic_write_text(cfg.output_dir + "/summary.json", j.dump(2) + "\n");
    write_gnuplot(cfg.output_dir + "/plot_blowup.gp",
                  "set logscale x\nplot \"blowup.csv\" using 1:2:3:4 with yerrorbars "
                  "title \"explosion fraction\"\n");
    std::printf("blowup: %zu amplitudes, fractions:", results.size());
    for (const auto& r : results)
        std::printf(" %.2f", r.summary.explosion_fraction.estimate);
    std::printf("\n");
    return 0;
}

int dispatch_tails(const RunConfig& cfg, const ConfigValidation& val) {
    nlohmann::json j = base_summary(cfg, val);
    nlohmann::json arr = nlohmann::json::array();
    bool exploded = false;

    for (double T : cfg.tails.T_list) {
        TailParams params;
        params.M = cfg.tails.M;
        params.T = T;
        params.p = cfg.solver.p;
        params.dt = cfg.solver.dt;
        params.delta_grid = cfg.tails.deltas;
        params.n_paths = cfg.n_paths;
        params.workers = cfg.workers;
        params.min_exceedances = cfg.tails.min_exceedances;
        params.alpha = cfg.nonlinearity.alpha;
        TailCurve curve = run_tail_estimate(cfg.lattice, cfg.noise, cfg.seed, params);

        std::string csv = csv_header_line(val);
        csv += "delta,prob,lo,hi,exceedances\n";
        for (std::size_t k = 0; k < curve.deltas.size(); ++k)
            csv += fmt_double(curve.deltas[k]) + "," + fmt_double(curve.tail_probs[k]) +
                   "," + fmt_double(curve.lo[k]) + "," + fmt_double(curve.hi[k]) + "," +
                   std::to_string(curve.exceedances[k]) + "\n";
        atomic_write_text(cfg.output_dir + "/tail_curve_T" + fmt_double(T) + ".csv",
                          csv);
        arr.push_back({{"T", T},
                       {"fitted_slope", curve.fitted_slope},
                       {"r2", curve.r2},
                       {"collapse_stat", curve.collapse_stat},
                       {"M", curve.m_used}});
        if (!curve.sup_norms.empty() &&
            curve.sup_norms.back() > cfg.solver.explode_thresh)
            exploded = true;
    }

    j["result"] = {{"curves", arr}};
    atomic_write_text(cfg.output_dir + "/summary.json", j.dump(2) + "\n");
    write_gnuplot(cfg.output_dir + "/plot_tails.gp",
                  "set logscale y\nplot \"tail_curve_T0.5.csv\" using "
                  "($1*$1):2:3:4 with yerrorbars title \"tail\"\n");
    std::printf("tails: %zu horizon(s) fitted\n", cfg.tails.T_list.size());
    return exploded ? 3 : 0;
}

int dispatch_moments(const RunConfig& cfg, const ConfigValidation& val) {
    MomentParams params;
    params.Lb = cfg.moments.Lb;
    params.Ls = cfg.moments.Ls;
    params.p_list = cfg.moments.p_list;
    params.t_grid = cfg.moments.t_grid;
    params.dt = cfg.solver.dt;
    params.u0_amplitude = cfg.moments.u0_amplitude;
    params.n_paths = cfg.n_paths;
    params.workers = cfg.workers;
    params.alpha = cfg.nonlinearity.alpha;
    MomentCurves mc = run_moment_growth(cfg.lattice, cfg.noise, cfg.seed, params);

    std::string csv = csv_header_line(val);
    csv += "p,t,moment,j_plus\n";
    for (std::size_t ip = 0; ip < mc.p_list.size(); ++ip)
        for (std::size_t it = 0; it < mc.t_grid.size(); ++it)
            csv += fmt_double(mc.p_list[ip]) + "," + fmt_double(mc.t_grid[it]) + "," +
                   fmt_double(mc.moments[ip][it]) + "," + fmt_double(mc.j_plus[it]) +
                   "\n";
    atomic_write_text(cfg.output_dir + "/moments.csv", csv);

    nlohmann::json j = base_summary(cfg, val);
    j["result"] = {{"fitted_c", mc.fitted_c},
                   {"growth_rate", mc.growth_rate},
                   {"Lb", mc.lb},
                   {"Ls", mc.ls}};
    atomic_write_text(cfg.output_dir + "/summary.json", j.dump(2) + "\n");
    write_gnuplot(cfg.output_dir + "/plot_moments.gp",
                  "set logscale y\nplot \"moments.csv\" using 2:3 with points title "
                  "\"moments\"\n");
    std::printf("moments: fitted C = %.4g\n", mc.fitted_c);
    return 0;
}

} // namespace

int dispatch(const RunConfig& cfg, bool force) {
    ensure_dir(cfg.output_dir);
    ConfigValidation val = validate(cfg);
    if (val.refused && !force) {
        nlohmann::json j = base_summary(cfg, val);
        j["refused"] = true;
        atomic_write_text(cfg.output_dir + "/summary.json", j.dump(2) + "\n");
        std::fprintf(stderr,
                     "refused: %s preconditions failed (rerun with --force to "
                     "override)\n",
                     experiment_name(cfg.experiment).c_str());
        for (const auto& c : val.report.checks)
            if (!c.passed)
                std::fprintf(stderr, "  failed: %s %s\n", c.name.c_str(),
                             c.detail.c_str());
        return 2;
    }
    try {
        switch (cfg.experiment) {
            case Experiment::Check: return dispatch_check(cfg, val);
            case Experiment::Simulate: return dispatch_simulate(cfg, val);
            case Experiment::Global: return dispatch_global(cfg, val, force);
            case Experiment::Blowup: return dispatch_blowup(cfg, val, force);
            case Experiment::Tails: return dispatch_tails(cfg, val);
            case Experiment::Moments: return dispatch_moments(cfg, val);
            case Experiment::Ode: return dispatch_ode(cfg, val);
        }
    } catch (const ConditionsFailed& e) {
        std::fprintf(stderr, "refused: %s\n", e.what());
        return 2;
    }
    return 0;
}

} // namespace oshe
