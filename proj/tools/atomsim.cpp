// atomsim: simulate two-level atoms in a standing-wave laser field, compute
// chaos diagnostics, classify motion regimes, run scattering ensembles and
// convert laboratory units.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "atomsim/dynamics.hpp"
#include "atomsim/ensemble.hpp"
#include "atomsim/io.hpp"
#include "atomsim/lyapunov.hpp"
#include "atomsim/parallel.hpp"
#include "atomsim/regimes.hpp"
#include "atomsim/su2.hpp"
#include "atomsim/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace atomsim;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct CommonOpts {
    std::string out = ".";
    std::string tag;
    std::string config;
    unsigned jobs = 2;
    bool deterministic = false;
    bool gnuplot = false;
};

void add_common(CLI::App* sub, CommonOpts& c, const std::string& default_tag) {
    c.tag = default_tag;
    sub->add_option("--out", c.out, "output directory")->envname("ATOMSIM_OUT");
    sub->add_option("--tag", c.tag, "output file prefix");
    sub->add_option("--jobs", c.jobs, "worker threads for parallel maps")
        ->envname("ATOMSIM_JOBS");
    sub->add_flag("--deterministic", c.deterministic,
                  "sequential order, no wall times in manifests")
        ->envname("ATOMSIM_DETERMINISTIC");
    sub->add_flag("--gnuplot", c.gnuplot, "emit a gnuplot script next to the data");
    sub->add_option("--config", c.config,
                    "flat key = value config file (# comments); flags take precedence");
}

/// Reads a flat `key = value` config file into --key=value tokens.
std::vector<std::string> config_tokens(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw CLI::FileError::Missing(path);
    std::vector<std::string> tokens;
    std::string line;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    while (std::getline(is, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw CLI::FileError(path + ": expected 'key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        for (auto& ch : key)
            if (ch == '_') ch = '-';
        tokens.push_back("--" + key + "=" + value);
    }
    return tokens;
}

/// Splices config-file tokens right after the subcommand name so explicit
/// command-line flags, parsed later, win under the take-last policy.
std::vector<std::string> inject_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    const auto tokens = config_tokens(path);
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (!args[i].empty() && args[i][0] != '-') {
            args.insert(args.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                        tokens.begin(), tokens.end());
            break;
        }
    }
    return args;
}

unsigned effective_jobs(const CommonOpts& c) { return c.deterministic ? 1 : c.jobs; }

fs::path out_path(const CommonOpts& c, const std::string& suffix) {
    return fs::path(c.out) / (c.tag + suffix);
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << content;
}

/// Manifest skeleton shared by all subcommands; wall time is attached by
/// the caller unless --deterministic asked for byte-stable files.
json manifest_base(const CLI::App* sub, const std::string& command) {
    const std::string cfg = const_cast<CLI::App*>(sub)->config_to_str(true, false);
    return json{{"tool", "atomsim"},
                {"version", kVersion},
                {"command", command},
                {"effective_config", cfg},
                {"config_hash", io::fnv1a64(cfg)}};
}

void finish_manifest(json& manifest, const CommonOpts& c,
                     std::chrono::steady_clock::time_point t0,
                     const std::vector<fs::path>& outputs) {
    json files = json::array();
    for (const auto& p : outputs) files.push_back(p.filename().string());
    manifest["outputs"] = std::move(files);
    if (!c.deterministic) {
        manifest["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
}

json profile_json(const SimParams& params) {
    if (const auto* g = std::get_if<GaussianField>(&params.profile))
        return {{"type", "gaussian"}, {"sigma_tau", g->sigma_tau}};
    return {{"type", "constant"}};
}

json integ_json(const IntegratorOptions& o) {
    return {{"abs_tol", o.abs_tol},
            {"rel_tol", o.rel_tol},
            {"sample_dt", o.sample_dt},
            {"drift_abort", o.drift_abort},
            {"renormalize", o.renormalize}};
}

SimParams make_params(double omega_r, double delta, double sigma_tau) {
    SimParams p{omega_r, delta, ConstantField{}};
    if (sigma_tau > 0.0) p.profile = GaussianField{sigma_tau};
    return p;
}

struct Range {
    double lo = 0.0, hi = 0.0;
    std::size_t n = 0;
};

} // namespace

// range strings look like "lo:hi:n"
static Range parse_range_str(const std::string& text) {
    Range r;
    std::istringstream is(text);
    std::string a, b, c;
    if (!std::getline(is, a, ':') || !std::getline(is, b, ':') || !std::getline(is, c))
        throw CLI::ValidationError("range", "expected lo:hi:n, got '" + text + "'");
    try {
        r.lo = std::stod(a);
        r.hi = std::stod(b);
        r.n = static_cast<std::size_t>(std::stoul(c));
    } catch (const std::exception&) {
        throw CLI::ValidationError("range", "expected lo:hi:n, got '" + text + "'");
    }
    if (r.n < 1 || !(r.hi >= r.lo))
        throw CLI::ValidationError("range", "need hi >= lo and n >= 1 in '" + text + "'");
    return r;
}

static std::vector<double> range_axis(const Range& r) {
    if (r.n == 1) return {r.lo};
    return linspace(r.lo, r.hi, r.n);
}

// interval strings look like "lo:hi"
static std::pair<double, double> parse_interval(const std::string& text) {
    std::istringstream is(text);
    std::string a, b;
    if (!std::getline(is, a, ':') || !std::getline(is, b))
        throw CLI::ValidationError("range", "expected lo:hi, got '" + text + "'");
    try {
        return {std::stod(a), std::stod(b)};
    } catch (const std::exception&) {
        throw CLI::ValidationError("range", "expected lo:hi, got '" + text + "'");
    }
}

// ---------------------------------------------------------------------------
// simulate

namespace {

struct SimulateOpts {
    CommonOpts common;
    double delta = 0.0, p0 = 0.0, x0 = 0.0, omega_r = 1e-3, sigma_tau = 0.0;
    double tau = 1000.0, tol = 1e-10, sample_dt = 0.1, drift_abort = 1e-6;
    bool renormalize = false, check_analytic = false, fig3 = false;
    std::vector<double> portrait_marks;
    std::string fig2;
};

int run_simulate(const CLI::App* sub, SimulateOpts& o) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!o.fig2.empty()) {
        if (o.fig2 == "RF") { o.delta = 0.8; o.p0 = 45.0; }
        else if (o.fig2 == "CF") { o.delta = 0.2; o.p0 = 45.0; }
        else if (o.fig2 == "CW") { o.delta = 0.2; o.p0 = 10.0; }
        else { o.delta = -0.2; o.p0 = 5.0; }
        o.x0 = 0.0;
        o.omega_r = 1e-3;
        o.sigma_tau = 0.0;
    } else if (!o.fig3 && (!sub->count("--delta") || !sub->count("--p0"))) {
        throw CLI::RequiredError("--delta and --p0 (or a --paper-fig preset)");
    }
    if (o.check_analytic && (o.delta != 0.0 || o.x0 != 0.0 || o.sigma_tau != 0.0))
        throw CLI::ValidationError("--check-analytic",
                                   "the closed form needs delta = 0, x0 = 0, constant field");

    const IntegratorOptions integ{.abs_tol = o.tol, .rel_tol = o.tol,
                                  .sample_dt = o.sample_dt, .drift_abort = o.drift_abort,
                                  .renormalize = o.renormalize};
    std::vector<fs::path> outputs;
    json manifest = manifest_base(sub, "simulate");
    manifest["integrator"] = integ_json(integ);

    if (o.fig3) {
        // 50 trajectories, p0 from 0 to 50, shared initial position
        const auto p0s = linspace(0.0, 50.0, 50);
        const SimParams params = make_params(o.omega_r, o.delta, o.sigma_tau);
        std::vector<Trajectory> trajs(p0s.size());
        std::vector<std::string> errors(p0s.size());
        parallel_for(p0s.size(), effective_jobs(o.common), [&](std::size_t i) {
            try {
                trajs[i] = integrate(AtomState::ground(o.x0, p0s[i]), params, o.tau, integ);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        });
        std::ostringstream finals;
        finals << "p0,x_final,p_final\n";
        for (std::size_t i = 0; i < p0s.size(); ++i) {
            if (!errors[i].empty()) throw integration_error(errors[i]);
            const auto traj_path = out_path(o.common, "_p" + std::to_string(i) + "_trajectory.csv");
            std::ostringstream os;
            io::write_trajectory_csv(os, trajs[i]);
            write_file(traj_path, os.str());
            outputs.push_back(traj_path);
            finals << io::fmt17(p0s[i]) << ',' << io::fmt17(trajs[i].states.back().x) << ','
                   << io::fmt17(trajs[i].states.back().p) << '\n';
        }
        const auto final_path = out_path(o.common, "_final.csv");
        write_file(final_path, finals.str());
        outputs.push_back(final_path);
        manifest["params"] = {{"delta", o.delta}, {"p0", "0..50 x50"}, {"x0", o.x0},
                              {"omega_r", o.omega_r}, {"tau_end", o.tau},
                              {"profile", profile_json(params)}};
    } else {
        const SimParams params = make_params(o.omega_r, o.delta, o.sigma_tau);
        const auto traj = integrate(AtomState::ground(o.x0, o.p0), params, o.tau, integ);

        const auto traj_path = out_path(o.common, "_trajectory.csv");
        std::ostringstream os;
        io::write_trajectory_csv(os, traj);
        write_file(traj_path, os.str());
        outputs.push_back(traj_path);

        manifest["params"] = {{"delta", o.delta}, {"p0", o.p0}, {"x0", o.x0},
                              {"omega_r", o.omega_r}, {"tau_end", o.tau},
                              {"profile", profile_json(params)}};
        manifest["drifts"] = {{"norm", traj.norm_drift}};
        if (traj.h_monitored) manifest["drifts"]["energy"] = traj.h_drift;

        if (!o.portrait_marks.empty()) {
            const auto portrait = group_parameter_portrait(traj, o.portrait_marks);
            const auto ppath = out_path(o.common, "_portrait.csv");
            std::ostringstream ps;
            io::write_portrait_csv(ps, traj, portrait.tau_marks.back());
            write_file(ppath, ps.str());
            outputs.push_back(ppath);
            manifest["portrait"] = {{"tau_marks", portrait.tau_marks},
                                    {"coverage", portrait.coverage}};
        }
        if (o.check_analytic) {
            double max_dev = 0.0;
            for (std::size_t k = 0; k < traj.size(); ++k) {
                const auto exact = resonance_solution(o.p0, o.omega_r, traj.tau[k]);
                const auto a = traj.states[k].to_array();
                const auto b = exact.to_array();
                for (int i = 0; i < 6; ++i)
                    max_dev = std::max(max_dev, std::abs(a[i] - b[i]));
            }
            manifest["check_analytic"] = {{"max_abs_deviation", max_dev}};
            std::cout << json{{"max_abs_deviation", max_dev}}.dump() << '\n';
        }
        if (o.common.gnuplot) {
            const auto gp = out_path(o.common, ".gp");
            std::ostringstream gs;
            gs << "set datafile separator ','\n"
               << "set key off\nset xlabel 'tau'\n"
               << "set multiplot layout 2,1\n"
               << "set ylabel 'x / 2pi'\n"
               << "plot '" << traj_path.filename().string()
               << "' using 1:($2/(2*pi)) with lines\n"
               << "set ylabel 'u'\n"
               << "plot '" << traj_path.filename().string() << "' using 1:10 with lines\n"
               << "unset multiplot\n";
            write_file(gp, gs.str());
            outputs.push_back(gp);
        }
    }

    finish_manifest(manifest, o.common, t0, outputs);
    write_file(out_path(o.common, "_manifest.json"), manifest.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// lyap

struct LyapOpts {
    CommonOpts common;
    double delta = 0.0, p0 = 0.0, x0 = 0.0, omega_r = 1e-3, sigma_tau = 0.0;
    double tau_total = 1e5, tol = 1e-10, renorm_interval = 1.0;
    std::string method = "variational";
};

int run_lyap(const CLI::App* sub, LyapOpts& o) {
    const auto t0 = std::chrono::steady_clock::now();
    LyapunovOptions opts;
    opts.method = o.method == "two-trajectory" ? LyapunovMethod::TwoTrajectory
                                               : LyapunovMethod::Variational;
    opts.abs_tol = opts.rel_tol = o.tol;
    opts.renorm_interval = o.renorm_interval;
    const SimParams params = make_params(o.omega_r, o.delta, o.sigma_tau);
    const auto result =
        max_lyapunov(AtomState::ground(o.x0, o.p0), params, o.tau_total, opts);

    std::vector<fs::path> outputs;
    std::ostringstream conv;
    conv << "tau,lambda_running\n";
    for (const auto& [t, lam] : result.convergence_series)
        conv << io::fmt17(t) << ',' << io::fmt17(lam) << '\n';
    const auto conv_path = out_path(o.common, "_lyap_convergence.csv");
    write_file(conv_path, conv.str());
    outputs.push_back(conv_path);

    json manifest = manifest_base(sub, "lyap");
    manifest["params"] = {{"delta", o.delta}, {"p0", o.p0}, {"x0", o.x0},
                          {"omega_r", o.omega_r}, {"profile", profile_json(params)}};
    manifest["result"] = {{"lambda", result.lambda},
                          {"converged", result.converged},
                          {"tau_total", result.tau_total},
                          {"method", o.method},
                          {"renorm_interval", o.renorm_interval},
                          {"tol", o.tol}};
    std::cout << manifest["result"].dump() << '\n';
    finish_manifest(manifest, o.common, t0, outputs);
    write_file(out_path(o.common, "_lyapunov.json"), manifest.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// map

struct MapOpts {
    CommonOpts common;
    std::string delta_range, p0_range;
    double omega_r = 1e-3, tau_total = 1e4, tol = 1e-10;
    bool fig1 = false;
};

int run_map(const CLI::App* sub, MapOpts& o) {
    const auto t0 = std::chrono::steady_clock::now();
    if (o.fig1) {
        if (o.delta_range.empty()) o.delta_range = "-1:1:101";
        if (o.p0_range.empty()) o.p0_range = "0:60:101";
        o.omega_r = 1e-3;
    } else if (o.delta_range.empty() || o.p0_range.empty()) {
        throw CLI::RequiredError("--delta and --p0 ranges (or --paper-fig1)");
    }
    const auto delta_axis = range_axis(parse_range_str(o.delta_range));
    const auto p0_axis = range_axis(parse_range_str(o.p0_range));

    LyapunovOptions opts;
    opts.abs_tol = opts.rel_tol = o.tol;
    const SimParams params = make_params(o.omega_r, 0.0, 0.0);
    const auto map = lyapunov_map(delta_axis, p0_axis, params, o.tau_total, opts,
                                  effective_jobs(o.common));

    std::vector<fs::path> outputs;
    std::ostringstream cs;
    io::write_chaosmap_csv(cs, map);
    const auto csv_path = out_path(o.common, "_map.csv");
    write_file(csv_path, cs.str());
    outputs.push_back(csv_path);

    if (o.common.gnuplot) {
        std::ostringstream ms;
        io::write_chaosmap_matrix(ms, map);
        const auto mat_path = out_path(o.common, "_map_matrix.dat");
        write_file(mat_path, ms.str());
        outputs.push_back(mat_path);
        const auto gp = out_path(o.common, ".gp");
        write_file(gp, "set xlabel 'delta'\nset ylabel 'p0'\nset view map\n"
                       "splot '" + mat_path.filename().string() +
                       "' nonuniform matrix with image\n");
        outputs.push_back(gp);
    }

    json manifest = manifest_base(sub, "map");
    manifest["axes"] = {{"delta", {{"lo", delta_axis.front()}, {"hi", delta_axis.back()},
                                   {"n", delta_axis.size()}}},
                        {"p0", {{"lo", p0_axis.front()}, {"hi", p0_axis.back()},
                                {"n", p0_axis.size()}}}};
    manifest["params"] = {{"omega_r", o.omega_r}, {"tau_total", o.tau_total},
                          {"tol", o.tol}, {"method", "variational"}};
    std::size_t failed = 0;
    for (double v : map.lambda_grid)
        if (std::isnan(v)) ++failed;
    manifest["failed_cells"] = failed;
    finish_manifest(manifest, o.common, t0, outputs);
    write_file(out_path(o.common, "_map_meta.json"), manifest.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyOpts {
    CommonOpts common;
    double delta = 0.0, p0 = 0.0, x0 = 0.0, omega_r = 1e-3;
    double tau = 1e4, tau_lyap = 2e4, tol = 1e-10;
    double lambda_threshold = 5e-3, p_hyst = 0.5;
    std::vector<double> portrait_marks{100.0, 500.0, 1000.0};
    bool fig2 = false;
};

json classify_one(const ClassifyOpts& o, const std::string& name, double delta, double p0,
                  const CommonOpts& common, std::vector<fs::path>& outputs) {
    const SimParams params = make_params(o.omega_r, delta, 0.0);
    const IntegratorOptions integ{.abs_tol = o.tol, .rel_tol = o.tol};
    const auto traj = integrate(AtomState::ground(o.x0, p0), params, o.tau, integ);
    const auto lyap = max_lyapunov(AtomState::ground(o.x0, p0), params, o.tau_lyap,
                                   {.abs_tol = o.tol, .rel_tol = o.tol});
    const auto features = extract_features(traj, lyap.lambda, {.p_hyst = o.p_hyst});
    const auto label = classify(features, o.lambda_threshold);

    CommonOpts tagged = common;
    if (!name.empty()) tagged.tag = common.tag + "_" + name;
    const auto portrait = group_parameter_portrait(
        traj, o.portrait_marks.empty() ? std::vector<double>{o.tau} : o.portrait_marks);
    std::ostringstream ps;
    io::write_portrait_csv(ps, traj, portrait.tau_marks.back());
    const auto ppath = out_path(tagged, "_portrait.csv");
    write_file(ppath, ps.str());
    outputs.push_back(ppath);

    return json{{"name", name.empty() ? "run" : name},
                {"params", {{"delta", delta}, {"p0", p0}, {"x0", o.x0},
                            {"omega_r", o.omega_r}, {"tau", o.tau}}},
                {"features", {{"node_crossings", features.node_crossings},
                              {"direction_reversals", features.direction_reversals},
                              {"max_excursion", features.max_excursion},
                              {"confined_to_first_well", features.confined_to_first_well}}},
                {"lambda", lyap.lambda},
                {"lambda_converged", lyap.converged},
                {"thresholds", {{"lambda_threshold", o.lambda_threshold},
                                {"p_hyst", o.p_hyst}}},
                {"portrait_coverage", portrait.coverage},
                {"label", to_string(label)}};
}

int run_classify(const CLI::App* sub, ClassifyOpts& o) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!o.fig2 && (!sub->count("--delta") || !sub->count("--p0")))
        throw CLI::RequiredError("--delta and --p0 (or --paper-fig2)");

    std::vector<fs::path> outputs;
    json manifest = manifest_base(sub, "classify");
    if (o.fig2) {
        json cases = json::array();
        cases.push_back(classify_one(o, "RF", 0.8, 45.0, o.common, outputs));
        cases.push_back(classify_one(o, "CF", 0.2, 45.0, o.common, outputs));
        cases.push_back(classify_one(o, "CW", 0.2, 10.0, o.common, outputs));
        cases.push_back(classify_one(o, "T", -0.2, 5.0, o.common, outputs));
        manifest["cases"] = cases;
        for (const auto& c : manifest["cases"])
            std::cout << c["name"].get<std::string>() << ": "
                      << c["label"].get<std::string>() << '\n';
    } else {
        manifest["cases"] = json::array({classify_one(o, "", o.delta, o.p0, o.common, outputs)});
        std::cout << manifest["cases"][0]["label"].get<std::string>() << '\n';
    }
    finish_manifest(manifest, o.common, t0, outputs);
    write_file(out_path(o.common, "_classification.json"), manifest.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// ensemble

struct EnsembleOpts {
    CommonOpts common;
    std::size_t n = 10000;
    double x0_mean = 0.0, p0_mean = 10.0, sigma_x = 2.0, sigma_p = 2.0;
    std::uint64_t seed = 1;
    double delta = 0.2, omega_r = 1e-3, sigma_tau = 400.0;
    double tau = 1000.0, tol = 1e-10;
    double bin_width = 0.25;
    std::string hist_range = "-6:6";
    bool fig10b = false;
};

json ensemble_one(const EnsembleOpts& o, const std::string& name, double delta,
                  std::vector<fs::path>& outputs) {
    EnsembleSpec spec;
    spec.n_atoms = o.n;
    spec.x0_mean = o.x0_mean;
    spec.p0_mean = o.p0_mean;
    spec.sigma_x = o.sigma_x;
    spec.sigma_p = o.sigma_p;
    spec.seed = o.seed;
    spec.params = make_params(o.omega_r, delta, o.sigma_tau);
    spec.tau_end = o.tau;
    spec.integ.abs_tol = spec.integ.rel_tol = o.tol;
    const auto result = run_ensemble(spec, effective_jobs(o.common));

    CommonOpts tagged = o.common;
    if (!name.empty()) tagged.tag = o.common.tag + "_" + name;

    std::ostringstream es;
    io::write_ensemble_csv(es, result);
    const auto epath = out_path(tagged, "_ensemble.csv");
    write_file(epath, es.str());
    outputs.push_back(epath);

    // final positions in units of the optical wavelength
    std::vector<double> xs;
    xs.reserve(result.atoms.size());
    for (const auto& a : result.atoms)
        if (a.ok) xs.push_back(a.final_state.x / kTwoPi);
    const auto [lo, hi] = parse_interval(o.hist_range);
    const auto hist = histogram(xs, o.bin_width, lo, hi);
    std::ostringstream hs;
    io::write_histogram_csv(hs, hist);
    const auto hpath = out_path(tagged, "_histogram.csv");
    write_file(hpath, hs.str());
    outputs.push_back(hpath);

    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double v : xs) var += (v - mean) * (v - mean);
    var /= static_cast<double>(xs.size());

    return json{{"name", name.empty() ? "run" : name},
                {"delta", delta},
                {"n_atoms", o.n},
                {"seed", o.seed},
                {"excluded", result.failures},
                {"mean_wavelengths", mean},
                {"std_wavelengths", std::sqrt(var)}};
}

int run_ensemble_cmd(const CLI::App* sub, EnsembleOpts& o) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<fs::path> outputs;
    json manifest = manifest_base(sub, "ensemble");
    manifest["spec"] = {{"n_atoms", o.n}, {"x0_mean", o.x0_mean}, {"p0_mean", o.p0_mean},
                        {"sigma_x", o.sigma_x}, {"sigma_p", o.sigma_p}, {"seed", o.seed},
                        {"omega_r", o.omega_r}, {"sigma_tau", o.sigma_tau},
                        {"tau_end", o.tau}, {"tol", o.tol}};
    if (o.fig10b) {
        json runs = json::array();
        runs.push_back(ensemble_one(o, "cw", 0.2, outputs));   // chaotic walking
        runs.push_back(ensemble_one(o, "rm", 1.0, outputs));   // regular motion
        manifest["runs"] = runs;
    } else {
        manifest["runs"] = json::array({ensemble_one(o, "", o.delta, outputs)});
    }
    for (const auto& r : manifest["runs"])
        std::cout << r["name"].get<std::string>() << ": std="
                  << r["std_wavelengths"].get<double>() << " wavelengths, excluded="
                  << r["excluded"].get<std::size_t>() << '\n';
    finish_manifest(manifest, o.common, t0, outputs);
    write_file(out_path(o.common, "_manifest.json"), manifest.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// convert

struct ConvertOpts {
    double wavelength = 670.7e-9;
    double rabi = 126e6;
    double recoil = 0.0;     // derived from wavelength and mass when absent
    double mass_amu = 7.016003;  // lithium-7
    double radius = 5e-4;
    double vz = 0.0;
    double sigma_tau = 0.0;
};

int run_convert(ConvertOpts& o) {
    constexpr double kHbar = 1.054571817e-34;
    constexpr double kAmu = 1.66053906660e-27;
    if (o.vz <= 0.0 && o.sigma_tau <= 0.0)
        throw CLI::RequiredError("--vz or --sigma-tau");

    const double k_f = kTwoPi / o.wavelength;
    double recoil = o.recoil;
    if (recoil <= 0.0)
        recoil = kHbar * k_f * k_f / (4.0 * std::numbers::pi * o.mass_amu * kAmu);
    const double omega0 = kTwoPi * o.rabi;
    double vz = o.vz, sigma_tau = o.sigma_tau;
    if (vz <= 0.0) vz = o.radius * omega0 / sigma_tau;
    PhysicalSetup setup{o.wavelength, recoil, o.rabi, o.radius, vz};
    const auto norm = normalize_physical(setup);
    if (o.sigma_tau > 0.0 && std::abs(norm.sigma_tau - o.sigma_tau) > 1e-9 * o.sigma_tau)
        throw std::runtime_error("inconsistent vz and sigma_tau");

    std::cout << json{{"omega_r", norm.omega_r},
                      {"sigma_tau", norm.sigma_tau},
                      {"vz_m_per_s", vz},
                      {"recoil_frequency_hz", recoil},
                      {"k_f_per_m", k_f}}
                     .dump(2)
              << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// repmat

struct RepmatOpts {
    double j = 0.5;
    double g_re = 1.0, g_im = 0.0, gt_re = 0.0, gt_im = 0.0;
    double phase = 0.0;
    std::string out;
};

int run_repmat(RepmatOpts& o) {
    const double two_j = 2.0 * o.j;
    if (std::abs(two_j - std::round(two_j)) > 1e-9)
        throw CLI::ValidationError("--j", "j must be a half-integer");
    const auto u = representation_matrix(static_cast<int>(std::lround(two_j)),
                                         {{o.g_re, o.g_im}, {o.gt_re, o.gt_im}}, o.phase);
    const std::string text = io::matrix_to_json(u);
    if (!o.out.empty())
        write_file(o.out, text + "\n");
    else
        std::cout << text << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-level atoms in a standing-wave laser field: trajectories, "
                 "Lyapunov exponents, chaos maps, regime classification, "
                 "scattering ensembles"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    SimulateOpts sim;
    auto* s_sim = app.add_subcommand("simulate", "integrate one trajectory (or a bundle)");
    add_common(s_sim, sim.common, "run");
    s_sim->add_option("--delta", sim.delta, "normalized detuning");
    s_sim->add_option("--p0", sim.p0, "initial momentum");
    s_sim->add_option("--x0", sim.x0, "initial position");
    s_sim->add_option("--omega-r", sim.omega_r, "normalized recoil frequency");
    s_sim->add_option("--sigma-tau", sim.sigma_tau, "Gaussian interaction time (0 = constant field)");
    s_sim->add_option("--tau", sim.tau, "integration time");
    s_sim->add_option("--tol", sim.tol, "integrator tolerance")->envname("ATOMSIM_TOL");
    s_sim->add_option("--sample-dt", sim.sample_dt, "output sampling step");
    s_sim->add_option("--drift-abort", sim.drift_abort, "invariant drift abort threshold");
    s_sim->add_flag("--renormalize", sim.renormalize, "project (g,G) to unit norm at samples");
    s_sim->add_flag("--check-analytic", sim.check_analytic,
                    "report max deviation from the resonance closed form");
    s_sim->add_option("--portrait-marks", sim.portrait_marks,
                      "emit a (g1,g2) portrait truncated at these times")->delimiter(',');
    s_sim->add_option("--paper-fig2", sim.fig2, "reference trajectory preset")
        ->check(CLI::IsMember({"RF", "CF", "CW", "T"}));
    s_sim->add_flag("--paper-fig3", sim.fig3, "50-trajectory momentum bundle preset");

    LyapOpts lyap;
    auto* s_lyap = app.add_subcommand("lyap", "maximum Lyapunov exponent of one trajectory");
    add_common(s_lyap, lyap.common, "run");
    s_lyap->add_option("--delta", lyap.delta, "normalized detuning")->required();
    s_lyap->add_option("--p0", lyap.p0, "initial momentum")->required();
    s_lyap->add_option("--x0", lyap.x0, "initial position");
    s_lyap->add_option("--omega-r", lyap.omega_r, "normalized recoil frequency");
    s_lyap->add_option("--sigma-tau", lyap.sigma_tau, "Gaussian interaction time (0 = constant)");
    s_lyap->add_option("--tau-total", lyap.tau_total, "total integration time");
    s_lyap->add_option("--tol", lyap.tol, "integrator tolerance")->envname("ATOMSIM_TOL");
    s_lyap->add_option("--renorm-interval", lyap.renorm_interval, "tangent renormalization spacing");
    s_lyap->add_option("--method", lyap.method, "variational | two-trajectory")
        ->check(CLI::IsMember({"variational", "two-trajectory"}));

    MapOpts map;
    auto* s_map = app.add_subcommand("map", "Lyapunov exponent over a (delta, p0) grid");
    add_common(s_map, map.common, "run");
    s_map->add_option("--delta", map.delta_range, "detuning axis lo:hi:n");
    s_map->add_option("--p0", map.p0_range, "momentum axis lo:hi:n");
    s_map->add_option("--omega-r", map.omega_r, "normalized recoil frequency");
    s_map->add_option("--tau-total", map.tau_total, "integration time per cell");
    s_map->add_option("--tol", map.tol, "integrator tolerance")->envname("ATOMSIM_TOL");
    s_map->add_flag("--paper-fig1", map.fig1, "map preset: delta -1:1:101, p0 0:60:101");

    ClassifyOpts cls;
    auto* s_cls = app.add_subcommand("classify", "label a trajectory RF/CF/CW/T/CT");
    add_common(s_cls, cls.common, "run");
    s_cls->add_option("--delta", cls.delta, "normalized detuning");
    s_cls->add_option("--p0", cls.p0, "initial momentum");
    s_cls->add_option("--x0", cls.x0, "initial position");
    s_cls->add_option("--omega-r", cls.omega_r, "normalized recoil frequency");
    s_cls->add_option("--tau", cls.tau, "classification run length");
    s_cls->add_option("--tau-lyap", cls.tau_lyap, "Lyapunov run length");
    s_cls->add_option("--tol", cls.tol, "integrator tolerance")->envname("ATOMSIM_TOL");
    s_cls->add_option("--lambda-threshold", cls.lambda_threshold, "chaos threshold on lambda");
    s_cls->add_option("--p-hyst", cls.p_hyst, "reversal hysteresis band on |p|");
    s_cls->add_option("--portrait-marks", cls.portrait_marks, "portrait truncation times")
        ->delimiter(',');
    s_cls->add_flag("--paper-fig2", cls.fig2, "classify the four reference cases");

    EnsembleOpts ens;
    auto* s_ens = app.add_subcommand("ensemble", "Monte Carlo atomic beam scattering");
    add_common(s_ens, ens.common, "run");
    s_ens->add_option("--n", ens.n, "number of atoms");
    s_ens->add_option("--x0-mean", ens.x0_mean, "mean initial position");
    s_ens->add_option("--p0-mean", ens.p0_mean, "mean initial momentum");
    s_ens->add_option("--sigma-x", ens.sigma_x, "rms of the position distribution");
    s_ens->add_option("--sigma-p", ens.sigma_p, "rms of the momentum distribution");
    s_ens->add_option("--seed", ens.seed, "ensemble seed")->envname("ATOMSIM_SEED");
    s_ens->add_option("--delta", ens.delta, "normalized detuning");
    s_ens->add_option("--omega-r", ens.omega_r, "normalized recoil frequency");
    s_ens->add_option("--sigma-tau", ens.sigma_tau, "Gaussian interaction time (0 = constant)");
    s_ens->add_option("--tau", ens.tau, "integration time per atom");
    s_ens->add_option("--tol", ens.tol, "integrator tolerance")->envname("ATOMSIM_TOL");
    s_ens->add_option("--bin-width", ens.bin_width, "histogram bin width in wavelengths");
    s_ens->add_option("--range", ens.hist_range, "histogram range lo:hi in wavelengths");
    s_ens->add_flag("--paper-fig10b", ens.fig10b,
                    "scattering presets at delta 0.2 (cw) and 1.0 (rm)");

    ConvertOpts cvt;
    auto* s_cvt = app.add_subcommand("convert", "laboratory units to (omega_r, sigma_tau)");
    s_cvt->add_option("--wavelength", cvt.wavelength, "transition wavelength [m]");
    s_cvt->add_option("--rabi", cvt.rabi, "maximal Rabi frequency / 2pi [Hz]");
    s_cvt->add_option("--recoil", cvt.recoil, "recoil frequency [Hz] (else from mass)");
    s_cvt->add_option("--mass-amu", cvt.mass_amu, "atomic mass [amu] used when --recoil absent");
    s_cvt->add_option("--radius", cvt.radius, "laser beam waist radius [m]");
    s_cvt->add_option("--vz", cvt.vz, "longitudinal beam velocity [m/s]");
    s_cvt->add_option("--sigma-tau", cvt.sigma_tau, "normalized interaction time");

    RepmatOpts rep;
    auto* s_rep = app.add_subcommand("repmat", "spin-j representation matrix as JSON");
    s_rep->add_option("--j", rep.j, "half-integer representation label")->required();
    s_rep->add_option("--g-re", rep.g_re, "Re g");
    s_rep->add_option("--g-im", rep.g_im, "Im g");
    s_rep->add_option("--gt-re", rep.gt_re, "Re g-tilde");
    s_rep->add_option("--gt-im", rep.gt_im, "Im g-tilde");
    s_rep->add_option("--phase", rep.phase, "accumulated level-splitting phase");
    s_rep->add_option("--out", rep.out, "write to this file instead of stdout");

    int rc = 0;
    s_sim->callback([&] { rc = run_simulate(s_sim, sim); });
    s_lyap->callback([&] { rc = run_lyap(s_lyap, lyap); });
    s_map->callback([&] { rc = run_map(s_map, map); });
    s_cls->callback([&] { rc = run_classify(s_cls, cls); });
    s_ens->callback([&] { rc = run_ensemble_cmd(s_ens, ens); });
    s_cvt->callback([&] { rc = run_convert(cvt); });
    s_rep->callback([&] { rc = run_repmat(rep); });

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = inject_config(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << json{{"error", {{"type", "invalid_argument"}, {"message", e.what()}}}}.dump()
                  << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << json{{"error", {{"type", "domain_error"}, {"message", e.what()}}}}.dump()
                  << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"type", "numerical_failure"}, {"message", e.what()}}}}.dump()
                  << '\n';
        return 1;
    }
    return rc;
}
