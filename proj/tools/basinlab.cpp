// basinlab — experiments with noisy discrete gradient descent on 1-D
// periodic landscapes: well/basin analysis, Monte-Carlo ensembles,
// (tau, eps) sweeps, single trajectories, and SVG plots.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "basinlab/report.hpp"
#include "basinlab/svg.hpp"

namespace fs = std::filesystem;
using namespace basinlab;

namespace {

struct CommonFlags {
    std::string function;
    std::vector<double> interval;
    double tau = 0.0;
    double eps = 0.0;
    int steps = 0;
    long trials = 0;
    std::uint64_t seed = 0;
    bool no_flow = false;
    std::string config_path;
    std::string out_dir;
    std::string format = "text";
};

void add_common_flags(CLI::App* cmd, CommonFlags& f, bool experiment_flags) {
    cmd->add_option("--function", f.function,
                    "builtin name (two_depths, two_widths) or expression in x");
    cmd->add_option("--interval", f.interval, "interval endpoints A B")->expected(2);
    if (experiment_flags) {
        cmd->add_option("--tau", f.tau, "step size (> 0)");
        cmd->add_option("--eps", f.eps, "noise standard deviation (>= 0)");
        cmd->add_option("--steps", f.steps, "steps per trial");
        cmd->add_option("--trials", f.trials, "number of trials");
        cmd->add_flag("--no-flow", f.no_flow,
                      "disable flow-mode early stopping for eps = 0 runs");
    }
    cmd->add_option("--seed", f.seed, "master seed (default 42)");
    cmd->add_option("--config", f.config_path, "JSON config file; explicit flags win");
    cmd->add_option("--out", f.out_dir, "directory for result files");
    cmd->add_option("--format", f.format, "stdout format")
        ->check(CLI::IsMember({"csv", "json", "text"}));
}

bool given(const CLI::App* cmd, const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed config " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object: " + path);
    return j;
}

/// Flags override config-file values; config overrides defaults.
ExperimentConfig resolve_experiment(const CLI::App* cmd, const CommonFlags& f) {
    ExperimentConfig cfg;
    if (!f.config_path.empty()) config_from_json(load_config(f.config_path), cfg);
    if (given(cmd, "--function")) cfg.landscape.function = f.function;
    if (given(cmd, "--interval")) cfg.landscape.interval = {f.interval[0], f.interval[1]};
    if (given(cmd, "--tau")) cfg.tau = f.tau;
    if (given(cmd, "--eps")) cfg.eps = f.eps;
    if (given(cmd, "--steps")) cfg.max_steps = f.steps;
    if (given(cmd, "--trials")) cfg.trials = f.trials;
    if (given(cmd, "--seed")) cfg.seed = f.seed;
    if (given(cmd, "--no-flow")) cfg.flow = false;
    return cfg;
}

std::string write_file(const fs::path& dir, const std::string& name,
                       const std::string& content) {
    fs::create_directories(dir);
    fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("failed to write " + p.string());
    return p.string();
}

void write_manifest(const fs::path& dir, const json& config_echo, std::uint64_t seed,
                    std::vector<std::string> outputs) {
    json m = manifest_json(config_echo, seed, outputs);
    write_file(dir, "manifest.json", m.dump(2) + "\n");
}

int run_analyze(const CLI::App* cmd, const CommonFlags& f) {
    ExperimentConfig cfg = resolve_experiment(cmd, f);
    Landscape l = cfg.landscape.resolve();
    WellCatalog cat = build_well_catalog(l);
    TauBound tb = tau_bound(l, cat);

    json j = catalog_to_json(l, cat);
    j["tau_bound"] = {{"mean_width", tb.mean_width},
                      {"mean_gradient", tb.mean_gradient},
                      {"bound", tb.bound}};
    if (f.format == "json") {
        std::cout << j.dump(2) << '\n';
    } else if (f.format == "csv") {
        std::cout << catalog_to_csv(cat);
    } else {
        std::cout << catalog_to_text(l, cat);
        std::printf("tau bound w/g: mean width %.6f, mean |gradient| %.6f, bound %.6f\n",
                    tb.mean_width, tb.mean_gradient, tb.bound);
    }
    if (!f.out_dir.empty()) {
        std::vector<std::string> outputs;
        outputs.push_back(write_file(f.out_dir, "catalog.json", j.dump(2) + "\n"));
        outputs.push_back(write_file(f.out_dir, "catalog.csv", catalog_to_csv(cat)));
        write_manifest(f.out_dir, config_to_json(cfg), cfg.seed, outputs);
    }
    return 0;
}

int run_run(const CLI::App* cmd, const CommonFlags& f) {
    ExperimentConfig cfg = resolve_experiment(cmd, f);
    cfg.validate();
    Landscape l = cfg.landscape.resolve();
    WellCatalog cat = build_well_catalog(l);
    ExperimentResult res = run_experiment(cfg, l, cat, default_thread_count());

    json j = result_to_json(cfg, cat, res);
    if (f.format == "json") {
        std::cout << j.dump(2) << '\n';
    } else if (f.format == "csv") {
        std::cout << histogram_csv(res, cat);
    } else {
        std::printf("%s: tau %g, eps %g, %ld trials x %d steps%s\n", l.name.c_str(), cfg.tau,
                    cfg.eps, cfg.trials, cfg.max_steps,
                    cfg.eps == 0.0 && cfg.flow ? " (flow mode)" : "");
        std::printf("in interval %ld, escaped %ld\n", res.in_interval, res.escaped);
        std::printf("ratio_per_well %s, ratio_total %s\n",
                    detail::fmt_ratio(res.ratio_per_well).c_str(),
                    detail::fmt_ratio(res.ratio_total).c_str());
    }
    if (!f.out_dir.empty()) {
        std::vector<std::string> outputs;
        outputs.push_back(write_file(f.out_dir, "result.json", j.dump(2) + "\n"));
        outputs.push_back(write_file(f.out_dir, "histogram.csv", histogram_csv(res, cat)));
        write_manifest(f.out_dir, config_to_json(cfg), cfg.seed, outputs);
    }
    return 0;
}

int run_sweep_cmd(const CLI::App* cmd, const CommonFlags& f, const std::string& taus_arg,
                  const std::vector<double>& eps_grid) {
    SweepConfig sc;
    if (!f.config_path.empty()) sweep_config_from_json(load_config(f.config_path), sc);
    if (given(cmd, "--function")) sc.base.landscape.function = f.function;
    if (given(cmd, "--interval")) sc.base.landscape.interval = {f.interval[0], f.interval[1]};
    if (given(cmd, "--seed")) sc.base.seed = f.seed;
    if (given(cmd, "--no-flow")) sc.base.flow = false;
    if (given(cmd, "--trials")) sc.trials_per_cell = f.trials;
    if (given(cmd, "--steps")) sc.steps_per_cell = f.steps;
    if (given(cmd, "--taus")) {
        sc.taus.clear();
        std::stringstream ss(taus_arg);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) sc.taus.push_back(std::stod(tok));
    }
    if (given(cmd, "--eps-grid")) {
        sc.eps_min = eps_grid[0];
        sc.eps_max = eps_grid[1];
        sc.eps_count = static_cast<int>(eps_grid[2]);
    }
    sc.validate();

    SweepTable table = run_sweep(sc, default_thread_count());
    std::string csv = sweep_csv(table);

    if (f.format == "csv") {
        std::cout << csv;
    } else if (f.format == "json") {
        std::cout << sweep_to_json(sc, table).dump(2) << '\n';
    } else {
        std::printf("sweep: %zu cells (%zu taus x %d eps), %ld trials x %d steps per cell\n",
                    table.rows.size(), sc.taus.size(), sc.eps_count, sc.trials_per_cell,
                    sc.steps_per_cell);
        for (const auto& gm : gap_metrics(table))
            std::printf("tau %-8g gap width %.3f%s\n", gm.tau, gm.width,
                        gm.onset ? (" onset " + detail::fmt(*gm.onset)).c_str() : "");
    }
    if (!f.out_dir.empty()) {
        std::vector<std::string> outputs;
        outputs.push_back(write_file(f.out_dir, "sweep.csv", csv));
        write_manifest(f.out_dir, sweep_config_to_json(sc), sc.base.seed, outputs);
    }
    return 0;
}

int run_trace(const CLI::App* cmd, const CommonFlags& f, double p0_arg) {
    ExperimentConfig cfg = resolve_experiment(cmd, f);
    cfg.validate();
    Landscape l = cfg.landscape.resolve();
    WellCatalog cat = build_well_catalog(l);

    RngStream s = RngStream::derive(cfg.seed, 0);
    double p0 = given(cmd, "--p0") ? p0_arg : s.uniform(l.lo, l.hi);
    TrialOutcome o = cfg.eps == 0.0 && cfg.flow
                         ? gradient_flow(l, cat, p0, cfg.tau, kFlowGradTol, cfg.max_steps, true)
                         : run_trajectory(l, cat, p0, cfg.tau, cfg.eps, cfg.max_steps, s, true);
    std::string csv = trace_csv(l, o);
    if (!f.out_dir.empty()) {
        std::vector<std::string> outputs;
        outputs.push_back(write_file(f.out_dir, "trace.csv", csv));
        write_manifest(f.out_dir, config_to_json(cfg), cfg.seed, outputs);
    } else {
        std::cout << csv;
    }
    std::fprintf(stderr, "trace: p0 %.12g -> %.12g after %d steps, well %d\n", p0, o.position,
                 o.steps, o.well);
    return 0;
}

int run_plot(const std::string& input, const std::string& kind, std::string output) {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw ConfigError("cannot open input CSV: " + input);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();

    std::string rendered;
    if (kind == "histogram") rendered = svg::render_histogram(svg::parse_histogram_csv(text));
    else rendered = svg::render_sweep(svg::parse_sweep_csv(text));

    if (output.empty()) output = fs::path(input).replace_extension(".svg").string();
    std::ofstream out(output, std::ios::binary);
    out << rendered;
    if (!out) throw std::runtime_error("failed to write " + output);
    std::fprintf(stderr, "wrote %s\n", output.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"noisy gradient descent laboratory for 1-D landscapes"};
    app.set_version_flag("--version", std::string("basinlab ") + kVersion);
    app.require_subcommand(1);

    CommonFlags fa, fr, fs_, ft;
    CLI::App* analyze = app.add_subcommand("analyze", "well/basin catalog of a landscape");
    add_common_flags(analyze, fa, false);

    CLI::App* run = app.add_subcommand("run", "one Monte-Carlo experiment");
    add_common_flags(run, fr, true);

    CLI::App* sweep = app.add_subcommand("sweep", "grid of experiments over (tau, eps)");
    add_common_flags(sweep, fs_, true);
    std::string taus_arg;
    std::vector<double> eps_grid;
    sweep->add_option("--taus", taus_arg, "comma-separated step sizes");
    sweep->add_option("--eps-grid", eps_grid, "eps grid MIN MAX COUNT")->expected(3);

    CLI::App* trace = app.add_subcommand("trace", "record a single trajectory as CSV");
    add_common_flags(trace, ft, true);
    double p0_arg = 0.0;
    trace->add_option("--p0", p0_arg, "start position (default: trial 0 uniform draw)");

    CLI::App* plot = app.add_subcommand("plot", "render a result CSV to SVG");
    std::string plot_input, plot_kind, plot_output;
    plot->add_option("input", plot_input, "CSV produced by run or sweep")->required();
    plot->add_option("--kind", plot_kind, "histogram or sweep")
        ->required()
        ->check(CLI::IsMember({"histogram", "sweep"}));
    plot->add_option("--output", plot_output, "SVG path (default: input with .svg)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (*analyze) return run_analyze(analyze, fa);
        if (*run) return run_run(run, fr);
        if (*sweep) return run_sweep_cmd(sweep, fs_, taus_arg, eps_grid);
        if (*trace) return run_trace(trace, ft, p0_arg);
        if (*plot) return run_plot(plot_input, plot_kind, plot_output);
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
