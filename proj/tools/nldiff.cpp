// Command-line front end: single solves, convergence sweeps, the canned
// benchmark tables, and the Monte Carlo cross-check.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "nldiff/config.hpp"
#include "nldiff/mc.hpp"
#include "nldiff/norms.hpp"
#include "nldiff/stepper.hpp"
#include "nldiff/sweep.hpp"
#include "nldiff/tables.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string csv_path; // "-" or empty: stdout
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "configuration file (key = value lines)");
    cmd->add_option("--set", args.overrides, "key=value overrides applied after the file");
    cmd->add_option("--csv", args.csv_path, "CSV output path (default: stdout)");
}

nldiff::RunSetup load_setup(const CommonArgs& args) {
    nldiff::ConfigMap cfg;
    if (!args.config_path.empty()) cfg = nldiff::ConfigMap::from_file(args.config_path);
    for (const auto& kv : args.overrides) cfg.apply_override(kv);
    return nldiff::resolve_setup(cfg);
}

std::ostream& open_csv(const CommonArgs& args, std::ofstream& file) {
    if (args.csv_path.empty() || args.csv_path == "-") return std::cout;
    file.open(args.csv_path);
    if (!file) throw nldiff::invalid_parameter("cannot open " + args.csv_path);
    return file;
}

int run_solve(const CommonArgs& args, const std::string& diag_path) {
    nldiff::RunSetup setup = load_setup(args);
    std::ofstream diag;
    if (!diag_path.empty()) {
        diag.open(diag_path);
        if (!diag) throw nldiff::invalid_parameter("cannot open " + diag_path);
        setup.config.diagnostics = &diag;
    }
    const nldiff::SolveResult result = nldiff::solve(setup.problem, setup.config);

    std::fprintf(stderr, "solved %s: %zu grid values, quadrature %s with %d nodes, %.1f ms\n",
                 setup.problem.name.c_str(), result.field.values.size(),
                 nldiff::to_string(result.family), result.quadrature_nodes, result.wall_ms);
    if (setup.problem.has_exact()) {
        auto exact = [&](double x) {
            return setup.problem.exact_solution(setup.problem.horizon_T, x);
        };
        const nldiff::ErrorNorms norms = nldiff::error_norms(
            result.field, exact, setup.window_lo, setup.window_hi, setup.exclusion);
        std::fprintf(stderr, "errors vs exact: Linf=%.6e L2=%.6e\n", norms.linf, norms.l2);
    }

    std::ofstream file;
    std::ostream& out = open_csv(args, file);
    out << "x,value\n";
    const auto xs = result.field.node_positions();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        char buf[80];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", xs[i], result.field.values[i]);
        out << buf;
    }
    return 0;
}

int run_sweep_cmd(nldiff::SweepKind kind, const CommonArgs& args, std::vector<double> values) {
    nldiff::RunSetup setup = load_setup(args);
    nldiff::SweepSpec spec;
    spec.kind = kind;
    spec.values = values.empty() ? setup.sweep_values : values;
    if (spec.values.empty())
        throw nldiff::invalid_parameter("no sweep values (use --values or sweep.values)");
    spec.problem = setup.problem;
    spec.base = setup.config;
    spec.window_lo = setup.window_lo;
    spec.window_hi = setup.window_hi;
    spec.exclusion = setup.exclusion;
    spec.label = std::string("sweep-") + nldiff::to_string(kind) + " " + setup.problem.name;

    const nldiff::SweepResult result = nldiff::run_sweep(spec);
    std::ofstream file;
    std::ostream& out = open_csv(args, file);
    nldiff::write_sweep_csv(result, out);
    std::fprintf(stderr, "CR: Linf=%.3f L2=%.3f over %zu points\n", result.cr_linf, result.cr_l2,
                 result.points.size());
    return 0;
}

int run_oracle(const CommonArgs& args, long long samples_flag, long long seed_flag,
               std::vector<double> probes_flag, bool with_solver) {
    nldiff::RunSetup setup = load_setup(args);
    const long long samples = samples_flag > 0 ? samples_flag : setup.oracle_samples;
    const std::uint64_t seed =
        seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag) : setup.seed;
    const std::vector<double> probes = probes_flag.empty() ? setup.oracle_probes : probes_flag;
    const int threads = setup.config.threads == nldiff::ThreadPolicy::parallel
                            ? (setup.config.thread_count > 0 ? setup.config.thread_count
                                                             : nldiff::hardware_threads())
                            : 1;

    std::unique_ptr<nldiff::SolveResult> solved;
    if (with_solver)
        solved = std::make_unique<nldiff::SolveResult>(nldiff::solve(setup.problem, setup.config));

    std::ofstream file;
    std::ostream& out = open_csv(args, file);
    out << "probe,mc_mean,mc_std_error,samples" << (with_solver ? ",solver" : "")
        << (setup.problem.has_exact() ? ",exact\n" : "\n");
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const nldiff::McEstimate est =
            nldiff::feynman_kac_estimate(setup.problem, probes[i], samples, seed + i, threads);
        char buf[200];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%lld", probes[i], est.mean,
                      est.std_error, est.samples);
        out << buf;
        if (with_solver) {
            std::snprintf(buf, sizeof buf, ",%.17g", nldiff::interpolate(solved->field, probes[i]));
            out << buf;
        }
        if (setup.problem.has_exact()) {
            std::snprintf(buf, sizeof buf, ",%.17g",
                          setup.problem.exact_solution(setup.problem.horizon_T, probes[i]));
            out << buf;
        }
        out << "\n";
    }
    return 0;
}

int run_table(int which, bool fast, const std::string& out_dir) {
    nldiff::TableOptions opt;
    opt.fast = fast;
    const nldiff::TableResult table = nldiff::reproduce_table(which, opt);
    for (const auto& row : table.rows) {
        std::string name = out_dir + "/table" + std::to_string(which) + "_" + row.label + ".csv";
        for (auto& c : name)
            if (c == ' ' || c == '=') c = '_';
        std::ofstream out(name);
        nldiff::write_sweep_csv(row.sweep, out);
        std::printf("table %d  %-26s CR_Linf=%7.3f  CR_L2=%7.3f  -> %s\n", which,
                    row.label.c_str(), row.sweep.cr_linf, row.sweep.cr_l2, name.c_str());
    }
    return 0;
}

int run_adaptive_study(bool fast, const std::string& csv_path) {
    nldiff::TableOptions opt;
    opt.fast = fast;
    const nldiff::AdaptiveStudy study = nldiff::adaptive_study(opt);
    std::printf("adaptive single run: L2=%.6e with %d points (tol=%g, max_level=%d)\n",
                study.single_l2, study.single_points, study.single_tolerance,
                study.single_max_level);
    std::printf("excluded-Linf rate vs finest element: %.3f\n", study.sweep.cr_linf);
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        nldiff::write_sweep_csv(study.sweep, out);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"matrix-free solver for 1D nonlocal diffusion with integrable jump kernels"};
    app.require_subcommand(1);

    CommonArgs solve_args, time_args, space_args, adaptive_args, oracle_args;
    std::string diag_path;
    std::vector<double> values_time, values_space, values_adaptive, probes;
    long long oracle_samples = 0, oracle_seed = -1;
    bool oracle_with_solver = false;
    int table_index = 1;
    bool fast = false;
    std::string table_dir = ".";
    std::string adaptive_csv;

    CLI::App* solve_cmd = app.add_subcommand("solve", "run a single backward march");
    add_common(solve_cmd, solve_args);
    solve_cmd->add_option("--diag", diag_path, "write per-level diagnostics to this file");

    CLI::App* time_cmd = app.add_subcommand("sweep-time", "convergence sweep over step counts N");
    add_common(time_cmd, time_args);
    time_cmd->add_option("--values", values_time, "list of N values")->delimiter(',');

    CLI::App* space_cmd = app.add_subcommand("sweep-space", "convergence sweep over spacings dx");
    add_common(space_cmd, space_args);
    space_cmd->add_option("--values", values_space, "list of dx values")->delimiter(',');

    CLI::App* adapt_cmd =
        app.add_subcommand("sweep-adaptive", "adaptive-grid sweep over refinement tolerances");
    add_common(adapt_cmd, adaptive_args);
    adapt_cmd->add_option("--values", values_adaptive, "list of tolerances")->delimiter(',');

    CLI::App* oracle_cmd =
        app.add_subcommand("oracle", "Monte Carlo estimate of the solution at probe points");
    add_common(oracle_cmd, oracle_args);
    oracle_cmd->add_option("--samples", oracle_samples, "paths per probe");
    oracle_cmd->add_option("--seed", oracle_seed, "base RNG seed");
    oracle_cmd->add_option("--probes", probes, "probe points")->delimiter(',');
    oracle_cmd->add_flag("--with-solver", oracle_with_solver,
                         "also run the deterministic solver at the probes");

    CLI::App* table_cmd =
        app.add_subcommand("reproduce-table", "run one of the five benchmark studies");
    table_cmd->add_option("index", table_index, "table index 1..5")->required();
    table_cmd->add_flag("--fast", fast, "reduced time-step counts for the long spatial studies");
    table_cmd->add_option("--out", table_dir, "directory for the per-row CSV files");

    CLI::App* study_cmd = app.add_subcommand(
        "adaptive-study", "adaptive refinement study of the discontinuous benchmark");
    study_cmd->add_flag("--fast", fast, "reduced time-step count");
    study_cmd->add_option("--csv", adaptive_csv, "CSV output path for the tolerance sweep");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed()) return run_solve(solve_args, diag_path);
        if (time_cmd->parsed())
            return run_sweep_cmd(nldiff::SweepKind::time, time_args, values_time);
        if (space_cmd->parsed())
            return run_sweep_cmd(nldiff::SweepKind::space, space_args, values_space);
        if (adapt_cmd->parsed())
            return run_sweep_cmd(nldiff::SweepKind::adaptive, adaptive_args, values_adaptive);
        if (oracle_cmd->parsed())
            return run_oracle(oracle_args, oracle_samples, oracle_seed, probes, oracle_with_solver);
        if (table_cmd->parsed()) return run_table(table_index, fast, table_dir);
        if (study_cmd->parsed()) return run_adaptive_study(fast, adaptive_csv);
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
    return 0;
}
