#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nldiff/sweep.hpp"

namespace nldiff {

/// Options shared by the canned benchmark studies. `fast` trades the long
/// N=1024 spatial studies for N=256 (same rates, quarter the cost).
struct TableOptions {
    bool fast = false;
    ThreadPolicy threads = ThreadPolicy::parallel;
    int thread_count = 0;
};

struct TableRow {
    std::string label;
    SweepResult sweep;
};

struct TableResult {
    int table = 0;
    std::vector<TableRow> rows;
};

namespace detail {

struct SchemeRow {
    double theta;
    int value_jumps;
    int forcing_jumps;
};

inline std::string scheme_label(const SchemeRow& row) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "theta=%g My=%d Mf=%d", row.theta, row.value_jumps,
                  row.forcing_jumps);
    return buf;
}

inline const std::vector<SchemeRow>& scheme_rows() {
    static const std::vector<SchemeRow> rows = {
        {0.0, 0, 0}, {0.0, 1, 0}, {0.0, 2, 1}, {1.0, 0, 0}, {1.0, 1, 0},
        {1.0, 2, 1}, {0.5, 0, 0}, {0.5, 1, 0}, {0.5, 2, 1}, {0.5, 3, 2},
    };
    return rows;
}

inline std::vector<double> dyadic_spacings() { return {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128}; }

/// Time-convergence study shared by the smooth benchmarks: N in {4,...,64},
/// fine cubic interpolation so the time error dominates.
inline TableResult time_table(int table, BenchmarkId id, double T, const TableOptions& opt) {
    TableResult out;
    out.table = table;
    const Problem problem = benchmark_problem(id, 1.0, T);
    for (const auto& row : scheme_rows()) {
        SweepSpec spec;
        spec.kind = SweepKind::time;
        spec.values = {4, 8, 16, 32, 64};
        spec.problem = problem;
        spec.base.theta = row.theta;
        spec.base.value_jumps = row.value_jumps;
        spec.base.forcing_jumps = row.forcing_jumps;
        spec.base.quad_points = 16;
        spec.base.n_x = 65;
        spec.base.order_p = 3;
        spec.base.threads = opt.threads;
        spec.base.thread_count = opt.thread_count;
        spec.label = std::string("table") + std::to_string(table) + " " + scheme_label(row);
        out.rows.push_back({scheme_label(row), run_sweep(spec)});
    }
    return out;
}

} // namespace detail

/// Time convergence of the symmetric-constant benchmark (delta=1, T=1).
inline TableResult reproduce_table1(const TableOptions& opt = {}) {
    return detail::time_table(1, BenchmarkId::ex1, 1.0, opt);
}

/// Spatial convergence of the symmetric-constant benchmark: theta=1/2, many
/// time steps, linear and quadratic interpolation rows.
inline TableResult reproduce_table2(const TableOptions& opt = {}) {
    TableResult out;
    out.table = 2;
    const Problem problem = benchmark_problem(BenchmarkId::ex1, 1.0, 1.0);
    for (int p : {1, 2}) {
        SweepSpec spec;
        spec.kind = SweepKind::space;
        spec.values = detail::dyadic_spacings();
        spec.problem = problem;
        spec.base.theta = 0.5;
        spec.base.n_steps = opt.fast ? 256 : 1024;
        spec.base.value_jumps = 3;
        spec.base.forcing_jumps = 2;
        spec.base.quad_points = 16;
        spec.base.order_p = p;
        spec.base.threads = opt.threads;
        spec.base.thread_count = opt.thread_count;
        spec.label = "table2 p=" + std::to_string(p);
        out.rows.push_back({"p=" + std::to_string(p), run_sweep(spec)});
    }
    return out;
}

/// Time convergence of the singular-kernel benchmark (delta=1, T=0.25).
inline TableResult reproduce_table3(const TableOptions& opt = {}) {
    return detail::time_table(3, BenchmarkId::ex2, 0.25, opt);
}

/// Spatial convergence of the singular-kernel benchmark with linear
/// interpolation, horizons delta = 1 and 0.1.
inline TableResult reproduce_table4(const TableOptions& opt = {}) {
    TableResult out;
    out.table = 4;
    for (double delta : {1.0, 0.1}) {
        SweepSpec spec;
        spec.kind = SweepKind::space;
        spec.values = detail::dyadic_spacings();
        spec.problem = benchmark_problem(BenchmarkId::ex2, delta, 0.25);
        spec.base.theta = 0.5;
        spec.base.n_steps = opt.fast ? 256 : 1024;
        spec.base.value_jumps = 3;
        spec.base.forcing_jumps = 2;
        spec.base.quad_points = 16;
        spec.base.order_p = 1;
        spec.base.threads = opt.threads;
        spec.base.thread_count = opt.thread_count;
        char label[32];
        std::snprintf(label, sizeof label, "delta=%g", delta);
        spec.label = std::string("table4 ") + label;
        out.rows.push_back({label, run_sweep(spec)});
    }
    return out;
}

/// Spatial convergence of the discontinuous benchmark on uniform grids with
/// grid-aligned trapezoid quadrature; the L2 error decays at ~1/2 order and
/// the sup error stalls at the jump height.
inline TableResult reproduce_table5(const TableOptions& opt = {}) {
    TableResult out;
    out.table = 5;
    for (double delta : {1.0, 0.1}) {
        SweepSpec spec;
        spec.kind = SweepKind::space;
        spec.values = detail::dyadic_spacings();
        spec.problem = benchmark_problem(BenchmarkId::ex3, delta, 0.5);
        spec.base.theta = 0.5;
        spec.base.n_steps = opt.fast ? 128 : 512;
        spec.base.value_jumps = 1;
        spec.base.forcing_jumps = 1;
        spec.base.family_auto = false;
        spec.base.family = QuadratureFamily::trapezoid;
        spec.base.trapezoid_spacing = 0.0; // align with each sweep point's grid
        spec.base.order_p = 1;
        spec.base.threads = opt.threads;
        spec.base.thread_count = opt.thread_count;
        char label[32];
        std::snprintf(label, sizeof label, "delta=%g", delta);
        spec.label = std::string("table5 ") + label;
        out.rows.push_back({label, run_sweep(spec)});
    }
    return out;
}

inline TableResult reproduce_table(int which, const TableOptions& opt = {}) {
    switch (which) {
        case 1: return reproduce_table1(opt);
        case 2: return reproduce_table2(opt);
        case 3: return reproduce_table3(opt);
        case 4: return reproduce_table4(opt);
        case 5: return reproduce_table5(opt);
        default: throw invalid_parameter("reproduce_table: table index must be 1..5");
    }
}

/// Adaptive-grid study of the discontinuous benchmark: a tolerance sweep with
/// the refinement depth raised one level per point (discontinuity-excluded sup
/// norm, fitted against the realized finest element), plus one representative
/// run for the point-count/L2 trade-off.
struct AdaptiveStudy {
    SweepResult sweep;        // excluded-Linf decay vs realized h_min
    double single_l2 = 0.0;   // representative run: global L2 ...
    int single_points = 0;    // ... and its final grid size
    double single_tolerance = 0.0;
    int single_max_level = 0;
};

inline AdaptiveStudy adaptive_study(const TableOptions& opt = {}) {
    const Problem problem = benchmark_problem(BenchmarkId::ex3, 0.1, 0.5);

    SolverConfig base;
    base.theta = 0.5;
    base.n_steps = opt.fast ? 128 : 512;
    base.value_jumps = 1;
    base.forcing_jumps = 1;
    base.family_auto = false;
    base.family = QuadratureFamily::trapezoid;
    base.order_p = 1;
    base.threads = opt.threads;
    base.thread_count = opt.thread_count;
    base.adaptive = true;
    base.adaptive_max_level = 8;

    AdaptiveStudy study;
    {
        SweepSpec spec;
        spec.kind = SweepKind::adaptive;
        spec.values = {4e-3, 1e-3, 2.5e-4, 6.25e-5};
        spec.problem = problem;
        spec.base = base;
        spec.exclusion = std::make_pair(0.5, 0.5);
        spec.label = "adaptive excluded-Linf study";
        study.sweep = run_sweep(spec);
    }
    {
        SolverConfig single = base;
        single.adaptive_tolerance = 5e-4;
        single.adaptive_max_level = 12;
        single.threads = opt.threads;
        const SolveResult solved = solve(problem, single);
        auto exact_T = [&problem](double x) { return problem.exact_solution(problem.horizon_T, x); };
        study.single_l2 = error_norms(solved.field, exact_T, 0.0, 1.0).l2;
        study.single_points = static_cast<int>(solved.field.values.size());
        study.single_tolerance = single.adaptive_tolerance;
        study.single_max_level = single.adaptive_max_level;
    }
    return study;
}

} // namespace nldiff
