#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nldiff/common.hpp"
#include "nldiff/norms.hpp"
#include "nldiff/problem.hpp"
#include "nldiff/stepper.hpp"

namespace nldiff {

enum class SweepKind { time, space, adaptive };

inline const char* to_string(SweepKind k) {
    switch (k) {
        case SweepKind::time: return "time";
        case SweepKind::space: return "space";
        case SweepKind::adaptive: return "adaptive";
    }
    return "?";
}

/// A convergence study: one solve per sweep value, error norms against the
/// problem's exact solution, and a fitted rate over all points.
/// - time: values are time-step counts N; the rate abscissa is dt = T/N.
/// - space: values are grid spacings dx; the abscissa is dx.
/// - adaptive: values are refinement tolerances; each point k also raises
///   max_level by k above the base config (tolerances are expected to shrink
///   ~4x per point), and the abscissa is the realized finest element size.
struct SweepSpec {
    SweepKind kind = SweepKind::time;
    std::vector<double> values;
    Problem problem;
    SolverConfig base;
    bool want_linf = true;
    bool want_l2 = true;
    double window_lo = 0.0;
    double window_hi = 1.0;
    std::optional<std::pair<double, double>> exclusion;
    std::string label;
};

struct SweepPoint {
    double sweep_value = 0.0;
    double error_linf = std::numeric_limits<double>::quiet_NaN();
    double error_l2 = std::numeric_limits<double>::quiet_NaN();
    double rate_running = std::numeric_limits<double>::quiet_NaN();
    int iters_max = 0;
    double wall_ms = 0.0;
    double step = 0.0; // rate abscissa: dt, dx, or realized h_min
    int n_points = 0;
    double h_min = std::numeric_limits<double>::quiet_NaN();
    int quad_nodes = 0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    double cr_linf = std::numeric_limits<double>::quiet_NaN();
    double cr_l2 = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<std::string, std::string>> metadata;
};

namespace detail {

inline SolverConfig config_for_point(const SweepSpec& spec, std::size_t k) {
    SolverConfig c = spec.base;
    const double v = spec.values[k];
    switch (spec.kind) {
        case SweepKind::time:
            c.n_steps = static_cast<int>(std::lround(v));
            break;
        case SweepKind::space:
            c.n_x = static_cast<int>(std::lround((c.x_max - c.x_min) / v)) + 1;
            break;
        case SweepKind::adaptive:
            c.adaptive = true;
            c.adaptive_tolerance = v;
            c.adaptive_max_level = spec.base.adaptive_max_level + static_cast<int>(k);
            break;
    }
    return c;
}

inline SweepPoint run_point(const SweepSpec& spec, std::size_t k) {
    const SolverConfig config = config_for_point(spec, k);
    const SolveResult solved = solve(spec.problem, config);
    auto exact_T = [&spec](double x) { return spec.problem.exact_solution(spec.problem.horizon_T, x); };
    const ErrorNorms norms =
        error_norms(solved.field, exact_T, spec.window_lo, spec.window_hi, spec.exclusion);

    SweepPoint point;
    point.sweep_value = spec.values[k];
    point.error_linf = spec.want_linf ? norms.linf : std::numeric_limits<double>::quiet_NaN();
    point.error_l2 = spec.want_l2 ? norms.l2 : std::numeric_limits<double>::quiet_NaN();
    point.wall_ms = solved.wall_ms;
    point.n_points = static_cast<int>(solved.field.values.size());
    point.quad_nodes = solved.quadrature_nodes;
    for (const auto& level : solved.levels)
        point.iters_max = std::max(point.iters_max, level.max_fixed_point_iterations);
    switch (spec.kind) {
        case SweepKind::time:
            point.step = spec.problem.horizon_T / config.n_steps;
            break;
        case SweepKind::space:
            point.step = spec.values[k];
            break;
        case SweepKind::adaptive: {
            const auto& grid = std::get<AdaptiveGrid>(solved.field.grid);
            point.h_min = grid.h_min();
            point.step = point.h_min;
            break;
        }
    }
    return point;
}

inline std::string format_g17(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace detail

/// Runs every sweep point (concurrently when the base config asks for parallel
/// execution; each point's solve keeps its own thread policy) and fits the
/// rate over all points. Solver errors are rethrown annotated with the point.
inline SweepResult run_sweep(const SweepSpec& spec) {
    if (spec.values.empty()) throw invalid_parameter("run_sweep: no sweep values");
    if (spec.values.size() >= 2) {
        const bool increasing = spec.values[1] > spec.values[0];
        for (std::size_t i = 1; i < spec.values.size(); ++i) {
            const bool step_up = spec.values[i] > spec.values[i - 1];
            if (spec.values[i] == spec.values[i - 1] || step_up != increasing)
                throw invalid_parameter("run_sweep: sweep values must be strictly monotone");
        }
    }
    if (!spec.problem.has_exact())
        throw invalid_parameter("run_sweep: problem has no exact solution to measure against");

    SweepResult result;
    result.points.resize(spec.values.size());

    auto run_at = [&](std::size_t k) {
        try {
            result.points[k] = detail::run_point(spec, k);
        } catch (const std::exception& err) {
            throw numerical_failure("sweep point " + std::to_string(spec.values[k]) + ": " +
                                    err.what());
        }
    };
    if (spec.base.threads == ThreadPolicy::parallel && spec.values.size() > 1) {
        std::vector<std::future<void>> tasks;
        tasks.reserve(spec.values.size());
        for (std::size_t k = 0; k < spec.values.size(); ++k)
            tasks.push_back(std::async(std::launch::async, run_at, k));
        for (auto& t : tasks) t.get();
    } else {
        for (std::size_t k = 0; k < spec.values.size(); ++k) run_at(k);
    }

    for (std::size_t k = 1; k < result.points.size(); ++k) {
        const auto& prev = result.points[k - 1];
        auto& cur = result.points[k];
        const double err_prev = spec.want_linf ? prev.error_linf : prev.error_l2;
        const double err_cur = spec.want_linf ? cur.error_linf : cur.error_l2;
        cur.rate_running = local_rate(prev.step, err_prev, cur.step, err_cur);
    }

    if (result.points.size() >= 3) {
        std::vector<double> steps, linfs, l2s;
        bool linf_ok = spec.want_linf, l2_ok = spec.want_l2;
        for (const auto& p : result.points) {
            steps.push_back(p.step);
            linfs.push_back(p.error_linf);
            l2s.push_back(p.error_l2);
            if (!(p.error_linf > 0.0)) linf_ok = false;
            if (!(p.error_l2 > 0.0)) l2_ok = false;
        }
        if (linf_ok) result.cr_linf = fit_rate(steps, linfs);
        if (l2_ok) result.cr_l2 = fit_rate(steps, l2s);
    }

    // Resolved run metadata; every row is re-runnable from the file alone.
    auto& meta = result.metadata;
    meta.emplace_back("tool", "nldiff 1.0");
    meta.emplace_back("label", spec.label.empty() ? "sweep" : spec.label);
    meta.emplace_back("norms", "dense-probe trapezoid, 16 probes per element");
    meta.emplace_back("sweep.kind", to_string(spec.kind));
    meta.emplace_back("problem", spec.problem.name);
    meta.emplace_back("problem.delta", detail::format_g17(spec.problem.kernel.delta));
    meta.emplace_back("problem.T", detail::format_g17(spec.problem.horizon_T));
    meta.emplace_back("scheme.theta", detail::format_g17(spec.base.theta));
    meta.emplace_back("scheme.N", std::to_string(spec.base.n_steps));
    meta.emplace_back("scheme.M_y", std::to_string(spec.base.value_jumps));
    meta.emplace_back("scheme.M_f", std::to_string(spec.base.forcing_jumps));
    meta.emplace_back("scheme.weighting",
                      spec.base.weighting == JumpWeighting::semigroup_taylor ? "semigroup"
                                                                             : "poisson");
    meta.emplace_back("quadrature.family",
                      spec.base.family_auto ? "auto" : to_string(spec.base.family));
    meta.emplace_back("quadrature.Q", std::to_string(spec.base.quad_points));
    meta.emplace_back("grid.x_min", detail::format_g17(spec.base.x_min));
    meta.emplace_back("grid.x_max", detail::format_g17(spec.base.x_max));
    meta.emplace_back("grid.N_x", std::to_string(spec.base.n_x));
    meta.emplace_back("grid.p", std::to_string(spec.base.order_p));
    meta.emplace_back("adaptive.base_max_level", std::to_string(spec.base.adaptive_max_level));
    meta.emplace_back("exterior", to_string(spec.base.exterior));
    meta.emplace_back("threads",
                      spec.base.threads == ThreadPolicy::parallel ? "parallel" : "serial");
    meta.emplace_back("window", detail::format_g17(spec.window_lo) + ":" +
                                    detail::format_g17(spec.window_hi));
    if (spec.exclusion)
        meta.emplace_back("exclusion", detail::format_g17(spec.exclusion->first) + ":" +
                                           detail::format_g17(spec.exclusion->second));
    std::string blob;
    for (const auto& [k, v] : meta) blob += k + "=" + v + ";";
    meta.emplace_back("config_hash", std::to_string(detail::fnv1a(blob)));
    return result;
}

inline void write_sweep_csv(const SweepResult& result, std::ostream& out) {
    for (const auto& [key, value] : result.metadata) out << "# " << key << " = " << value << "\n";
    out << "sweep_value,error_Linf,error_L2,rate_running,iters_max,wall_ms,step,n_points,h_min,"
           "quad_nodes\n";
    for (const auto& p : result.points) {
        out << detail::format_g17(p.sweep_value) << ',' << detail::format_g17(p.error_linf) << ','
            << detail::format_g17(p.error_l2) << ',' << detail::format_g17(p.rate_running) << ','
            << p.iters_max << ',' << detail::format_g17(p.wall_ms) << ','
            << detail::format_g17(p.step) << ',' << p.n_points << ','
            << detail::format_g17(p.h_min) << ',' << p.quad_nodes << "\n";
    }
    out << "CR," << detail::format_g17(result.cr_linf) << ',' << detail::format_g17(result.cr_l2)
        << ",,,,,,,\n";
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_field(const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::strtod(s.c_str(), nullptr);
}

} // namespace detail

/// Inverse of write_sweep_csv; 17-digit serialization makes this lossless.
inline SweepResult parse_sweep_csv(std::istream& in) {
    SweepResult result;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                auto trim = [](std::string s) {
                    const auto a = s.find_first_not_of(" \t#");
                    const auto b = s.find_last_not_of(" \t\r");
                    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
                };
                result.metadata.emplace_back(trim(line.substr(1, eq - 1)), trim(line.substr(eq + 1)));
            }
            continue;
        }
        if (!header_seen) {
            header_seen = true; // column header
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        if (!fields.empty() && fields[0] == "CR") {
            result.cr_linf = detail::parse_field(fields.size() > 1 ? fields[1] : "");
            result.cr_l2 = detail::parse_field(fields.size() > 2 ? fields[2] : "");
            continue;
        }
        if (fields.size() < 10) throw invalid_parameter("parse_sweep_csv: malformed row");
        SweepPoint p;
        p.sweep_value = detail::parse_field(fields[0]);
        p.error_linf = detail::parse_field(fields[1]);
        p.error_l2 = detail::parse_field(fields[2]);
        p.rate_running = detail::parse_field(fields[3]);
        p.iters_max = static_cast<int>(std::lround(detail::parse_field(fields[4])));
        p.wall_ms = detail::parse_field(fields[5]);
        p.step = detail::parse_field(fields[6]);
        p.n_points = static_cast<int>(std::lround(detail::parse_field(fields[7])));
        p.h_min = detail::parse_field(fields[8]);
        p.quad_nodes = static_cast<int>(std::lround(detail::parse_field(fields[9])));
        result.points.push_back(p);
    }
    return result;
}

} // namespace nldiff
