#pragma once

#include <chrono>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "nldiff/common.hpp"
#include "nldiff/expectation.hpp"
#include "nldiff/grid.hpp"
#include "nldiff/problem.hpp"
#include "nldiff/quadrature.hpp"

namespace nldiff {

enum class ThreadPolicy { serial, parallel };

struct SolverConfig {
    double theta = 0.5;
    int n_steps = 16;      // time levels; dt = T / n_steps
    int value_jumps = 2;   // jumps retained in the expectation of the field
    int forcing_jumps = 1; // jumps retained in the expectation of the forcing
    int quad_points = 16;  // nodes of the 1D rule (per half-support for the singular split)
    bool family_auto = true;
    QuadratureFamily family = QuadratureFamily::gauss_legendre;
    double trapezoid_spacing = 0.0; // 0: align with the spatial grid spacing

    double x_min = 0.0;
    double x_max = 1.0;
    int n_x = 65;
    int order_p = 3;

    double fixed_point_tol = 1e-13;
    int fixed_point_max_iter = 100;
    ExteriorMode exterior = ExteriorMode::exact_extension;

    ThreadPolicy threads = ThreadPolicy::serial;
    int thread_count = 0; // 0: hardware concurrency

    bool adaptive = false;
    double adaptive_tolerance = 1e-3;
    int adaptive_max_level = 12;

    // Weighting of the truncated jump expansion. The semigroup-consistent
    // default keeps constants exact and is the variant whose truncation error
    // carries powers of the centered jump operator; the literal Poisson
    // weights drop the tail mass instead.
    JumpWeighting weighting = JumpWeighting::semigroup_taylor;

    bool collapse_symmetric = false;
    std::ostream* diagnostics = nullptr; // optional per-level key=value log
};

struct LevelDiagnostics {
    int level = 0;           // time index n of the produced field
    double t = 0.0;          // t_n
    int max_fixed_point_iterations = 0;
    int node_count = 0;
    double wall_ms = 0.0;
};

struct SolveResult {
    SolutionField field; // approximation of u(T, .) at the grid points
    std::vector<LevelDiagnostics> levels;
    double dt = 0.0;
    int quadrature_nodes = 0;
    QuadratureFamily family = QuadratureFamily::gauss_legendre;
    double wall_ms = 0.0;
};

namespace detail {

inline int resolve_threads(const SolverConfig& config) {
    if (config.threads == ThreadPolicy::serial) return 1;
    return config.thread_count > 0 ? config.thread_count : hardware_threads();
}

inline WeightedQuadrature make_rule(const Problem& problem, const SolverConfig& config,
                                    double grid_dx) {
    QuadratureFamily family = config.family;
    if (config.family_auto) {
        family = problem.kernel.singularity == KernelSingularity::inverse_sqrt_at_zero
                     ? QuadratureFamily::gauss_jacobi_sqrt
                     : QuadratureFamily::gauss_legendre;
    }
    if (family == QuadratureFamily::trapezoid) {
        const double spacing = config.trapezoid_spacing > 0.0 ? config.trapezoid_spacing : grid_dx;
        return density_weighted_trapezoid(problem.kernel, spacing);
    }
    return density_weighted(problem.kernel, config.quad_points);
}

/// Exterior policy of the field at backward time t_level (forward time T - t_level).
inline ExteriorPolicy make_exterior(const Problem& problem, const SolverConfig& config,
                                    double t_level) {
    if (config.exterior == ExteriorMode::exact_extension && problem.has_exact()) {
        const double forward_t = problem.horizon_T - t_level;
        auto u = problem.exact_solution;
        return ExteriorPolicy::exact([u, forward_t](double x) { return u(forward_t, x); });
    }
    if (config.exterior == ExteriorMode::linear_extrapolation) return ExteriorPolicy::linear();
    return ExteriorPolicy::clamp();
}

struct NodalUpdate {
    double value = 0.0;
    int iterations = 0;
};

/// One node of the theta-scheme update at backward times (t_n, t_next):
/// assemble the explicit part A, then solve y = A + theta dt f(t_n, x, y) by
/// fixed-point iteration (contractive because theta dt L < 1).
template <typename FieldLike>
NodalUpdate update_node(double x, double t_n, double t_next, double dt, const Problem& problem,
                        const SolverConfig& config, const ExpectationOperator& op_value,
                        const ExpectationOperator& op_forcing, FieldLike&& field_next) {
    double a = apply(op_value, field_next, x);
    if (config.theta < 1.0) {
        const double forcing_expectation = apply(
            op_forcing,
            [&](double xq) { return problem.forcing(t_next, xq, field_next(xq)); }, x);
        a += (1.0 - config.theta) * dt * forcing_expectation;
    }
    if (config.theta == 0.0) return {a, 0};

    double y = a; // explicit part as initial guess
    for (int it = 1; it <= config.fixed_point_max_iter; ++it) {
        const double y_next = a + config.theta * dt * problem.forcing(t_n, x, y);
        if (std::abs(y_next - y) <= config.fixed_point_tol) return {y_next, it};
        y = y_next;
    }
    throw numerical_failure("fixed-point iteration did not converge at x = " + std::to_string(x));
}

inline void emit_diagnostics(const SolverConfig& config, const LevelDiagnostics& d) {
    if (config.diagnostics != nullptr) {
        (*config.diagnostics) << "level=" << d.level << " t=" << d.t << " nodes=" << d.node_count
                              << " max_fp_iters=" << d.max_fixed_point_iterations
                              << " wall_ms=" << d.wall_ms << "\n";
    }
}

} // namespace detail

/// Terminal condition phi sampled at the grid points (time level N).
inline SolutionField terminal_field(const Problem& problem, const UniformGrid& grid,
                                    const SolverConfig& config) {
    return sample_field(grid, problem.terminal, config.order_p,
                        detail::make_exterior(problem, config, problem.horizon_T));
}

/// One backward step of the fully-discrete scheme: field at level n from the
/// field at level n+1. `level_out`, when given, receives the diagnostics.
inline SolutionField step_back(const SolutionField& field_next, int n, const Problem& problem,
                               const SolverConfig& config, const ExpectationOperator& op_value,
                               const ExpectationOperator& op_forcing,
                               LevelDiagnostics* level_out = nullptr) {
    const auto* grid = std::get_if<UniformGrid>(&field_next.grid);
    if (grid == nullptr) throw invalid_parameter("step_back: expected a uniform-grid field");
    const double dt = problem.horizon_T / config.n_steps;
    const double t_n = n * dt;
    const double t_next = (n + 1) * dt;

    const auto start = std::chrono::steady_clock::now();
    std::vector<double> values(static_cast<std::size_t>(grid->count));
    std::vector<int> iterations(static_cast<std::size_t>(grid->count), 0);
    auto eval_next = [&field_next](double x) { return interpolate(field_next, x); };
    parallel_for(grid->count, detail::resolve_threads(config), [&](int i) {
        const auto node = detail::update_node(grid->point(i), t_n, t_next, dt, problem, config,
                                              op_value, op_forcing, eval_next);
        values[static_cast<std::size_t>(i)] = node.value;
        iterations[static_cast<std::size_t>(i)] = node.iterations;
    });

    SolutionField field;
    field.grid = *grid;
    field.values = std::move(values);
    field.order_p = config.order_p;
    field.exterior = detail::make_exterior(problem, config, t_n);

    if (level_out != nullptr) {
        level_out->level = n;
        level_out->t = t_n;
        level_out->node_count = grid->count;
        level_out->max_fixed_point_iterations = 0;
        for (int it : iterations)
            level_out->max_fixed_point_iterations = std::max(level_out->max_fixed_point_iterations, it);
        level_out->wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    return field;
}

/// Convenience overload building the expectation operators from the config.
inline SolutionField step_back(const SolutionField& field_next, int n, const Problem& problem,
                               const SolverConfig& config) {
    const auto* grid = std::get_if<UniformGrid>(&field_next.grid);
    if (grid == nullptr) throw invalid_parameter("step_back: expected a uniform-grid field");
    const double lambda_dt = problem.kernel.lambda * problem.horizon_T / config.n_steps;
    const WeightedQuadrature rule = detail::make_rule(problem, config, grid->dx);
    const ExpectationOperator op_value(rule, lambda_dt, config.value_jumps,
                                       config.collapse_symmetric, config.weighting);
    const ExpectationOperator op_forcing(rule, lambda_dt, config.forcing_jumps,
                                         config.collapse_symmetric, config.weighting);
    return step_back(field_next, n, problem, config, op_value, op_forcing);
}

namespace detail {

inline void check_preconditions(const Problem& problem, const SolverConfig& config) {
    if (config.n_steps < 1) throw configuration_error("solve: need at least one time step");
    if (config.theta < 0.0 || config.theta > 1.0)
        throw configuration_error("solve: theta must lie in [0,1]");
    const double dt = problem.horizon_T / config.n_steps;
    if (config.theta > 0.0 && config.theta * dt * problem.lipschitz_L >= 1.0)
        throw configuration_error("solve: theta*dt*L >= 1 breaks the implicit contraction");
}

inline SolveResult solve_uniform(const Problem& problem, const SolverConfig& config) {
    const UniformGrid grid = UniformGrid::from_count(config.x_min, config.x_max, config.n_x);
    const double dt = problem.horizon_T / config.n_steps;
    const double lambda_dt = problem.kernel.lambda * dt;
    const WeightedQuadrature rule = make_rule(problem, config, grid.dx);
    const ExpectationOperator op_value(rule, lambda_dt, config.value_jumps,
                                       config.collapse_symmetric, config.weighting);
    const ExpectationOperator op_forcing(rule, lambda_dt, config.forcing_jumps,
                                         config.collapse_symmetric, config.weighting);

    const auto start = std::chrono::steady_clock::now();
    SolveResult result;
    result.dt = dt;
    result.quadrature_nodes = static_cast<int>(rule.nodes.size());
    result.family = rule.family;
    result.levels.reserve(static_cast<std::size_t>(config.n_steps));

    SolutionField field = terminal_field(problem, grid, config);
    for (int n = config.n_steps - 1; n >= 0; --n) {
        LevelDiagnostics diag;
        field = step_back(field, n, problem, config, op_value, op_forcing, &diag);
        emit_diagnostics(config, diag);
        result.levels.push_back(diag);
    }
    result.field = std::move(field);
    result.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
}

inline SolveResult solve_adaptive(const Problem& problem, const SolverConfig& config) {
    const double dt = problem.horizon_T / config.n_steps;
    const double lambda_dt = problem.kernel.lambda * dt;
    const double width = config.x_max - config.x_min;
    const double spacing = config.trapezoid_spacing > 0.0
                               ? config.trapezoid_spacing
                               : width * std::ldexp(1.0, -config.adaptive_max_level);
    const WeightedQuadrature rule = make_rule(problem, config, spacing);
    const ExpectationOperator op_value(rule, lambda_dt, config.value_jumps,
                                       config.collapse_symmetric, config.weighting);
    const ExpectationOperator op_forcing(rule, lambda_dt, config.forcing_jumps,
                                         config.collapse_symmetric, config.weighting);

    AdaptiveGrid params;
    params.x_min = config.x_min;
    params.x_max = config.x_max;
    params.tolerance = config.adaptive_tolerance;
    params.max_level = config.adaptive_max_level;

    const auto start = std::chrono::steady_clock::now();
    SolveResult result;
    result.dt = dt;
    result.quadrature_nodes = static_cast<int>(rule.nodes.size());
    result.family = rule.family;
    result.levels.reserve(static_cast<std::size_t>(config.n_steps));

    // Terminal level: refine against phi itself.
    SolutionField field;
    {
        AdaptiveRefinement ref = refine(params, problem.terminal);
        field.grid = std::move(ref.grid);
        field.values = std::move(ref.values);
        field.order_p = 1;
        field.exterior = make_exterior(problem, config, problem.horizon_T);
    }

    for (int n = config.n_steps - 1; n >= 0; --n) {
        const double t_n = n * dt;
        const double t_next = (n + 1) * dt;
        const auto level_start = std::chrono::steady_clock::now();
        int max_iters = 0;
        auto eval_next = [&field](double x) { return interpolate(field, x); };
        auto sampler = [&](double x) {
            const auto node = update_node(x, t_n, t_next, dt, problem, config, op_value,
                                          op_forcing, eval_next);
            max_iters = std::max(max_iters, node.iterations);
            return node.value;
        };
        AdaptiveRefinement ref = refine(params, sampler);

        SolutionField next;
        next.grid = std::move(ref.grid);
        next.values = std::move(ref.values);
        next.order_p = 1;
        next.exterior = make_exterior(problem, config, t_n);
        field = std::move(next);

        LevelDiagnostics diag;
        diag.level = n;
        diag.t = t_n;
        diag.node_count = static_cast<int>(field.values.size());
        diag.max_fixed_point_iterations = max_iters;
        diag.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                 level_start)
                           .count();
        emit_diagnostics(config, diag);
        result.levels.push_back(diag);
    }
    result.field = std::move(field);
    result.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace detail

/// Backward march of the fully-discrete theta-scheme from the terminal
/// condition down to time zero; the returned field approximates u(T, .).
inline SolveResult solve(const Problem& problem, const SolverConfig& config) {
    detail::check_preconditions(problem, config);
    return config.adaptive ? detail::solve_adaptive(problem, config)
                           : detail::solve_uniform(problem, config);
}

} // namespace nldiff
