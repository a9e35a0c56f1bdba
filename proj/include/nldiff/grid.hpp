#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <variant>
#include <vector>

#include "nldiff/common.hpp"

namespace nldiff {

struct UniformGrid {
    double x_min = 0.0;
    double x_max = 1.0;
    double dx = 1.0;
    double inv_dx = 1.0;
    int count = 2;

    static UniformGrid from_count(double x_min, double x_max, int count) {
        if (count < 2) throw invalid_parameter("UniformGrid: need at least two points");
        if (!(x_min < x_max)) throw invalid_parameter("UniformGrid: degenerate interval");
        UniformGrid g;
        g.x_min = x_min;
        g.x_max = x_max;
        g.count = count;
        g.dx = (x_max - x_min) / (count - 1);
        g.inv_dx = 1.0 / g.dx;
        return g;
    }

    static UniformGrid from_spacing(double x_min, double x_max, double dx) {
        if (!(dx > 0.0)) throw invalid_parameter("UniformGrid: spacing must be positive");
        const int count = static_cast<int>(std::lround((x_max - x_min) / dx)) + 1;
        UniformGrid g = from_count(x_min, x_max, count);
        if (!nearly_equal(g.dx, dx, 1e-12))
            throw invalid_parameter("UniformGrid: spacing does not tile the interval");
        return g;
    }

    double point(int i) const { return i == count - 1 ? x_max : x_min + i * dx; }
};

/// How a field is evaluated outside its stored grid. Quadrature displacements
/// routinely leave the reported window, so this is part of a field's contract.
enum class ExteriorMode { exact_extension, clamp_to_boundary, linear_extrapolation };

struct ExteriorPolicy {
    ExteriorMode mode = ExteriorMode::clamp_to_boundary;
    std::function<double(double)> extension; // defined on all of R; time already bound

    static ExteriorPolicy exact(std::function<double(double)> fn) {
        return ExteriorPolicy{ExteriorMode::exact_extension, std::move(fn)};
    }
    static ExteriorPolicy clamp() { return ExteriorPolicy{ExteriorMode::clamp_to_boundary, {}}; }
    static ExteriorPolicy linear() { return ExteriorPolicy{ExteriorMode::linear_extrapolation, {}}; }
};

inline const char* to_string(ExteriorMode m) {
    switch (m) {
        case ExteriorMode::exact_extension: return "exact_extension";
        case ExteriorMode::clamp_to_boundary: return "clamp_to_boundary";
        case ExteriorMode::linear_extrapolation: return "linear_extrapolation";
    }
    return "?";
}

/// First index of the contiguous (p+1)-point stencil whose points minimize the
/// maximum distance to x; ties resolved toward smaller indices, window clamped
/// to stay inside the grid.
inline int stencil_first(const UniformGrid& grid, double x, int p) {
    if (p + 1 > grid.count) throw invalid_parameter("stencil_first: order exceeds grid size");
    const double u = (x - grid.x_min) * grid.inv_dx;
    int s = static_cast<int>(
        std::floor(std::clamp(u - 0.5 * p, -1.0, static_cast<double>(grid.count))));
    const double d_here = std::max(u - s, s + p - u);
    const double d_next = std::max(u - (s + 1), s + 1 + p - u);
    if (d_next < d_here) ++s;
    return std::clamp(s, 0, grid.count - 1 - p);
}

inline std::vector<int> nearest_stencil(const UniformGrid& grid, double x, int p) {
    const int first = stencil_first(grid, x, p);
    std::vector<int> idx(static_cast<std::size_t>(p) + 1);
    for (int j = 0; j <= p; ++j) idx[static_cast<std::size_t>(j)] = first + j;
    return idx;
}

/// Dyadic point hierarchy on [x_min, x_max] produced by surplus-driven cell
/// bisection: a cell's midpoint carries the surplus f(mid) - (f(a)+f(b))/2 and
/// its children are created only while that surplus exceeds the tolerance
/// (levels <= 2 are always present). Points are stored sorted.
struct AdaptiveGrid {
    double x_min = 0.0;
    double x_max = 1.0;
    double tolerance = 1e-3;
    int max_level = 10;
    std::vector<double> points;
    std::vector<int> levels;
    std::vector<double> surpluses; // 0 for the level-0 endpoints

    double h_min() const {
        double h = x_max - x_min;
        for (std::size_t i = 1; i < points.size(); ++i) h = std::min(h, points[i] - points[i - 1]);
        return h;
    }
};

/// Result of refining against a sampler: the grid plus the sampled values at
/// its points (same order).
struct AdaptiveRefinement {
    AdaptiveGrid grid;
    std::vector<double> values;
};

template <typename F>
AdaptiveRefinement refine(const AdaptiveGrid& base, F&& sampler) {
    if (!(base.tolerance > 0.0)) throw invalid_parameter("refine: tolerance must be positive");
    if (base.max_level < 1) throw invalid_parameter("refine: max_level must be at least 1");
    if (!(base.x_min < base.x_max)) throw invalid_parameter("refine: degenerate interval");

    struct Entry {
        double value;
        int level;
        double surplus;
    };
    std::map<double, Entry> table;
    table.emplace(base.x_min, Entry{sampler(base.x_min), 0, 0.0});
    table.emplace(base.x_max, Entry{sampler(base.x_max), 0, 0.0});

    struct Cell {
        double a, b;
        int mid_level;
    };
    std::deque<Cell> queue;
    queue.push_back({base.x_min, base.x_max, 1});

    while (!queue.empty()) {
        const Cell cell = queue.front();
        queue.pop_front();
        const double mid = 0.5 * (cell.a + cell.b);
        const double fm = sampler(mid);
        const double fa = table.at(cell.a).value;
        const double fb = table.at(cell.b).value;
        const double surplus = fm - 0.5 * (fa + fb);
        table.emplace(mid, Entry{fm, cell.mid_level, surplus});
        const int child_level = cell.mid_level + 1;
        if (child_level <= base.max_level &&
            (child_level <= 2 || std::abs(surplus) > base.tolerance)) {
            queue.push_back({cell.a, mid, child_level});
            queue.push_back({mid, cell.b, child_level});
        }
    }

    AdaptiveRefinement out;
    out.grid.x_min = base.x_min;
    out.grid.x_max = base.x_max;
    out.grid.tolerance = base.tolerance;
    out.grid.max_level = base.max_level;
    out.grid.points.reserve(table.size());
    out.grid.levels.reserve(table.size());
    out.grid.surpluses.reserve(table.size());
    out.values.reserve(table.size());
    for (const auto& [x, e] : table) {
        out.grid.points.push_back(x);
        out.grid.levels.push_back(e.level);
        out.grid.surpluses.push_back(e.surplus);
        out.values.push_back(e.value);
    }
    return out;
}

/// Grid-point values of the discrete solution at one time level. Uniform grids
/// interpolate with degree-p stencils; adaptive grids are piecewise linear.
struct SolutionField {
    std::variant<UniformGrid, AdaptiveGrid> grid;
    std::vector<double> values;
    int order_p = 1;
    ExteriorPolicy exterior;

    double x_min() const {
        return std::visit([](const auto& g) { return g.x_min; }, grid);
    }
    double x_max() const {
        return std::visit([](const auto& g) { return g.x_max; }, grid);
    }
    std::vector<double> node_positions() const {
        if (const auto* u = std::get_if<UniformGrid>(&grid)) {
            std::vector<double> xs(static_cast<std::size_t>(u->count));
            for (int i = 0; i < u->count; ++i) xs[static_cast<std::size_t>(i)] = u->point(i);
            return xs;
        }
        return std::get<AdaptiveGrid>(grid).points;
    }
    double operator()(double x) const;
};

namespace detail {

inline double lagrange_eval(const UniformGrid& grid, std::span<const double> values, int first,
                            int p, double x) {
    if (p == 1) {
        const double t = (x - grid.point(first)) * grid.inv_dx;
        return (1.0 - t) * values[static_cast<std::size_t>(first)] +
               t * values[static_cast<std::size_t>(first + 1)];
    }
    double acc = 0.0;
    for (int j = 0; j <= p; ++j) {
        const double xj = grid.point(first + j);
        double basis = 1.0;
        for (int k = 0; k <= p; ++k) {
            if (k == j) continue;
            const double xk = grid.point(first + k);
            basis *= (x - xk) / (xj - xk);
        }
        acc += basis * values[static_cast<std::size_t>(first + j)];
    }
    return acc;
}

inline double piecewise_linear_eval(std::span<const double> xs, std::span<const double> vs, double x) {
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    if (hi == 0) hi = 1;
    if (hi >= xs.size()) hi = xs.size() - 1;
    const std::size_t lo = hi - 1;
    const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return (1.0 - t) * vs[lo] + t * vs[hi];
}

} // namespace detail

/// Total function: interior points get the local Lagrange interpolant, exterior
/// points are resolved by the field's ExteriorPolicy.
inline double interpolate(const SolutionField& field, double x) {
    const double lo = field.x_min();
    const double hi = field.x_max();
    if (x < lo || x > hi) {
        switch (field.exterior.mode) {
            case ExteriorMode::exact_extension:
                if (!field.exterior.extension)
                    throw configuration_error("interpolate: exact_extension policy without callback");
                return field.exterior.extension(x);
            case ExteriorMode::clamp_to_boundary:
                return x < lo ? field.values.front() : field.values.back();
            case ExteriorMode::linear_extrapolation: {
                // Continue the boundary element's line.
                const auto xs = field.node_positions();
                const auto& vs = field.values;
                const std::size_t n = xs.size();
                if (x < lo) {
                    const double slope = (vs[1] - vs[0]) / (xs[1] - xs[0]);
                    return vs[0] + slope * (x - xs[0]);
                }
                const double slope = (vs[n - 1] - vs[n - 2]) / (xs[n - 1] - xs[n - 2]);
                return vs[n - 1] + slope * (x - xs[n - 1]);
            }
        }
    }
    if (const auto* u = std::get_if<UniformGrid>(&field.grid)) {
        const int p = std::min(field.order_p, u->count - 1);
        const int first = stencil_first(*u, x, p);
        return detail::lagrange_eval(*u, field.values, first, p, x);
    }
    const auto& a = std::get<AdaptiveGrid>(field.grid);
    return detail::piecewise_linear_eval(a.points, field.values, x);
}

inline double SolutionField::operator()(double x) const { return interpolate(*this, x); }

/// Field sampled from a function at the grid points.
template <typename F>
SolutionField sample_field(const UniformGrid& grid, F&& fn, int order_p, ExteriorPolicy exterior) {
    SolutionField field;
    field.grid = grid;
    field.order_p = order_p;
    field.exterior = std::move(exterior);
    field.values.resize(static_cast<std::size_t>(grid.count));
    for (int i = 0; i < grid.count; ++i)
        field.values[static_cast<std::size_t>(i)] = fn(grid.point(i));
    return field;
}

} // namespace nldiff
