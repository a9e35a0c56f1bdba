#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "nldiff/common.hpp"
#include "nldiff/grid.hpp"

namespace nldiff {

struct ErrorNorms {
    double linf = 0.0;
    double l2 = 0.0;
};

/// Discrete error norms of a field against a reference over a window. Each
/// element between consecutive grid points is sampled at `probes_per_element`
/// subdivisions (so the interpolant itself is measured, not just its nodal
/// values); L2 is the composite trapezoid of the squared difference over the
/// probe grid. Elements meeting the exclusion interval are dropped, which is
/// how the discontinuity-excluded variant is formed.
inline ErrorNorms error_norms(const SolutionField& approx, const std::function<double(double)>& exact,
                              double window_lo, double window_hi,
                              std::optional<std::pair<double, double>> exclusion = std::nullopt,
                              int probes_per_element = 16) {
    if (!(window_lo < window_hi)) throw invalid_parameter("error_norms: degenerate window");
    if (window_lo < approx.x_min() - 1e-12 || window_hi > approx.x_max() + 1e-12)
        throw invalid_parameter("error_norms: window outside grid coverage");
    if (probes_per_element < 1) throw invalid_parameter("error_norms: need at least one probe per element");

    std::vector<double> breaks;
    breaks.push_back(window_lo);
    for (double x : approx.node_positions())
        if (x > window_lo && x < window_hi) breaks.push_back(x);
    breaks.push_back(window_hi);

    bool any = false;
    double linf = 0.0;
    KahanSum l2sq;
    for (std::size_t e = 0; e + 1 < breaks.size(); ++e) {
        const double lo = breaks[e];
        const double hi = breaks[e + 1];
        if (!(hi > lo)) continue;
        if (exclusion && hi >= exclusion->first && lo <= exclusion->second) continue;
        any = true;
        const double h = (hi - lo) / probes_per_element;
        double prev_sq = 0.0;
        for (int k = 0; k <= probes_per_element; ++k) {
            const double x = (k == probes_per_element) ? hi : lo + k * h;
            const double diff = interpolate(approx, x) - exact(x);
            linf = std::max(linf, std::abs(diff));
            const double sq = diff * diff;
            if (k > 0) l2sq.add(0.5 * h * (prev_sq + sq));
            prev_sq = sq;
        }
    }
    if (!any) throw invalid_parameter("error_norms: empty evaluation set");
    return ErrorNorms{linf, std::sqrt(l2sq.value())};
}

/// Least-squares slope of log(error) against log(step); positive when the
/// error decays as the step shrinks.
inline double fit_rate(std::span<const double> steps, std::span<const double> errors) {
    if (steps.size() != errors.size() || steps.size() < 3)
        throw invalid_parameter("fit_rate: need at least three (step, error) pairs");
    const std::size_t n = steps.size();
    double mean_s = 0.0, mean_e = 0.0;
    std::vector<double> ls(n), le(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(steps[i] > 0.0) || !(errors[i] > 0.0))
            throw invalid_parameter("fit_rate: steps and errors must be positive");
        ls[i] = std::log(steps[i]);
        le[i] = std::log(errors[i]);
        mean_s += ls[i];
        mean_e += le[i];
    }
    mean_s /= static_cast<double>(n);
    mean_e /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (ls[i] - mean_s) * (le[i] - mean_e);
        den += (ls[i] - mean_s) * (ls[i] - mean_s);
    }
    return num / den;
}

/// Pairwise rate between consecutive sweep points (NaN where undefined).
inline double local_rate(double step_prev, double err_prev, double step, double err) {
    if (!(step_prev > 0.0) || !(step > 0.0) || !(err_prev > 0.0) || !(err > 0.0) || step == step_prev)
        return std::numeric_limits<double>::quiet_NaN();
    return std::log(err_prev / err) / std::log(step_prev / step);
}

} // namespace nldiff
