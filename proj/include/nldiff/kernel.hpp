#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "nldiff/common.hpp"

namespace nldiff {

enum class KernelSymmetry { symmetric, nonsymmetric };
enum class KernelSingularity { none, inverse_sqrt_at_zero };

/// Closed-form kernel families; `custom` disables family-specific dispatch
/// (inverse-CDF sampling, singular quadrature splitting).
enum class KernelKind { symmetric_constant, singular_sqrt, nonsymmetric_constant, custom };

/// An integrable jump kernel gamma and the coefficients of the jump process it
/// induces: intensity lambda = integral of gamma, jump density rho = gamma/lambda,
/// and the compensator rate drift_b = lambda * E[e]. The drift never enters the
/// deterministic march (it cancels against the compensator); it is kept for the
/// Monte Carlo oracle and for reporting.
struct KernelSpec {
    std::function<double(double)> gamma;
    std::function<double(double)> rho;
    double e_min = 0.0;
    double e_max = 0.0;
    double lambda = 0.0;
    double drift_b = 0.0;
    KernelSymmetry symmetry = KernelSymmetry::symmetric;
    KernelSingularity singularity = KernelSingularity::none;
    KernelKind kind = KernelKind::custom;
    double delta = 0.0; // horizon parameter of the built-in families
};

/// gamma = 1/delta^3 on [-delta, delta]: lambda = 2/delta^2, uniform rho, zero drift.
inline KernelSpec symmetric_constant_kernel(double delta) {
    if (!(delta > 0.0)) throw invalid_parameter("symmetric_constant_kernel: delta must be positive");
    KernelSpec k;
    k.delta = delta;
    k.e_min = -delta;
    k.e_max = delta;
    k.lambda = 2.0 / (delta * delta);
    k.drift_b = 0.0;
    k.symmetry = KernelSymmetry::symmetric;
    k.singularity = KernelSingularity::none;
    k.kind = KernelKind::symmetric_constant;
    const double g = 1.0 / (delta * delta * delta);
    k.gamma = [delta, g](double e) { return (e >= -delta && e <= delta) ? g : 0.0; };
    const double r = 1.0 / (2.0 * delta);
    k.rho = [delta, r](double e) { return (e >= -delta && e <= delta) ? r : 0.0; };
    return k;
}

/// gamma = 1/(delta^2 sqrt(delta |e|)) on [-delta, delta]: integrable with an
/// inverse-sqrt singularity at 0; lambda = 4/delta^2, zero drift.
inline KernelSpec singular_sqrt_kernel(double delta) {
    if (!(delta > 0.0)) throw invalid_parameter("singular_sqrt_kernel: delta must be positive");
    KernelSpec k;
    k.delta = delta;
    k.e_min = -delta;
    k.e_max = delta;
    k.lambda = 4.0 / (delta * delta);
    k.drift_b = 0.0;
    k.symmetry = KernelSymmetry::symmetric;
    k.singularity = KernelSingularity::inverse_sqrt_at_zero;
    k.kind = KernelKind::singular_sqrt;
    k.gamma = [delta](double e) {
        if (e < -delta || e > delta || e == 0.0) return e == 0.0 ? HUGE_VAL : 0.0;
        return 1.0 / (delta * delta * std::sqrt(delta * std::abs(e)));
    };
    k.rho = [delta](double e) {
        if (e < -delta || e > delta || e == 0.0) return e == 0.0 ? HUGE_VAL : 0.0;
        return 1.0 / (4.0 * std::sqrt(delta * std::abs(e)));
    };
    return k;
}

/// gamma = 1 on [-delta, 2delta]: lambda = 3delta, mean jump delta/2, so the
/// compensator rate is drift_b = 3delta^2/2.
inline KernelSpec nonsymmetric_constant_kernel(double delta) {
    if (!(delta > 0.0)) throw invalid_parameter("nonsymmetric_constant_kernel: delta must be positive");
    KernelSpec k;
    k.delta = delta;
    k.e_min = -delta;
    k.e_max = 2.0 * delta;
    k.lambda = 3.0 * delta;
    k.drift_b = 1.5 * delta * delta;
    k.symmetry = KernelSymmetry::nonsymmetric;
    k.singularity = KernelSingularity::none;
    k.kind = KernelKind::nonsymmetric_constant;
    k.gamma = [delta](double e) { return (e >= -delta && e <= 2.0 * delta) ? 1.0 : 0.0; };
    const double r = 1.0 / (3.0 * delta);
    k.rho = [delta, r](double e) { return (e >= -delta && e <= 2.0 * delta) ? r : 0.0; };
    return k;
}

} // namespace nldiff
