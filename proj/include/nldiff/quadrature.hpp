#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "nldiff/common.hpp"
#include "nldiff/kernel.hpp"

namespace nldiff {

/// Plain 1D rule: sum_j weights[j] * f(nodes[j]) approximates an integral.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

constexpr double kNewtonTol = 1e-15;
constexpr int kNewtonMaxIter = 100;

/// Legendre P_n and its derivative at z via the three-term recurrence.
inline void legendre_eval(int n, double z, double& pn, double& dpn) {
    double p_prev = 0.0;
    double p = 1.0;
    for (int k = 1; k <= n; ++k) {
        const double p_next = ((2 * k - 1) * z * p - (k - 1) * p_prev) / k;
        p_prev = p;
        p = p_next;
    }
    pn = p;
    dpn = n * (z * p - p_prev) / (z * z - 1.0);
}

} // namespace detail

/// Gauss-Legendre rule on [a,b]; exact for polynomials of degree <= 2n-1.
inline QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw invalid_parameter("gauss_legendre: need at least one node");
    if (!(a < b)) throw invalid_parameter("gauss_legendre: degenerate interval");

    QuadratureRule rule;
    rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
    rule.weights.assign(static_cast<std::size_t>(n), 0.0);

    // Roots come in +/- pairs; solve the upper half and mirror.
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pn = 0.0, dpn = 1.0;
        for (int it = 0; it < detail::kNewtonMaxIter; ++it) {
            detail::legendre_eval(n, z, pn, dpn);
            const double dz = pn / dpn;
            z -= dz;
            if (std::abs(dz) <= detail::kNewtonTol) break;
        }
        detail::legendre_eval(n, z, pn, dpn);
        const double w = 2.0 / ((1.0 - z * z) * dpn * dpn);
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
        rule.nodes[static_cast<std::size_t>(i)] = -z;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
        rule.weights[static_cast<std::size_t>(i)] = w;
    }

    const double mid = 0.5 * (a + b);
    const double halfwidth = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        rule.nodes[static_cast<std::size_t>(i)] = mid + halfwidth * rule.nodes[static_cast<std::size_t>(i)];
        rule.weights[static_cast<std::size_t>(i)] *= halfwidth;
    }
    return rule;
}

/// Gauss-Jacobi rule for the weight x^{-1/2} on [0,b]:
///   sum_j w_j psi(a_j) = integral_0^b psi(x) x^{-1/2} dx
/// exact for psi of degree <= 2n-1. Built from the Jacobi (alpha,beta)=(0,-1/2)
/// three-term recurrence on [-1,1] with Newton-polished roots, then mapped.
inline QuadratureRule gauss_jacobi_sqrt(int n, double b) {
    if (n < 1) throw invalid_parameter("gauss_jacobi_sqrt: need at least one node");
    if (!(b > 0.0)) throw invalid_parameter("gauss_jacobi_sqrt: interval length must be positive");

    constexpr double alpha = 0.0;
    constexpr double beta = -0.5;
    const double mu0 = 2.0 * std::sqrt(2.0); // integral of (1+x)^{-1/2} over [-1,1]

    // Monic recurrence coefficients a_k, b_k for the Jacobi weight.
    std::vector<double> ak(static_cast<std::size_t>(n), 0.0);
    std::vector<double> bk(static_cast<std::size_t>(n), 0.0);
    ak[0] = (beta - alpha) / (alpha + beta + 2.0);
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + alpha + beta;
        ak[static_cast<std::size_t>(k)] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
        bk[static_cast<std::size_t>(k)] = 4.0 * k * (k + alpha) * (k + beta) * (k + alpha + beta) /
                                          (s * s * (s + 1.0) * (s - 1.0));
    }

    auto eval = [&](double x, double& pn, double& dpn, double& pn_prev) {
        double p_prev = 0.0, p = 1.0;
        double d_prev = 0.0, d = 0.0;
        for (int k = 0; k < n; ++k) {
            const std::size_t ku = static_cast<std::size_t>(k);
            const double p_next = (x - ak[ku]) * p - (k > 0 ? bk[ku] * p_prev : 0.0);
            const double d_next = p + (x - ak[ku]) * d - (k > 0 ? bk[ku] * d_prev : 0.0);
            p_prev = p; p = p_next;
            d_prev = d; d = d_next;
        }
        pn = p;
        dpn = d;
        pn_prev = p_prev;
    };

    // h_{n-1} = mu0 * prod b_k is the squared norm of the (n-1)-th monic polynomial.
    double h_nm1 = mu0;
    for (int k = 1; k < n; ++k) h_nm1 *= bk[static_cast<std::size_t>(k)];

    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        double x = std::cos(std::numbers::pi * (0.5 * alpha + i - 0.25) / (0.5 * (1.0 + alpha + beta) + n));
        double pn = 0.0, dpn = 1.0, pnm1 = 0.0;
        for (int it = 0; it < detail::kNewtonMaxIter; ++it) {
            eval(x, pn, dpn, pnm1);
            const double dx = pn / dpn;
            x -= dx;
            if (std::abs(dx) <= detail::kNewtonTol) break;
        }
        eval(x, pn, dpn, pnm1);
        rule.nodes[static_cast<std::size_t>(i - 1)] = x;
        rule.weights[static_cast<std::size_t>(i - 1)] = h_nm1 / (pnm1 * dpn);
    }

    // Map [-1,1] with weight (1+x)^{-1/2} onto [0,b] with weight x^{-1/2}.
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return rule.nodes[i] < rule.nodes[j]; });
    QuadratureRule mapped;
    mapped.nodes.reserve(static_cast<std::size_t>(n));
    mapped.weights.reserve(static_cast<std::size_t>(n));
    const double scale = std::sqrt(0.5 * b);
    for (std::size_t idx : order) {
        mapped.nodes.push_back(0.5 * b * (rule.nodes[idx] + 1.0));
        mapped.weights.push_back(scale * rule.weights[idx]);
    }
    for (std::size_t i = 0; i < mapped.nodes.size(); ++i) {
        if (!(mapped.weights[i] > 0.0) || !std::isfinite(mapped.nodes[i]))
            throw numerical_failure("gauss_jacobi_sqrt: node/weight computation failed");
        if (i > 0 && !(mapped.nodes[i] > mapped.nodes[i - 1]))
            throw numerical_failure("gauss_jacobi_sqrt: nodes not strictly increasing");
    }
    return mapped;
}

/// Composite trapezoid weights on a given strictly increasing node set.
inline QuadratureRule composite_trapezoid(std::span<const double> nodes) {
    if (nodes.size() < 2) throw invalid_parameter("composite_trapezoid: need at least two nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1]))
            throw invalid_parameter("composite_trapezoid: nodes must be strictly increasing");

    QuadratureRule rule;
    rule.nodes.assign(nodes.begin(), nodes.end());
    rule.weights.assign(nodes.size(), 0.0);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double h = 0.5 * (nodes[i + 1] - nodes[i]);
        rule.weights[i] += h;
        rule.weights[i + 1] += h;
    }
    return rule;
}

enum class QuadratureFamily { gauss_legendre, gauss_jacobi_sqrt, trapezoid };

inline const char* to_string(QuadratureFamily f) {
    switch (f) {
        case QuadratureFamily::gauss_legendre: return "gauss_legendre";
        case QuadratureFamily::gauss_jacobi_sqrt: return "gauss_jacobi_sqrt";
        case QuadratureFamily::trapezoid: return "trapezoid";
    }
    return "?";
}

/// Density-weighted rule: sum_j weights[j] * psi(nodes[j]) approximates
/// integral psi(e) rho(e) de over the jump support. Weights carry the
/// probability mass, so they sum to ~1 when the 1D rule is exact for rho.
struct WeightedQuadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
    int points_per_rule = 0; // Q of the underlying 1D rule
    QuadratureFamily family = QuadratureFamily::gauss_legendre;
};

/// Builds the density-weighted rule for a kernel with a Gaussian family:
/// Gauss-Jacobi per half-support for the inverse-sqrt singularity (2Q nodes
/// total), Gauss-Legendre with rho folded into the weights otherwise.
inline WeightedQuadrature density_weighted(const KernelSpec& kernel, int q) {
    if (q < 1) throw invalid_parameter("density_weighted: need at least one node");

    WeightedQuadrature out;
    out.points_per_rule = q;
    if (kernel.singularity == KernelSingularity::inverse_sqrt_at_zero) {
        if (!(kernel.e_min < 0.0 && kernel.e_max > 0.0 && std::abs(kernel.e_min + kernel.e_max) < 1e-14))
            throw invalid_parameter("density_weighted: singular kernel must have symmetric support about 0");
        const double delta = kernel.e_max;
        const QuadratureRule half = gauss_jacobi_sqrt(q, delta);
        // rho(e) = (1/(4 sqrt(delta))) |e|^{-1/2}; the |e|^{-1/2} part lives in the rule.
        const double fold = 1.0 / (4.0 * std::sqrt(delta));
        out.family = QuadratureFamily::gauss_jacobi_sqrt;
        out.nodes.reserve(2 * half.nodes.size());
        out.weights.reserve(2 * half.nodes.size());
        for (std::size_t i = half.nodes.size(); i-- > 0;) {
            out.nodes.push_back(-half.nodes[i]);
            out.weights.push_back(fold * half.weights[i]);
        }
        for (std::size_t i = 0; i < half.nodes.size(); ++i) {
            out.nodes.push_back(half.nodes[i]);
            out.weights.push_back(fold * half.weights[i]);
        }
    } else {
        const QuadratureRule rule = gauss_legendre(q, kernel.e_min, kernel.e_max);
        out.family = QuadratureFamily::gauss_legendre;
        out.nodes = rule.nodes;
        out.weights.resize(rule.nodes.size());
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            out.weights[i] = rule.weights[i] * kernel.rho(rule.nodes[i]);
    }
    return out;
}

/// Density-weighted composite trapezoid rule with uniform nodes spanning the
/// support at spacing <= target_spacing. When the support width is an integer
/// multiple of target_spacing the nodes land on exact multiples of it, so a
/// grid-aligned spacing makes the rule exact for piecewise-linear interpolants.
inline WeightedQuadrature density_weighted_trapezoid(const KernelSpec& kernel, double target_spacing) {
    if (!(target_spacing > 0.0)) throw invalid_parameter("density_weighted_trapezoid: spacing must be positive");
    if (kernel.singularity != KernelSingularity::none)
        throw invalid_parameter("density_weighted_trapezoid: not defined for singular densities");

    const double span = kernel.e_max - kernel.e_min;
    const int cells = std::max(1, static_cast<int>(std::ceil(span / target_spacing - 1e-12)));
    std::vector<double> nodes(static_cast<std::size_t>(cells) + 1);
    for (int i = 0; i <= cells; ++i)
        nodes[static_cast<std::size_t>(i)] =
            (i == cells) ? kernel.e_max : kernel.e_min + span * i / cells;

    const QuadratureRule rule = composite_trapezoid(nodes);
    WeightedQuadrature out;
    out.points_per_rule = cells + 1;
    out.family = QuadratureFamily::trapezoid;
    out.nodes = rule.nodes;
    out.weights.resize(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        out.weights[i] = rule.weights[i] * kernel.rho(rule.nodes[i]);
    return out;
}

} // namespace nldiff
