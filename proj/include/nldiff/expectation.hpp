#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "nldiff/common.hpp"
#include "nldiff/quadrature.hpp"

namespace nldiff {

/// How the jump-count expansion is weighted after truncation at M jumps.
/// - poisson_truncated: the literal weights pi_m = e^{-lambda dt}(lambda dt)^m/m!.
///   The retained mass is strictly below 1 (the tail, bounded by
///   (lambda dt)^{M+1}/(M+1)!, is simply dropped).
/// - semigroup_taylor: the degree-M Taylor truncation of the transition
///   semigroup e^{lambda dt (P - 1)}, i.e. w_m = (lambda dt)^m/m! *
///   sum_{j<=M-m} (-lambda dt)^j/j!. The weights sum to exactly 1, so constant
///   fields pass through unchanged and the defect carries the M+1-st power of
///   the centered jump operator (P - 1) rather than of the bare mass.
enum class JumpWeighting { poisson_truncated, semigroup_taylor };

/// Truncated compound-Poisson conditional expectation over one time step:
/// the jump-count expansion keeps outcomes with at most `max_jumps` jumps and
/// approximates each m-fold jump integral by the m-fold tensor product of the
/// density-weighted rule.
struct ExpectationOperator {
    WeightedQuadrature rule;
    double lambda_dt = 0.0;
    int max_jumps = 0;
    std::vector<double> poisson_weights; // weight of the m-jump term, m = 0..M
    JumpWeighting weighting = JumpWeighting::poisson_truncated;
    bool collapse_symmetric = false;     // optional exchangeability optimization

    ExpectationOperator() = default;

    ExpectationOperator(WeightedQuadrature quadrature, double lambda_dt_, int max_jumps_,
                        bool collapse = false,
                        JumpWeighting weighting_ = JumpWeighting::poisson_truncated)
        : rule(std::move(quadrature)), lambda_dt(lambda_dt_), max_jumps(max_jumps_),
          weighting(weighting_), collapse_symmetric(collapse) {
        if (lambda_dt < 0.0) throw invalid_parameter("ExpectationOperator: lambda*dt must be nonnegative");
        if (max_jumps < 0) throw invalid_parameter("ExpectationOperator: jump count must be nonnegative");
        // Tensor enumeration is Q^M tuples per evaluation point; refuse configs
        // that would silently take forever.
        const double q = static_cast<double>(rule.nodes.size());
        if (max_jumps >= 1 && std::pow(q, max_jumps) > 1e7)
            throw invalid_parameter("ExpectationOperator: Q^M exceeds 1e7 tuples per node");
        poisson_weights.resize(static_cast<std::size_t>(max_jumps) + 1);
        if (weighting == JumpWeighting::poisson_truncated) {
            double w = std::exp(-lambda_dt);
            poisson_weights[0] = w;
            for (int m = 1; m <= max_jumps; ++m) {
                w *= lambda_dt / m;
                poisson_weights[static_cast<std::size_t>(m)] = w;
            }
        } else {
            double xm = 1.0; // (lambda dt)^m / m!
            for (int m = 0; m <= max_jumps; ++m) {
                double partial = 0.0, term = 1.0;
                for (int j = 0; j <= max_jumps - m; ++j) {
                    partial += term;
                    term *= -lambda_dt / (j + 1);
                }
                poisson_weights[static_cast<std::size_t>(m)] = xm * partial;
                xm *= lambda_dt / (m + 1);
            }
        }
    }

    /// Retained mass sum of the m-term weights (< 1 for poisson_truncated,
    /// = 1 up to roundoff for semigroup_taylor).
    double truncated_mass() const {
        KahanSum acc;
        for (double w : poisson_weights) acc.add(w);
        return acc.value();
    }
};

namespace detail {

/// Reference path: odometer over the full Q^m index tuples in lexicographic
/// order, displacement and weight product maintained incrementally.
template <typename F>
void accumulate_tensor_full(const WeightedQuadrature& rule, int m, double pi_m, F&& field,
                            double x0, KahanSum& acc) {
    const std::size_t q = rule.nodes.size();
    std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
    std::vector<double> wprod(static_cast<std::size_t>(m), 0.0);
    std::vector<double> dsum(static_cast<std::size_t>(m), 0.0);
    auto rebuild_from = [&](int pos) {
        for (int k = pos; k < m; ++k) {
            const std::size_t ku = static_cast<std::size_t>(k);
            const double w = rule.weights[idx[ku]];
            const double a = rule.nodes[idx[ku]];
            wprod[ku] = (k == 0) ? w : wprod[ku - 1] * w;
            dsum[ku] = (k == 0) ? a : dsum[ku - 1] + a;
        }
    };
    rebuild_from(0);
    const std::size_t last = static_cast<std::size_t>(m) - 1;
    while (true) {
        acc.add(pi_m * wprod[last] * field(x0 + dsum[last]));
        // odometer increment, last index fastest
        int pos = m - 1;
        while (pos >= 0) {
            if (++idx[static_cast<std::size_t>(pos)] < q) break;
            idx[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        rebuild_from(pos);
    }
}

/// Optional fast path exploiting jump exchangeability: enumerate nondecreasing
/// tuples once, scaled by the multinomial count of their permutations.
template <typename F>
void accumulate_tensor_sorted(const WeightedQuadrature& rule, int m, double pi_m, F&& field,
                              double x0, KahanSum& acc) {
    const std::size_t q = rule.nodes.size();
    std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
    double m_fact = 1.0;
    for (int k = 2; k <= m; ++k) m_fact *= k;
    while (true) {
        double w = 1.0, d = 0.0;
        for (int k = 0; k < m; ++k) {
            w *= rule.weights[idx[static_cast<std::size_t>(k)]];
            d += rule.nodes[idx[static_cast<std::size_t>(k)]];
        }
        double perms = m_fact;
        std::size_t run = 1;
        for (int k = 1; k <= m; ++k) {
            if (k < m && idx[static_cast<std::size_t>(k)] == idx[static_cast<std::size_t>(k - 1)]) {
                ++run;
            } else {
                for (std::size_t r = 2; r <= run; ++r) perms /= static_cast<double>(r);
                run = 1;
            }
        }
        acc.add(pi_m * perms * w * field(x0 + d));
        int pos = m - 1;
        while (pos >= 0) {
            if (++idx[static_cast<std::size_t>(pos)] < q) break;
            --pos;
        }
        if (pos < 0) break;
        for (int k = pos + 1; k < m; ++k)
            idx[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(pos)];
    }
}

} // namespace detail

/// Applies the truncated expectation to an evaluable field at anchor x0:
///   pi_0 field(x0) + sum_{m=1}^{M} pi_m sum_{q_1..q_m} (prod_k w_{q_k}) field(x0 + sum_k a_{q_k}).
/// Summation order is fixed (m ascending, lexicographic tuples) with a
/// compensated outer accumulation, so results do not depend on thread count.
template <typename F>
double apply(const ExpectationOperator& op, F&& field, double x0) {
    KahanSum acc;
    acc.add(op.poisson_weights[0] * field(x0));
    for (int m = 1; m <= op.max_jumps; ++m) {
        const double pi_m = op.poisson_weights[static_cast<std::size_t>(m)];
        if (pi_m == 0.0) continue; // lambda*dt == 0: only the no-jump term carries mass
        if (op.collapse_symmetric)
            detail::accumulate_tensor_sorted(op.rule, m, pi_m, field, x0, acc);
        else
            detail::accumulate_tensor_full(op.rule, m, pi_m, field, x0, acc);
    }
    const double result = acc.value();
    if (!std::isfinite(result))
        throw numerical_failure("expectation: field produced non-finite values");
    return result;
}

} // namespace nldiff
