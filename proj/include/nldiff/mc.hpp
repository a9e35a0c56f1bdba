#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nldiff/common.hpp"
#include "nldiff/kernel.hpp"
#include "nldiff/problem.hpp"
#include "nldiff/quadrature.hpp"

namespace nldiff {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

} // namespace detail

/// Counter-based splittable generator: (seed, stream) fully determine the
/// sequence, so parallel batches draw from independent reproducible streams.
struct CounterRng {
    std::uint64_t state;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : state(detail::mix64(seed + 0x9E3779B97F4A7C15ULL * (stream + 1)) ^
                detail::mix64(stream ^ 0xD1B54A32D192ED03ULL)) {}

    std::uint64_t next_u64() {
        state += 0x9E3779B97F4A7C15ULL;
        return detail::mix64(state);
    }
    double next_u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
};

/// Poisson sample by CDF inversion; fine for the moderate intensities here.
inline int poisson_inverse(double mean, double u) {
    double p = std::exp(-mean);
    double cdf = p;
    int k = 0;
    while (u > cdf && k < 100000) {
        ++k;
        p *= mean / k;
        cdf += p;
    }
    return k;
}

struct PathSample {
    std::vector<double> jump_times; // increasing, in (0, T]
    std::vector<double> jump_sizes;
    double x0 = 0.0;

    double terminal_position() const {
        double x = x0;
        for (double e : jump_sizes) x += e;
        return x;
    }
};

/// Inverse-CDF jump-size sampler for the built-in kernel families. The
/// singular family draws the sign first, then |e| = delta * u^2.
inline double sample_jump_size(const KernelSpec& kernel, CounterRng& rng) {
    switch (kernel.kind) {
        case KernelKind::symmetric_constant:
            return -kernel.delta + 2.0 * kernel.delta * rng.next_u01();
        case KernelKind::singular_sqrt: {
            const bool negative = rng.next_u01() < 0.5;
            const double u = rng.next_u01();
            const double mag = kernel.delta * u * u;
            return negative ? -mag : mag;
        }
        case KernelKind::nonsymmetric_constant:
            return -kernel.delta + 3.0 * kernel.delta * rng.next_u01();
        case KernelKind::custom:
            break;
    }
    throw unsupported_problem("sample_jump_size: no inverse CDF for custom kernels");
}

/// Analytic CDF of the jump-size density (for distribution tests).
inline double jump_size_cdf(const KernelSpec& kernel, double e) {
    const double d = kernel.delta;
    switch (kernel.kind) {
        case KernelKind::symmetric_constant:
            return std::clamp((e + d) / (2.0 * d), 0.0, 1.0);
        case KernelKind::singular_sqrt:
            if (e <= -d) return 0.0;
            if (e >= d) return 1.0;
            return e <= 0.0 ? 0.5 * (1.0 - std::sqrt(-e / d)) : 0.5 + 0.5 * std::sqrt(e / d);
        case KernelKind::nonsymmetric_constant:
            return std::clamp((e + d) / (3.0 * d), 0.0, 1.0);
        case KernelKind::custom:
            break;
    }
    throw unsupported_problem("jump_size_cdf: no closed form for custom kernels");
}

/// Compound Poisson path on [0, T]: Poisson(lambda T) jump count, jump times as
/// uniform order statistics, sizes i.i.d. from rho. Draw order is fixed
/// (count, then times, then sizes), so equal (seed, stream) pairs reproduce
/// identical paths.
inline PathSample sample_path(const KernelSpec& kernel, double T, double x0, CounterRng& rng) {
    if (!(T > 0.0)) throw invalid_parameter("sample_path: T must be positive");
    PathSample path;
    path.x0 = x0;
    const int jumps = poisson_inverse(kernel.lambda * T, rng.next_u01());
    path.jump_times.resize(static_cast<std::size_t>(jumps));
    for (int k = 0; k < jumps; ++k) path.jump_times[static_cast<std::size_t>(k)] = T * rng.next_u01();
    std::sort(path.jump_times.begin(), path.jump_times.end());
    path.jump_sizes.resize(static_cast<std::size_t>(jumps));
    for (int k = 0; k < jumps; ++k) path.jump_sizes[static_cast<std::size_t>(k)] = sample_jump_size(kernel, rng);
    return path;
}

inline PathSample sample_path(const KernelSpec& kernel, double T, double x0, std::uint64_t seed) {
    CounterRng rng(seed);
    return sample_path(kernel, T, x0, rng);
}

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long long samples = 0;
    std::uint64_t seed = 0;
};

namespace detail {

/// Integral of f over [a,b] with a fixed 32-point Gauss-Legendre rule; the
/// integrand is smooth in t between jumps, so this leaves only statistical error.
template <typename F>
double integrate_segment(F&& f, double a, double b) {
    static const QuadratureRule ref = gauss_legendre(32, 0.0, 1.0);
    const double len = b - a;
    double acc = 0.0;
    for (std::size_t j = 0; j < ref.nodes.size(); ++j)
        acc += ref.weights[j] * f(a + len * ref.nodes[j]);
    return acc * len;
}

} // namespace detail

/// Feynman-Kac estimator of u(T, x0) = E[ phi(X_T) + integral_0^T f(s, X_s) ds ]
/// for y-independent forcing. Benchmarks with y-dependent forcing qualify by
/// substituting the known solution into the y slot. Batches run in parallel on
/// independent RNG streams; the reduction is in fixed batch order, so the
/// estimate does not depend on the thread count.
inline McEstimate feynman_kac_estimate(const Problem& problem, double x0, long long samples,
                                       std::uint64_t seed, int n_threads = 1) {
    if (samples < 2) throw invalid_parameter("feynman_kac_estimate: need at least two samples");
    std::function<double(double, double)> forcing_xt;
    if (!problem.forcing_depends_on_y) {
        forcing_xt = [&problem](double t, double x) { return problem.forcing(t, x, 0.0); };
    } else if (problem.has_exact()) {
        const double T = problem.horizon_T;
        forcing_xt = [&problem, T](double t, double x) {
            return problem.forcing(t, x, problem.exact_solution(T - t, x));
        };
    } else {
        throw unsupported_problem(
            "feynman_kac_estimate: forcing depends on y and no exact solution is available");
    }

    const double T = problem.horizon_T;
    constexpr long long kBatch = 8192;
    const long long n_batches = (samples + kBatch - 1) / kBatch;
    std::vector<double> batch_sum(static_cast<std::size_t>(n_batches), 0.0);
    std::vector<double> batch_sumsq(static_cast<std::size_t>(n_batches), 0.0);

    parallel_for(static_cast<int>(n_batches), n_threads, [&](int b) {
        CounterRng rng(seed, static_cast<std::uint64_t>(b));
        const long long lo = b * kBatch;
        const long long hi = std::min(samples, lo + kBatch);
        KahanSum sum, sumsq;
        for (long long s = lo; s < hi; ++s) {
            const PathSample path = sample_path(problem.kernel, T, x0, rng);
            double x = x0;
            double t_prev = 0.0;
            double value = 0.0;
            for (std::size_t k = 0; k < path.jump_times.size(); ++k) {
                value += detail::integrate_segment([&](double t) { return forcing_xt(t, x); },
                                                   t_prev, path.jump_times[k]);
                x += path.jump_sizes[k];
                t_prev = path.jump_times[k];
            }
            value += detail::integrate_segment([&](double t) { return forcing_xt(t, x); }, t_prev, T);
            value += problem.terminal(x);
            sum.add(value);
            sumsq.add(value * value);
        }
        batch_sum[static_cast<std::size_t>(b)] = sum.value();
        batch_sumsq[static_cast<std::size_t>(b)] = sumsq.value();
    });

    KahanSum total, total_sq;
    for (long long b = 0; b < n_batches; ++b) {
        total.add(batch_sum[static_cast<std::size_t>(b)]);
        total_sq.add(batch_sumsq[static_cast<std::size_t>(b)]);
    }
    const double n = static_cast<double>(samples);
    const double mean = total.value() / n;
    const double var = std::max(0.0, (total_sq.value() - n * mean * mean) / (n - 1.0));
    McEstimate est;
    est.mean = mean;
    est.std_error = std::sqrt(var / n);
    est.samples = samples;
    est.seed = seed;
    return est;
}

/// Composite Simpson rule with n_panels (even) panels on [a,b].
inline QuadratureRule composite_simpson(int n_panels, double a, double b) {
    if (n_panels < 2) throw invalid_parameter("composite_simpson: need at least two panels");
    if (n_panels % 2 != 0) ++n_panels;
    QuadratureRule rule;
    const double h = (b - a) / n_panels;
    rule.nodes.resize(static_cast<std::size_t>(n_panels) + 1);
    rule.weights.resize(static_cast<std::size_t>(n_panels) + 1);
    for (int i = 0; i <= n_panels; ++i) {
        rule.nodes[static_cast<std::size_t>(i)] = (i == n_panels) ? b : a + i * h;
        const double c = (i == 0 || i == n_panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        rule.weights[static_cast<std::size_t>(i)] = c * h / 3.0;
    }
    return rule;
}

namespace detail {

/// Dense rho-weighted rule for the brute-force checker, deliberately built on a
/// different method than the production path (composite Simpson; the singular
/// density via the substitution e = delta s^2, which removes the singularity).
inline QuadratureRule dense_density_rule(const KernelSpec& kernel, int dense_q) {
    QuadratureRule out;
    if (kernel.singularity == KernelSingularity::inverse_sqrt_at_zero) {
        const double d = kernel.delta;
        const QuadratureRule s = composite_simpson(dense_q, 0.0, 1.0);
        // integral_0^d psi(e) rho(e) de = (1/2) integral_0^1 psi(d s^2) ds, per half
        for (std::size_t i = s.nodes.size(); i-- > 0;) {
            out.nodes.push_back(-d * s.nodes[i] * s.nodes[i]);
            out.weights.push_back(0.5 * s.weights[i]);
        }
        for (std::size_t i = 0; i < s.nodes.size(); ++i) {
            out.nodes.push_back(d * s.nodes[i] * s.nodes[i]);
            out.weights.push_back(0.5 * s.weights[i]);
        }
    } else {
        const QuadratureRule s = composite_simpson(dense_q, kernel.e_min, kernel.e_max);
        out.nodes = s.nodes;
        out.weights.resize(s.nodes.size());
        for (std::size_t i = 0; i < s.nodes.size(); ++i)
            out.weights[i] = s.weights[i] * kernel.rho(s.nodes[i]);
    }
    return out;
}

template <typename F>
double nested_expectation(const QuadratureRule& rule, F&& field, double x, int m) {
    if (m == 0) return field(x);
    double acc = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j)
        acc += rule.weights[j] * nested_expectation(rule, field, x + rule.nodes[j], m - 1);
    return acc;
}

} // namespace detail

/// Independent checker for the truncated expectation: same Poisson weights, but
/// each m-fold jump integral evaluated by recursive nesting of a dense rule.
template <typename F>
double brute_force_expectation(F&& field, const KernelSpec& kernel, double lambda_dt, int max_jumps,
                               int dense_q, double x0) {
    if (max_jumps > 3) throw invalid_parameter("brute_force_expectation: M <= 3 only");
    const QuadratureRule rule = detail::dense_density_rule(kernel, dense_q);
    double pi = std::exp(-lambda_dt);
    KahanSum acc;
    acc.add(pi * field(x0));
    for (int m = 1; m <= max_jumps; ++m) {
        pi *= lambda_dt / m;
        if (pi == 0.0) continue;
        acc.add(pi * detail::nested_expectation(rule, field, x0, m));
    }
    return acc.value();
}

} // namespace nldiff
