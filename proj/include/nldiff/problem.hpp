#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "nldiff/common.hpp"
#include "nldiff/kernel.hpp"

namespace nldiff {

/// A nonlocal diffusion problem packaged on the backward clock: the march works
/// with f(t,x,y) = g(T-t,x,y), so no time reversal happens inside the stepper.
/// `exact_solution` is the forward-time solution u(t,x) when one is known
/// (manufactured benchmarks); the output of a solve approximates u(T, .).
struct Problem {
    KernelSpec kernel;
    std::function<double(double, double, double)> forcing; // f(t, x, y), backward clock
    std::function<double(double)> terminal;                // phi(x) = u(0, x)
    double horizon_T = 1.0;
    double lipschitz_L = 0.0; // Lipschitz constant of forcing in y (floored at 1e-12)
    std::function<double(double, double)> exact_solution;  // u(t, x), forward clock; may be empty
    bool forcing_depends_on_y = false;
    std::string name = "custom";

    bool has_exact() const { return static_cast<bool>(exact_solution); }
};

enum class BenchmarkId { ex1, ex2, ex3 };

inline const char* to_string(BenchmarkId id) {
    switch (id) {
        case BenchmarkId::ex1: return "ex1";
        case BenchmarkId::ex2: return "ex2";
        case BenchmarkId::ex3: return "ex3";
    }
    return "?";
}

inline BenchmarkId benchmark_id_from_string(const std::string& s) {
    if (s == "ex1") return BenchmarkId::ex1;
    if (s == "ex2") return BenchmarkId::ex2;
    if (s == "ex3") return BenchmarkId::ex3;
    throw invalid_parameter("unknown benchmark id: " + s);
}

namespace detail {

/// Forward-time forcing of the discontinuous benchmark. Branch intervals are
/// half-open, closed at the lower end.
inline double ex3_forcing_forward(double t, double x, double delta) {
    const double s = std::sin(t);
    const double c = std::cos(t);
    const double p = x + 2.0 * delta;
    const double m = x - delta;
    if (x < 0.5 - 2.0 * delta)
        return s * (-0.5 * p * p + 0.5 * m * m + 3.0 * delta * x) + x * c;
    if (x < 0.5)
        return s * (-1.0 / 12.0 - p * p * p / 3.0 + 0.5 * m * m + 3.0 * delta * x) + x * c;
    if (x < 0.5 + delta)
        return s * (-1.0 / 12.0 - p * p * p / 3.0 + 0.5 * m * m + 3.0 * delta * x * x) + x * x * c;
    return s * (-p * p * p / 3.0 + m * m * m / 3.0 + 3.0 * delta * x * x) + x * x * c;
}

} // namespace detail

/// The three manufactured benchmarks. `delta` is the kernel horizon and `T`
/// the terminal time; each carries its exact solution for error measurement.
inline Problem benchmark_problem(BenchmarkId id, double delta, double T) {
    if (!(delta > 0.0)) throw invalid_parameter("benchmark_problem: delta must be positive");
    if (!(T > 0.0)) throw invalid_parameter("benchmark_problem: T must be positive");

    Problem p;
    p.horizon_T = T;
    p.name = to_string(id);

    switch (id) {
        case BenchmarkId::ex1: {
            p.kernel = symmetric_constant_kernel(delta);
            p.exact_solution = [](double t, double x) {
                return (-x * x * x + x * x) * std::exp(-t / 10.0);
            };
            // g(t,x,u) = -u/10 + (2x - 2/3) e^{-t/10}; independent of delta.
            p.forcing = [T](double t, double x, double y) {
                return -y / 10.0 + (2.0 * x - 2.0 / 3.0) * std::exp(-(T - t) / 10.0);
            };
            p.terminal = [](double x) { return -x * x * x + x * x; };
            p.lipschitz_L = 0.1;
            p.forcing_depends_on_y = true;
            break;
        }
        case BenchmarkId::ex2: {
            p.kernel = singular_sqrt_kernel(delta);
            p.exact_solution = [](double t, double x) { return (x + t) * (x + t); };
            // g(t,x) = 2(x+t) - 4/5 for every delta (second moment of rho is delta-free).
            p.forcing = [T](double t, double x, double) {
                return 2.0 * (x + (T - t)) - 0.8;
            };
            p.terminal = [](double x) { return x * x; };
            p.lipschitz_L = 1e-12;
            p.forcing_depends_on_y = false;
            break;
        }
        case BenchmarkId::ex3: {
            p.kernel = nonsymmetric_constant_kernel(delta);
            p.exact_solution = [](double t, double x) {
                return (x < 0.5 ? x : x * x) * std::sin(t);
            };
            p.forcing = [T, delta](double t, double x, double) {
                return detail::ex3_forcing_forward(T - t, x, delta);
            };
            p.terminal = [](double) { return 0.0; }; // u(0,x) = sin(0) * ... = 0
            p.lipschitz_L = 1e-12;
            p.forcing_depends_on_y = false;
            break;
        }
    }
    return p;
}

inline Problem benchmark_problem(const std::string& id, double delta, double T) {
    return benchmark_problem(benchmark_id_from_string(id), delta, T);
}

} // namespace nldiff
