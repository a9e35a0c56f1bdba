#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace nldiff {

/// Bad user-supplied parameter (nonpositive horizon, degenerate interval, ...).
struct invalid_parameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Solver configuration violates a scheme precondition (e.g. theta*dt*L >= 1).
struct configuration_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A computation produced non-finite values or failed to converge.
struct numerical_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operation not defined for this problem (e.g. MC oracle with y-dependent forcing).
struct unsupported_problem : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Kahan compensated accumulator for long low-magnitude sums.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double value) {
        const double y = value - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

inline bool nearly_equal(double a, double b, double rel, double abs_floor = 0.0) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= std::max(rel * scale, abs_floor);
}

/// Static-partition parallel map over [0, n). The worker must write only to
/// disjoint state per index; chunk boundaries never change results.
template <typename F>
void parallel_for(int n, int n_threads, F&& body) {
    if (n <= 0) return;
    if (n_threads <= 1 || n == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    n_threads = std::min(n_threads, n);
    const int chunk = (n + n_threads - 1) / n_threads;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &body] {
            for (int i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& w : workers) w.join();
}

inline int hardware_threads() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

} // namespace nldiff
