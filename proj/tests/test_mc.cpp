#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nldiff/mc.hpp"

using namespace nldiff;

TEST_CASE("path sampling is reproducible per (seed, stream)") {
    const KernelSpec kernel = nonsymmetric_constant_kernel(0.5);
    CounterRng a(42, 7), b(42, 7), c(42, 8);
    const PathSample pa = sample_path(kernel, 1.0, 0.2, a);
    const PathSample pb = sample_path(kernel, 1.0, 0.2, b);
    CHECK(pa.jump_times == pb.jump_times);
    CHECK(pa.jump_sizes == pb.jump_sizes);
    const PathSample pc = sample_path(kernel, 1.0, 0.2, c);
    CHECK(pa.jump_times != pc.jump_times); // different stream, different path
}

TEST_CASE("jump counts follow the kernel intensity") {
    const KernelSpec kernel = symmetric_constant_kernel(1.0); // lambda = 2
    CounterRng rng(5);
    const int n = 100000;
    double count_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const PathSample path = sample_path(kernel, 1.0, 0.0, rng);
        count_sum += static_cast<double>(path.jump_times.size());
        for (std::size_t k = 1; k < path.jump_times.size(); ++k)
            CHECK(path.jump_times[k] >= path.jump_times[k - 1]);
        for (double e : path.jump_sizes) {
            CHECK(e >= kernel.e_min);
            CHECK(e <= kernel.e_max);
        }
    }
    const double mean = count_sum / n;
    CHECK(std::abs(mean - 2.0) <= 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("terminal drift matches the compensator rate") {
    const KernelSpec kernel = nonsymmetric_constant_kernel(0.1); // drift_b = 0.015
    CounterRng rng(9);
    const int n = 200000;
    KahanSum disp, disp_sq;
    for (int i = 0; i < n; ++i) {
        const PathSample path = sample_path(kernel, 1.0, 0.3, rng);
        const double d = path.terminal_position() - 0.3;
        disp.add(d);
        disp_sq.add(d * d);
    }
    const double mean = disp.value() / n;
    const double var = (disp_sq.value() - n * mean * mean) / (n - 1);
    const double se = std::sqrt(var / n);
    CHECK(std::abs(mean - kernel.drift_b * 1.0) <= 3.0 * se);
}

TEST_CASE("vanishing horizon leaves the path at its start") {
    const KernelSpec kernel = symmetric_constant_kernel(1.0);
    CounterRng rng(13);
    for (int i = 0; i < 1000; ++i) {
        const PathSample path = sample_path(kernel, 1e-12, 0.7, rng);
        CHECK(path.jump_times.empty());
        CHECK(path.terminal_position() == 0.7);
    }
    CHECK_THROWS_AS(sample_path(kernel, 0.0, 0.0, rng), invalid_parameter);
}

TEST_CASE("jump sizes pass a Kolmogorov-Smirnov test at the 1% level") {
    for (const KernelSpec& kernel : {symmetric_constant_kernel(1.0), singular_sqrt_kernel(1.0),
                                     nonsymmetric_constant_kernel(0.1)}) {
        CounterRng rng(77);
        const int n = 100000;
        std::vector<double> samples(n);
        for (auto& s : samples) s = sample_jump_size(kernel, rng);
        std::sort(samples.begin(), samples.end());
        double d_stat = 0.0;
        for (int i = 0; i < n; ++i) {
            const double f = jump_size_cdf(kernel, samples[static_cast<std::size_t>(i)]);
            d_stat = std::max(d_stat, std::abs(f - (i + 1.0) / n));
            d_stat = std::max(d_stat, std::abs(f - static_cast<double>(i) / n));
        }
        CHECK(d_stat < 1.628 / std::sqrt(static_cast<double>(n))); // 1% critical value
    }
}

TEST_CASE("feynman-kac on constant data is exact with zero variance") {
    Problem p;
    p.kernel = symmetric_constant_kernel(1.0);
    p.forcing = [](double, double, double) { return 0.0; };
    p.terminal = [](double) { return 3.25; };
    p.horizon_T = 1.0;
    p.lipschitz_L = 1e-12;
    p.forcing_depends_on_y = false;

    const McEstimate est = feynman_kac_estimate(p, 0.0, 10000, 1);
    CHECK(est.mean == 3.25);
    CHECK(est.std_error <= 1e-12);
}

TEST_CASE("feynman-kac reproduces the smooth benchmark values") {
    const Problem ex1 = benchmark_problem(BenchmarkId::ex1, 1.0, 1.0);
    const McEstimate e1 = feynman_kac_estimate(ex1, 0.5, 200000, 11, 2);
    CHECK(e1.std_error < 1e-2);
    CHECK(std::abs(e1.mean - ex1.exact_solution(1.0, 0.5)) <= 3.0 * e1.std_error);

    const Problem ex2 = benchmark_problem(BenchmarkId::ex2, 1.0, 0.25);
    const McEstimate e2 = feynman_kac_estimate(ex2, 0.0, 200000, 12, 2);
    CHECK(std::abs(e2.mean - 0.0625) <= 3.0 * e2.std_error);

    // parallel batch reduction is in fixed order: thread count cannot matter
    const McEstimate serial = feynman_kac_estimate(ex2, 0.0, 50000, 3, 1);
    const McEstimate threaded = feynman_kac_estimate(ex2, 0.0, 50000, 3, 4);
    CHECK(serial.mean == threaded.mean);
    CHECK(serial.std_error == threaded.std_error);
}

TEST_CASE("feynman-kac rejects unsupported problems") {
    Problem p;
    p.kernel = symmetric_constant_kernel(1.0);
    p.forcing = [](double, double, double y) { return y; };
    p.terminal = [](double) { return 0.0; };
    p.horizon_T = 1.0;
    p.lipschitz_L = 1.0;
    p.forcing_depends_on_y = true; // and no exact solution to substitute
    CHECK_THROWS_AS(feynman_kac_estimate(p, 0.0, 1000, 1), unsupported_problem);
}

TEST_CASE("brute-force expectation identities") {
    const KernelSpec kernel = symmetric_constant_kernel(1.0);
    const double got = brute_force_expectation([](double) { return 1.0; }, kernel, 0.1, 3, 200, 0.0);
    const double mass = std::exp(-0.1) * (1.0 + 0.1 + 0.005 + 0.001 / 6.0);
    CHECK(std::abs(got - mass) <= 1e-12);

    // x^2 with one retained jump: pi_0 x0^2 + pi_1 (x0^2 + 1/3)
    const double x0 = 0.4;
    const double pi0 = std::exp(-0.2), pi1 = pi0 * 0.2;
    const double want = pi0 * x0 * x0 + pi1 * (x0 * x0 + 1.0 / 3.0);
    const double got2 =
        brute_force_expectation([](double x) { return x * x; }, kernel, 0.2, 1, 200, x0);
    CHECK(got2 == doctest::Approx(want).epsilon(1e-12));

    CHECK_THROWS_AS(brute_force_expectation([](double) { return 1.0; }, kernel, 0.1, 4, 50, 0.0),
                    invalid_parameter);
}
