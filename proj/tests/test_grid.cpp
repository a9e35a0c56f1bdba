#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nldiff/grid.hpp"
#include "nldiff/mc.hpp"

using namespace nldiff;

namespace {

std::vector<double> random_poly(CounterRng& rng, int degree) {
    std::vector<double> c(static_cast<std::size_t>(degree) + 1);
    for (auto& v : c) v = 2.0 * rng.next_u01() - 1.0;
    return c;
}

double poly_eval(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
}

} // namespace

TEST_CASE("uniform grid construction") {
    const UniformGrid g = UniformGrid::from_count(0.0, 1.0, 65);
    CHECK(g.dx == doctest::Approx(1.0 / 64).epsilon(1e-15));
    CHECK(g.point(64) == 1.0);
    CHECK(std::abs(g.x_max - g.x_min - (g.count - 1) * g.dx) < 1e-12);

    const UniformGrid h = UniformGrid::from_spacing(0.0, 1.0, 0.125);
    CHECK(h.count == 9);
    CHECK_THROWS_AS(UniformGrid::from_count(0.0, 1.0, 1), invalid_parameter);
    CHECK_THROWS_AS(UniformGrid::from_spacing(0.0, 1.0, 0.3), invalid_parameter);
}

TEST_CASE("nearest stencil selection") {
    const UniformGrid g = UniformGrid::from_spacing(0.0, 1.0, 0.125);
    const auto idx = nearest_stencil(g, 0.51, 3);
    CHECK(idx == std::vector<int>{3, 4, 5, 6}); // points 0.375 .. 0.75

    CHECK(nearest_stencil(g, 0.0, 3) == std::vector<int>{0, 1, 2, 3});
    CHECK(nearest_stencil(g, 1.0, 3) == std::vector<int>{5, 6, 7, 8});

    // on-node with p=1: window containing the node, value reproduced exactly
    SolutionField f = sample_field(g, [](double x) { return 3.0 * x - 0.25; }, 1,
                                   ExteriorPolicy::clamp());
    for (int i = 0; i < g.count; ++i)
        CHECK(interpolate(f, g.point(i)) == f.values[static_cast<std::size_t>(i)]);

    CHECK_THROWS_AS(nearest_stencil(UniformGrid::from_count(0.0, 1.0, 3), 0.5, 3),
                    invalid_parameter);
}

TEST_CASE("stencil is contiguous and in bounds (property)") {
    CounterRng rng(17);
    const UniformGrid g = UniformGrid::from_count(-0.5, 2.0, 21);
    for (int trial = 0; trial < 500; ++trial) {
        const int p = 1 + static_cast<int>(rng.next_u01() * 3);
        const double x = -0.5 + 2.5 * rng.next_u01();
        const auto idx = nearest_stencil(g, x, p);
        REQUIRE(idx.size() == static_cast<std::size_t>(p) + 1);
        CHECK(idx.front() >= 0);
        CHECK(idx.back() <= g.count - 1);
        for (std::size_t j = 1; j < idx.size(); ++j) CHECK(idx[j] == idx[j - 1] + 1);
    }
}

TEST_CASE("cubic interpolation reproduces cubics") {
    const UniformGrid g = UniformGrid::from_count(0.0, 1.0, 9);
    SolutionField f = sample_field(g, [](double x) { return x * x * x; }, 3,
                                   ExteriorPolicy::clamp());
    CHECK(interpolate(f, 0.377) == doctest::Approx(0.377 * 0.377 * 0.377).epsilon(1e-13));
}

TEST_CASE("degree-p reproduction (property)") {
    CounterRng rng(23);
    for (int p : {1, 2, 3}) {
        const UniformGrid g = UniformGrid::from_count(-1.0, 1.0, 17);
        const auto coeffs = random_poly(rng, p);
        SolutionField f = sample_field(g, [&](double x) { return poly_eval(coeffs, x); }, p,
                                       ExteriorPolicy::clamp());
        for (int trial = 0; trial < 100; ++trial) {
            const double x = -1.0 + 2.0 * rng.next_u01();
            const double want = poly_eval(coeffs, x);
            CHECK(interpolate(f, x) == doctest::Approx(want).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("linear interpolation error of x^2 (frozen dense-probe maximum)") {
    const UniformGrid g = UniformGrid::from_spacing(0.0, 1.0, 0.125);
    SolutionField f = sample_field(g, [](double x) { return x * x; }, 1, ExteriorPolicy::clamp());
    double max_err = 0.0;
    for (int k = 0; k <= 4096; ++k) {
        const double x = k / 4096.0;
        max_err = std::max(max_err, std::abs(interpolate(f, x) - x * x));
    }
    // brute-force maximum: dx^2 * max|f''| / 8, attained at element midpoints
    CHECK(max_err == doctest::Approx(0.00390625).epsilon(1e-12));
}

TEST_CASE("piecewise-linear interpolant is continuous at knots") {
    const UniformGrid g = UniformGrid::from_count(0.0, 1.0, 17);
    SolutionField f = sample_field(g, [](double x) { return std::sin(5.0 * x); }, 1,
                                   ExteriorPolicy::clamp());
    for (int i = 1; i + 1 < g.count; ++i) {
        const double x = g.point(i);
        const double left = interpolate(f, x - 1e-13);
        const double right = interpolate(f, x + 1e-13);
        CHECK(std::abs(left - right) <= 1e-12);
    }
}

TEST_CASE("exterior policies") {
    const UniformGrid g = UniformGrid::from_count(0.0, 1.0, 5);
    SolutionField f = sample_field(g, [](double x) { return 2.0 * x + 1.0; }, 1,
                                   ExteriorPolicy::clamp());
    CHECK(interpolate(f, 1.5) == f.values.back()); // clamp to x_max value
    CHECK(interpolate(f, -0.5) == f.values.front());

    f.exterior = ExteriorPolicy::linear();
    CHECK(interpolate(f, 1.5) == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(interpolate(f, -0.5) == doctest::Approx(0.0).epsilon(1e-13).scale(1.0));

    f.exterior = ExteriorPolicy::exact([](double x) { return 42.0 + x; });
    CHECK(interpolate(f, 2.0) == 44.0);
    CHECK(interpolate(f, 0.5) == doctest::Approx(2.0).epsilon(1e-13)); // interior unaffected
}

TEST_CASE("adaptive refinement concentrates at a step") {
    AdaptiveGrid params;
    params.x_min = 0.0;
    params.x_max = 1.0;
    params.tolerance = 0.01;
    params.max_level = 14;
    const auto step = [](double x) { return x >= 0.5 ? 1.0 : 0.0; };
    const AdaptiveRefinement ref = refine(params, step);

    int added = 0, near = 0;
    for (std::size_t i = 0; i < ref.grid.points.size(); ++i) {
        const int lvl = ref.grid.levels[i];
        if (lvl < 3) continue;
        ++added;
        if (std::abs(ref.grid.points[i] - 0.5) <= std::ldexp(1.0, -(lvl - 2))) ++near;
    }
    CHECK(added > 0);
    CHECK(near >= (8 * added + 9) / 10); // >= 80% of refined points hug the step

    // refinement reaches max_level next to the step
    CHECK(ref.grid.h_min() == doctest::Approx(std::ldexp(1.0, -14)).epsilon(1e-12));
}

TEST_CASE("linear sampler refines no further than the base levels") {
    AdaptiveGrid params;
    params.x_min = 0.0;
    params.x_max = 1.0;
    params.tolerance = 1e-6;
    params.max_level = 12;
    const AdaptiveRefinement ref = refine(params, [](double x) { return 3.0 * x - 1.0; });
    CHECK(ref.grid.points == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    for (double s : ref.grid.surpluses) CHECK(std::abs(s) <= 1e-12);
}

TEST_CASE("every refined point's parent surplus exceeded the tolerance") {
    AdaptiveGrid params;
    params.x_min = 0.0;
    params.x_max = 1.0;
    params.tolerance = 5e-3;
    params.max_level = 12;
    const AdaptiveRefinement ref = refine(params, [](double x) { return std::sin(6.0 * x); });
    const auto& g = ref.grid;
    for (std::size_t i = 0; i < g.points.size(); ++i) {
        if (g.levels[i] < 3) continue; // base levels are unconditional
        const double spacing = std::ldexp(1.0, -g.levels[i]);
        // parent: the neighbor one level up that owned the split cell
        bool found = false;
        for (std::size_t j = 0; j < g.points.size(); ++j) {
            if (g.levels[j] != g.levels[i] - 1) continue;
            if (std::abs(std::abs(g.points[j] - g.points[i]) - spacing) < 1e-12) {
                CHECK(std::abs(g.surpluses[j]) > g.tolerance);
                found = true;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("adaptive interpolant error tracks the tolerance") {
    for (double tol : {1e-2, 1e-3, 1e-4}) {
        AdaptiveGrid params;
        params.x_min = 0.0;
        params.x_max = 1.0;
        params.tolerance = tol;
        params.max_level = 18;
        const auto smooth = [](double x) { return std::sin(2.0 * std::numbers::pi * x) + 0.3 * x; };
        const AdaptiveRefinement ref = refine(params, smooth);
        SolutionField f;
        f.grid = ref.grid;
        f.values = ref.values;
        f.order_p = 1;
        f.exterior = ExteriorPolicy::clamp();
        double max_err = 0.0;
        for (int k = 0; k <= 1001; ++k) {
            const double x = k / 1001.0;
            max_err = std::max(max_err, std::abs(interpolate(f, x) - smooth(x)));
        }
        CHECK(max_err <= 4.0 * tol);
    }

    // step sampler away from dyadic points: deep refinement keeps probes clean
    AdaptiveGrid params;
    params.x_min = 0.0;
    params.x_max = 1.0;
    params.tolerance = 1e-3;
    params.max_level = 22;
    const auto step = [](double x) { return x >= 0.37 ? 1.0 : 0.0; };
    const AdaptiveRefinement ref = refine(params, step);
    SolutionField f;
    f.grid = ref.grid;
    f.values = ref.values;
    f.order_p = 1;
    f.exterior = ExteriorPolicy::clamp();
    double max_err = 0.0;
    for (int k = 0; k <= 1009; ++k) {
        const double x = k / 1009.0;
        max_err = std::max(max_err, std::abs(interpolate(f, x) - step(x)));
    }
    CHECK(max_err <= 4.0 * 1e-3);
}

TEST_CASE("refine rejects bad parameters") {
    AdaptiveGrid params;
    params.tolerance = 0.0;
    CHECK_THROWS_AS(refine(params, [](double) { return 0.0; }), invalid_parameter);
    params.tolerance = 1e-3;
    params.max_level = 0;
    CHECK_THROWS_AS(refine(params, [](double) { return 0.0; }), invalid_parameter);
}
