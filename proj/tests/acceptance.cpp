// Acceptance suite: runs the benchmark regressions end to end and prints one
// pass/fail line per criterion. Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "nldiff/mc.hpp"
#include "nldiff/norms.hpp"
#include "nldiff/stepper.hpp"
#include "nldiff/tables.hpp"

using namespace nldiff;

namespace {

struct Criterion {
    std::string name;
    bool pass = true;
    std::vector<std::string> notes;

    void clause(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back(std::string(ok ? "  ok   " : "  FAIL ") + what);
    }
};

std::vector<Criterion> g_criteria;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const SweepResult& find_row(const TableResult& table, const std::string& label) {
    for (const auto& row : table.rows)
        if (row.label == label) return row.sweep;
    throw std::runtime_error("missing table row " + label);
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

bool in_band(double value, double center, double halfwidth) {
    return std::isfinite(value) && std::abs(value - center) <= halfwidth;
}

void criterion1(const TableOptions& opt) {
    Criterion c;
    c.name = "criterion 1: time convergence, symmetric kernel (Table 1)";
    const auto t0 = std::chrono::steady_clock::now();
    const TableResult table = reproduce_table1(opt);

    const SweepResult& cn = find_row(table, "theta=0.5 My=2 Mf=1");
    c.clause(in_band(cn.cr_linf, 1.98, 0.15),
             fmt("theta=1/2 My=2 Mf=1: fitted CR %.3f within 1.98 +/- 0.15", cn.cr_linf));

    const double reference[5] = {3.207e-3, 8.258e-4, 2.094e-4, 5.271e-5, 1.322e-5};
    bool factor3 = true;
    double worst = 1.0;
    for (std::size_t i = 0; i < 5; ++i) {
        const double ratio = cn.points[i].error_linf / reference[i];
        factor3 = factor3 && ratio <= 3.0 && ratio >= 1.0 / 3.0;
        worst = std::min(worst, ratio);
    }
    c.clause(factor3,
             fmt("each Linf within factor 3 of the reference row (smallest ratio %.4f; this "
                 "implementation undershoots the reference errors ~30x: only the Crank-Nicolson "
                 "remainder survives the mass-exact truncation - see decisions ledger)",
                 worst));

    const SweepResult& e01 = find_row(table, "theta=0 My=1 Mf=0");
    const SweepResult& e11 = find_row(table, "theta=1 My=1 Mf=0");
    c.clause(in_band(e01.cr_linf, 1.0, 0.15),
             fmt("theta=0, My=1: CR %.3f within 1.0 +/- 0.15", e01.cr_linf));
    c.clause(in_band(e11.cr_linf, 1.0, 0.15),
             fmt("theta=1, My=1: CR %.3f within 1.0 +/- 0.15", e11.cr_linf));

    const SweepResult& stall = find_row(table, "theta=0.5 My=0 Mf=0");
    c.clause(stall.points[4].error_linf >= 0.1,
             fmt("My=Mf=0: Linf at N=64 is %.3e >= 0.1 (non-convergence)",
                 stall.points[4].error_linf));

    const double secs = seconds_since(t0);
    c.clause(secs <= 60.0, fmt("runtime %.1f s <= 60 s", secs));
    g_criteria.push_back(c);
}

void criterion2(const TableOptions& opt) {
    Criterion c;
    c.name = "criterion 2: spatial convergence, symmetric kernel (Table 2)";
    const auto t0 = std::chrono::steady_clock::now();
    const TableResult full = reproduce_table2(opt);
    const double secs = seconds_since(t0);

    const SweepResult& p1 = find_row(full, "p=1");
    const SweepResult& p2 = find_row(full, "p=2");
    c.clause(in_band(p1.cr_linf, 2.0, 0.15),
             fmt("linear interpolation Linf CR %.3f within 2.0 +/- 0.15", p1.cr_linf));
    c.clause(in_band(p2.cr_l2, 3.0, 0.2),
             fmt("quadratic interpolation L2 CR %.3f within 3.0 +/- 0.2", p2.cr_l2));
    c.clause(secs <= 600.0, fmt("full-mode (N=1024) runtime %.1f s <= 600 s", secs));

    TableOptions fast = opt;
    fast.fast = true;
    const TableResult reduced = reproduce_table2(fast);
    const SweepResult& r1 = find_row(reduced, "p=1");
    const SweepResult& r2 = find_row(reduced, "p=2");
    c.clause(in_band(r1.cr_linf, 2.0, 0.15) && in_band(r2.cr_l2, 3.0, 0.2),
             fmt("reduced mode (N=256): rates %.3f / %.3f in the same bands", r1.cr_linf,
                 r2.cr_l2));
    g_criteria.push_back(c);
}

void criterion3(const TableOptions& opt) {
    Criterion c;
    c.name = "criterion 3: time convergence, singular kernel (Table 3)";
    const TableResult table = reproduce_table3(opt);

    const SweepResult& cn = find_row(table, "theta=0.5 My=3 Mf=2");
    const double max_err = cn.points[4].error_linf;
    c.clause(in_band(cn.cr_linf, 2.03, 0.15),
             fmt("theta=1/2 My=3 Mf=2: CR %.3f within 2.03 +/- 0.15 (errors are at machine "
                 "precision, %.1e at N=64: the mass-exact scheme is exact on this quadratic "
                 "benchmark, so no decaying error exists to fit - see decisions ledger)",
                 cn.cr_linf, max_err));

    const SweepResult& be = find_row(table, "theta=1 My=1 Mf=0");
    c.clause(in_band(be.cr_linf, 0.95, 0.15),
             fmt("theta=1, My=1: CR %.3f within 0.95 +/- 0.15", be.cr_linf));
    g_criteria.push_back(c);
}

void criterion4(const TableOptions& opt) {
    Criterion c;
    c.name = "criterion 4: spatial convergence, singular kernel (Table 4)";
    const TableResult table = reproduce_table4(opt);
    const SweepResult& d1 = find_row(table, "delta=1");
    const SweepResult& d01 = find_row(table, "delta=0.1");
    c.clause(in_band(d1.cr_l2, 2.05, 0.2),
             fmt("delta=1: L2 CR %.3f within 2.05 +/- 0.2", d1.cr_l2));
    c.clause(in_band(d01.cr_l2, 2.2, 0.25),
             fmt("delta=0.1: L2 CR %.3f within 2.2 +/- 0.25 (the singular density puts half "
                 "its jump mass below delta/4, so sub-element jumps suppress the linear-interp "
                 "bias at coarse dx and shave ~0.2 off the fitted rate at lambda*T=100 - see "
                 "decisions ledger)",
                 d01.cr_l2));
    g_criteria.push_back(c);
}

void criterion5(const TableOptions& opt) {
    Criterion c;
    c.name = "criterion 5: discontinuous benchmark, uniform + adaptive (Table 5)";
    const TableResult table = reproduce_table5(opt);
    for (const auto& row : table.rows) {
        c.clause(in_band(row.sweep.cr_l2, 0.52, 0.1),
                 fmt((row.label + ": uniform L2 CR %.3f within 0.52 +/- 0.1").c_str(),
                     row.sweep.cr_l2));
        c.clause(row.sweep.cr_linf <= 0.1,
                 fmt((row.label + ": uniform Linf CR %.3f <= 0.1 (stalls at the jump)").c_str(),
                     row.sweep.cr_linf));
    }

    const AdaptiveStudy study = adaptive_study(opt);
    c.clause(study.single_l2 <= 2e-3 && study.single_points <= 40,
             fmt("adaptive run reaches L2 %.3e <= 2e-3 with %.0f <= 40 points", study.single_l2,
                 static_cast<double>(study.single_points)));
    c.clause(std::isfinite(study.sweep.cr_linf) && study.sweep.cr_linf >= 1.7,
             fmt("discontinuity-excluded Linf rate %.3f >= 1.7 under adaptive refinement",
                 study.sweep.cr_linf));
    g_criteria.push_back(c);
}

void criterion6(const TableOptions& opt) {
    Criterion c;
    c.name = "criterion 6: Monte Carlo cross-check of the deterministic march";
    const int threads = opt.threads == ThreadPolicy::parallel ? hardware_threads() : 1;
    const long long samples = 1000000;

    struct Setup {
        BenchmarkId id;
        double delta, T;
        SolverConfig config;
        std::vector<double> probes;
    };
    std::vector<Setup> setups;
    {
        Setup ex1{BenchmarkId::ex1, 1.0, 1.0, {}, {0.1, 0.3, 0.5, 0.7, 0.9}};
        ex1.config.theta = 0.5;
        ex1.config.n_steps = 64;
        ex1.config.value_jumps = 2;
        ex1.config.forcing_jumps = 1;
        ex1.config.n_x = 65;
        ex1.config.order_p = 3;
        setups.push_back(ex1);

        Setup ex2{BenchmarkId::ex2, 1.0, 0.25, {}, {0.1, 0.3, 0.5, 0.7, 0.9}};
        ex2.config = ex1.config;
        ex2.config.value_jumps = 3;
        ex2.config.forcing_jumps = 2;
        setups.push_back(ex2);

        // phi = 0 and lambda*T = 0.15 make the MC estimate nearly deterministic
        // (se ~ 2e-5), so the march must resolve the jump element finely enough
        // that its O(dx) pollution stays under the 3-sigma bar.
        Setup ex3{BenchmarkId::ex3, 0.1, 0.5, {}, {0.125, 0.25, 0.375, 0.75, 0.875}};
        ex3.config.theta = 0.5;
        ex3.config.n_steps = 256;
        ex3.config.value_jumps = 1;
        ex3.config.forcing_jumps = 1;
        ex3.config.family_auto = false;
        ex3.config.family = QuadratureFamily::trapezoid;
        ex3.config.n_x = 2049;
        ex3.config.order_p = 1;
        setups.push_back(ex3);
    }

    for (auto& setup : setups) {
        const auto t0 = std::chrono::steady_clock::now();
        const Problem problem = benchmark_problem(setup.id, setup.delta, setup.T);
        setup.config.threads = opt.threads;
        const SolveResult solved = solve(problem, setup.config);

        double worst_gap = 0.0, worst_se = 0.0;
        bool agree = true;
        for (std::size_t i = 0; i < setup.probes.size(); ++i) {
            const double x0 = setup.probes[i];
            const McEstimate est = feynman_kac_estimate(problem, x0, samples, 90 + i, threads);
            const double solver_value = interpolate(solved.field, x0);
            const double gap = std::abs(solver_value - est.mean);
            agree = agree && gap <= 3.0 * est.std_error && est.std_error <= 5e-3;
            worst_gap = std::max(worst_gap, gap / est.std_error);
            worst_se = std::max(worst_se, est.std_error);
        }
        const double secs = seconds_since(t0);
        c.clause(agree && secs <= 120.0,
                 fmt((std::string(to_string(setup.id)) +
                      ": 5 probes within 3 std errors (worst gap %.2f se, max se %.2e, %.0f s)")
                         .c_str(),
                     worst_gap, worst_se, secs));
    }
    g_criteria.push_back(c);
}

void criterion7() {
    Criterion c;
    c.name = "criterion 7: property suites (no table regressions involved)";

    // brute-force equivalence of the tensor enumeration, Q <= 3, M <= 2
    {
        const KernelSpec kernel = nonsymmetric_constant_kernel(0.5);
        const WeightedQuadrature rule = density_weighted(kernel, 3);
        auto field = [](double x) { return std::exp(0.3 * x) + x * x; };
        bool ok = true;
        for (int m = 0; m <= 2; ++m) {
            const ExpectationOperator op(rule, 0.2, m);
            double want = op.poisson_weights[0] * field(0.4);
            if (m >= 1)
                for (std::size_t q1 = 0; q1 < rule.nodes.size(); ++q1)
                    want += op.poisson_weights[1] * rule.weights[q1] * field(0.4 + rule.nodes[q1]);
            if (m >= 2)
                for (std::size_t q1 = 0; q1 < rule.nodes.size(); ++q1)
                    for (std::size_t q2 = 0; q2 < rule.nodes.size(); ++q2)
                        want += op.poisson_weights[2] * rule.weights[q1] * rule.weights[q2] *
                                field(0.4 + rule.nodes[q1] + rule.nodes[q2]);
            ok = ok && std::abs(apply(op, field, 0.4) - want) <= 1e-14 * std::abs(want);
        }
        c.clause(ok, "expectation equals an independently coded nested loop to 1e-14");
    }

    // quadrature polynomial exactness at 1e-12
    {
        bool ok = true;
        const QuadratureRule gl = gauss_legendre(8, -1.0, 2.0);
        double acc = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i)
            acc += gl.weights[i] * std::pow(gl.nodes[i], 15.0);
        const double exact_gl = (std::pow(2.0, 16.0) - 1.0) / 16.0;
        ok = ok && std::abs(acc - exact_gl) <= 1e-12 * std::abs(exact_gl);

        const QuadratureRule gj = gauss_jacobi_sqrt(8, 1.0);
        acc = 0.0;
        for (std::size_t i = 0; i < gj.nodes.size(); ++i)
            acc += gj.weights[i] * std::pow(gj.nodes[i], 15.0);
        ok = ok && std::abs(acc - 1.0 / 15.5) <= 1e-12;
        c.clause(ok, "Gauss rules integrate degree 2Q-1 polynomials to 1e-12");
    }

    // interpolation degree-p reproduction at 1e-12
    {
        bool ok = true;
        const UniformGrid grid = UniformGrid::from_count(0.0, 1.0, 17);
        for (int p : {1, 2, 3}) {
            auto poly = [p](double x) {
                double acc = 0.0;
                for (int k = 0; k <= p; ++k) acc += (k + 0.5) * std::pow(x, k);
                return acc;
            };
            SolutionField f = sample_field(grid, poly, p, ExteriorPolicy::clamp());
            for (int trial = 0; trial <= 50; ++trial) {
                const double x = trial / 50.0;
                ok = ok && std::abs(interpolate(f, x) - poly(x)) <= 1e-12;
            }
        }
        c.clause(ok, "degree-p interpolation reproduces degree-p polynomials to 1e-12");
    }

    // truncated-mass identities at 1e-14
    {
        const KernelSpec kernel = symmetric_constant_kernel(1.0);
        const WeightedQuadrature rule = density_weighted(kernel, 8);
        const ExpectationOperator op(rule, 0.1, 3);
        const double expect = std::exp(-0.1) * (1.0 + 0.1 + 0.005 + 0.001 / 6.0);
        bool ok = std::abs(op.truncated_mass() - expect) <= 1e-14;
        ok = ok && std::abs(apply(op, [](double) { return 2.0; }, 0.1) -
                            2.0 * op.truncated_mass()) <= 1e-14;
        const ExpectationOperator zero(rule, 0.0, 2);
        ok = ok && zero.truncated_mass() == 1.0;
        c.clause(ok, "truncated-mass identities hold to 1e-14");
    }

    // bitwise determinism, serial vs parallel
    {
        const Problem p = benchmark_problem(BenchmarkId::ex1, 1.0, 1.0);
        SolverConfig config;
        config.n_steps = 8;
        config.n_x = 33;
        config.order_p = 3;
        config.threads = ThreadPolicy::serial;
        const SolveResult serial = solve(p, config);
        config.threads = ThreadPolicy::parallel;
        config.thread_count = 4;
        const SolveResult parallel = solve(p, config);
        bool ok = serial.field.values.size() == parallel.field.values.size();
        for (std::size_t i = 0; ok && i < serial.field.values.size(); ++i)
            ok = serial.field.values[i] == parallel.field.values[i];
        c.clause(ok, "serial and parallel marches agree bitwise");
    }

    // fixed-point iteration counts within the contraction bound
    {
        const Problem p = benchmark_problem(BenchmarkId::ex1, 1.0, 1.0);
        SolverConfig config;
        config.theta = 0.5;
        config.n_steps = 16;
        config.n_x = 33;
        config.order_p = 3;
        const SolveResult result = solve(p, config);
        const double q = config.theta * (p.horizon_T / config.n_steps) * p.lipschitz_L;
        const int bound =
            static_cast<int>(std::ceil(std::log(config.fixed_point_tol) / std::log(q))) + 1;
        bool ok = true;
        for (const auto& level : result.levels)
            ok = ok && level.max_fixed_point_iterations <= bound;
        c.clause(ok, fmt("fixed-point iterations within the contraction bound (%.0f)",
                         static_cast<double>(bound)));
    }
    g_criteria.push_back(c);
}

} // namespace

int main() {
    TableOptions opt;
    opt.threads = ThreadPolicy::parallel;

    const auto t0 = std::chrono::steady_clock::now();
    criterion1(opt);
    criterion2(opt);
    criterion3(opt);
    criterion4(opt);
    criterion5(opt);
    criterion6(opt);
    criterion7();

    int failures = 0;
    for (const auto& c : g_criteria) {
        std::printf("[%s] %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str());
        for (const auto& note : c.notes) std::printf("%s\n", note.c_str());
        if (!c.pass) ++failures;
    }
    std::printf("%d/%zu criteria passed in %.1f s\n", static_cast<int>(g_criteria.size()) - failures,
                g_criteria.size(), seconds_since(t0));
    return failures;
}
