#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nldiff/problem.hpp"
#include "nldiff/stepper.hpp"

namespace nldiff {

/// Flat `key = value` configuration ('#' comments), plus command-line
/// `key=value` overrides. Unknown keys fail loudly.
class ConfigMap {
  public:
    static ConfigMap from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw invalid_parameter("config: cannot open " + path);
        ConfigMap cfg;
        std::string line;
        while (std::getline(in, line)) cfg.ingest_line(line);
        return cfg;
    }

    void apply_override(const std::string& assignment) { ingest_line(assignment); }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? fallback : it->second;
    }
    double get_double(const std::string& key, double fallback) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        return parse_double(key, it->second);
    }
    int get_int(const std::string& key, int fallback) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        return static_cast<int>(parse_double(key, it->second));
    }
    long long get_long(const std::string& key, long long fallback) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        return static_cast<long long>(parse_double(key, it->second));
    }
    bool get_bool(const std::string& key, bool fallback) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        if (it->second == "true" || it->second == "1" || it->second == "on") return true;
        if (it->second == "false" || it->second == "0" || it->second == "off") return false;
        throw invalid_parameter("config: bad boolean for " + key + ": " + it->second);
    }
    std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        std::vector<double> values;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) values.push_back(parse_double(key, item));
        return values;
    }

    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    static double parse_double(const std::string& key, const std::string& value) {
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (end == value.c_str()) throw invalid_parameter("config: bad number for " + key);
        return v;
    }

    void ingest_line(const std::string& raw) {
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw invalid_parameter("config: expected key = value, got: " + raw);
            return;
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw invalid_parameter("config: empty key in: " + raw);
        entries_[key] = value;
    }

    std::map<std::string, std::string> entries_;
};

namespace detail {

inline double default_horizon(BenchmarkId id) {
    switch (id) {
        case BenchmarkId::ex1: return 1.0;
        case BenchmarkId::ex2: return 0.25;
        case BenchmarkId::ex3: return 0.5;
    }
    return 1.0;
}

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "problem", "delta", "T",
        "scheme.theta", "scheme.N", "scheme.M_y", "scheme.M_f", "scheme.weighting",
        "quadrature.family", "quadrature.Q", "quadrature.trap_spacing",
        "grid.x_min", "grid.x_max", "grid.N_x", "grid.dx", "grid.p",
        "adaptive.enabled", "adaptive.tolerance", "adaptive.max_level",
        "solver.fixed_point_tol", "solver.fixed_point_max_iter",
        "exterior", "threads", "threads.count", "seed",
        "oracle.samples", "oracle.probes",
        "sweep.values", "sweep.window", "sweep.exclusion",
    };
    return keys;
}

} // namespace detail

/// A fully-resolved run: the benchmark problem plus solver configuration, with
/// the few harness extras (seed, oracle settings, sweep lists) alongside.
struct RunSetup {
    Problem problem;
    SolverConfig config;
    std::uint64_t seed = 2024;
    long long oracle_samples = 1000000;
    std::vector<double> oracle_probes = {0.1, 0.3, 0.5, 0.7, 0.9};
    std::vector<double> sweep_values;
    double window_lo = 0.0;
    double window_hi = 1.0;
    std::optional<std::pair<double, double>> exclusion;
};

inline RunSetup resolve_setup(const ConfigMap& cfg) {
    for (const auto& [key, value] : cfg.entries()) {
        bool known = false;
        for (const auto& k : detail::known_keys())
            if (k == key) { known = true; break; }
        if (!known) throw invalid_parameter("config: unknown key " + key);
    }

    RunSetup setup;
    const BenchmarkId id = benchmark_id_from_string(cfg.get_string("problem", "ex1"));
    const double delta = cfg.get_double("delta", 1.0);
    const double T = cfg.get_double("T", detail::default_horizon(id));
    setup.problem = benchmark_problem(id, delta, T);

    SolverConfig& c = setup.config;
    c.theta = cfg.get_double("scheme.theta", 0.5);
    c.n_steps = cfg.get_int("scheme.N", 16);
    c.value_jumps = cfg.get_int("scheme.M_y", 2);
    c.forcing_jumps = cfg.get_int("scheme.M_f", 1);
    const std::string weighting = cfg.get_string("scheme.weighting", "semigroup");
    if (weighting == "semigroup") c.weighting = JumpWeighting::semigroup_taylor;
    else if (weighting == "poisson") c.weighting = JumpWeighting::poisson_truncated;
    else throw invalid_parameter("config: unknown scheme.weighting " + weighting);

    const std::string family = cfg.get_string("quadrature.family",
                                              id == BenchmarkId::ex3 ? "trapezoid" : "auto");
    if (family == "auto") {
        c.family_auto = true;
    } else if (family == "gauss_legendre") {
        c.family_auto = false;
        c.family = QuadratureFamily::gauss_legendre;
    } else if (family == "gauss_jacobi_sqrt") {
        c.family_auto = false;
        c.family = QuadratureFamily::gauss_jacobi_sqrt;
    } else if (family == "trapezoid") {
        c.family_auto = false;
        c.family = QuadratureFamily::trapezoid;
    } else {
        throw invalid_parameter("config: unknown quadrature.family " + family);
    }
    c.quad_points = cfg.get_int("quadrature.Q", 16);
    c.trapezoid_spacing = cfg.get_double("quadrature.trap_spacing", 0.0);

    c.x_min = cfg.get_double("grid.x_min", 0.0);
    c.x_max = cfg.get_double("grid.x_max", 1.0);
    if (cfg.has("grid.dx")) {
        const double dx = cfg.get_double("grid.dx", 0.0);
        if (!(dx > 0.0)) throw invalid_parameter("config: grid.dx must be positive");
        const double span = c.x_max - c.x_min;
        c.n_x = static_cast<int>(std::lround(span / dx)) + 1;
        if (std::abs((c.n_x - 1) * dx - span) > 1e-9 * span)
            throw invalid_parameter("config: grid.dx does not tile [x_min, x_max]");
    } else {
        c.n_x = cfg.get_int("grid.N_x", 65);
    }
    c.order_p = cfg.get_int("grid.p", 3);

    c.adaptive = cfg.get_bool("adaptive.enabled", false);
    c.adaptive_tolerance = cfg.get_double("adaptive.tolerance", 1e-3);
    c.adaptive_max_level = cfg.get_int("adaptive.max_level", 12);

    c.fixed_point_tol = cfg.get_double("solver.fixed_point_tol", 1e-13);
    c.fixed_point_max_iter = cfg.get_int("solver.fixed_point_max_iter", 100);

    const std::string exterior = cfg.get_string("exterior", "exact_extension");
    if (exterior == "exact_extension") c.exterior = ExteriorMode::exact_extension;
    else if (exterior == "clamp_to_boundary") c.exterior = ExteriorMode::clamp_to_boundary;
    else if (exterior == "linear_extrapolation") c.exterior = ExteriorMode::linear_extrapolation;
    else throw invalid_parameter("config: unknown exterior " + exterior);

    const std::string threads = cfg.get_string("threads", "parallel");
    if (threads == "serial") c.threads = ThreadPolicy::serial;
    else if (threads == "parallel") c.threads = ThreadPolicy::parallel;
    else throw invalid_parameter("config: unknown threads " + threads);
    c.thread_count = cfg.get_int("threads.count", 0);
    if (const char* env = std::getenv("NLDIFF_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) {
            c.thread_count = n;
            c.threads = n == 1 ? ThreadPolicy::serial : ThreadPolicy::parallel;
        }
    }

    setup.seed = static_cast<std::uint64_t>(cfg.get_long("seed", 2024));
    setup.oracle_samples = cfg.get_long("oracle.samples", 1000000);
    setup.oracle_probes = cfg.get_list("oracle.probes", setup.oracle_probes);
    setup.sweep_values = cfg.get_list("sweep.values", {});

    const auto window = cfg.get_list("sweep.window", {0.0, 1.0});
    if (window.size() != 2) throw invalid_parameter("config: sweep.window needs lo,hi");
    setup.window_lo = window[0];
    setup.window_hi = window[1];
    const auto excl = cfg.get_list("sweep.exclusion", {});
    if (!excl.empty()) {
        if (excl.size() != 2) throw invalid_parameter("config: sweep.exclusion needs lo,hi");
        setup.exclusion = std::make_pair(excl[0], excl[1]);
    }
    return setup;
}

} // namespace nldiff
