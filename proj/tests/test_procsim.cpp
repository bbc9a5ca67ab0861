#include "doctest.h"
#include "oracles.hpp"

#include "psym/errors.hpp"
#include "psym/process.hpp"
#include "psym/simulate.hpp"

#include <cmath>
#include <tuple>

using namespace psym;
using nlohmann::json;

namespace {

LevyTriplet brownian(double q = 1.0) { return {0.0, q, {}}; }

LevyTriplet poisson_plus_two() { return {0.0, 0.0, {{1.0, JumpSize::constant(2.0)}}}; }

std::vector<double> finals(const std::vector<PathSample>& paths) {
    std::vector<double> out;
    for (const auto& p : paths) out.push_back(p.states.back());
    return out;
}

std::pair<double, double> mean_var(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return {m, s / static_cast<double>(v.size() - 1)};
}

bool same_paths(const std::vector<PathSample>& a, const std::vector<PathSample>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].times != b[i].times || a[i].states != b[i].states) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("triplet validation names every bad field") {
    LevyTriplet t{0.0, -1.0, {{-2.0, JumpSize::constant(1.0)}}};
    try {
        t.validate();
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.problems().size() == 2);
    }
    CHECK_NOTHROW(brownian().validate());
    LevyTriplet bad_size{0.0, 0.0, {{1.0, JumpSize::uniform(1.0, 0.0)}}};
    CHECK_THROWS_AS(bad_size.validate(), ValidationError);
    LevyTriplet bad_p{0.0, 0.0, {{1.0, JumpSize::two_point(1.0, 2.0, 1.5)}}};
    CHECK_THROWS_AS(bad_p.validate(), ValidationError);
}

TEST_CASE("coefficients: polynomial and tabulated") {
    const auto p = Coefficient::polynomial({1.0, -2.0, 0.5});
    CHECK(p(2.0) == doctest::Approx(1.0 - 4.0 + 2.0));
    const auto t = Coefficient::tabulated({0.0, 1.0}, {2.0, 4.0});
    CHECK(t(0.5) == doctest::Approx(3.0));
    CHECK(t(-1.0) == 2.0);
    CHECK(t(5.0) == 4.0);
    CHECK(Coefficient{}.is_zero());
    CHECK_THROWS_AS(Coefficient::tabulated({0.0, 0.0}, {1.0, 1.0}), ValidationError);
}

TEST_CASE("deterministic families") {
    const DetFamily saw{DetFamily::Kind::sawtooth};
    CHECK(det_family_eval(saw, 0.0, 0.25) == 0.25);
    CHECK(det_family_eval(saw, 0.5, 0.75) == 0.25);
    CHECK(det_family_eval(saw, 2.5, 0.25) == 2.75);
    const DetFamily quad{DetFamily::Kind::quadratic};
    CHECK(det_family_eval(quad, 0.0, 1.0) == 1.0);
    CHECK(det_family_eval(quad, 0.0, 2.5) == 4.25);
    CHECK(det_family_eval(quad, 1.25, 0.5) == 4.0);  // tau = 1.5
    for (int n = 0; n <= 30; ++n) CHECK(det_family_eval(quad, 0.0, n) == static_cast<double>(n) * n);
    CHECK_THROWS_AS(det_family_eval(quad, 0.75, 0.1), DomainError);
    CHECK_THROWS_AS(det_family_eval(quad, -1.0, 0.1), DomainError);
    CHECK_THROWS_AS(det_family_eval(saw, 0.0, -0.1), DomainError);
    CHECK(on_orbit(quad, 4.25));
    CHECK_FALSE(on_orbit(quad, 4.5));
}

TEST_CASE("spec JSON round trip and fingerprints") {
    const std::vector<json> docs{
        json::parse(R"({"kind": "levy", "drift": 0.5, "Q": 2,
                        "jumps": [{"rate": 1, "size": 2}, {"rate": 0.5, "size": {"type": "uniform", "a": -1, "b": 3}},
                                  {"rate": 2, "size": {"type": "two_point", "a": -1, "b": 1, "p": 0.25}}]})"),
        json::parse(R"({"kind": "levy_type", "drift": {"poly": [0, -1]}, "Q": {"table": {"x": [0, 1], "y": [1, 2]}},
                        "jumps": [{"rate": 0.5, "size": 1}], "max_dt": 0.005})"),
        json::parse(R"({"kind": "clocked", "triplet": {"Q": 1}, "clock": {"type": "staircase", "function": "cantor"}})"),
        json::parse(R"({"kind": "clocked", "triplet": {"Q": 1}, "clock": {"type": "ac_of_state", "g": 2}})"),
        json::parse(R"({"kind": "det_family", "family": "quadratic"})"),
    };
    std::vector<std::uint64_t> prints;
    for (const auto& d : docs) {
        const auto spec = spec_from_json(d);
        const auto again = spec_from_json(to_json(spec));
        CHECK(to_json(again) == to_json(spec));
        CHECK(fingerprint(again) == fingerprint(spec));
        prints.push_back(fingerprint(spec));
    }
    std::sort(prints.begin(), prints.end());
    CHECK(std::unique(prints.begin(), prints.end()) == prints.end());
}

TEST_CASE("spec JSON errors carry key paths") {
    std::vector<std::string> errors;
    CHECK_FALSE(spec_from_json(json::parse(R"({"kind": "levy", "Q": -1})"), "spec", errors));
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].rfind("spec.Q:", 0) == 0);

    errors.clear();
    spec_from_json(json::parse(R"({"kind": "levy", "Q": 1, "bogus": 3, "jumps": [{"rate": -1, "size": 1}]})"),
                   "spec", errors);
    CHECK(errors.size() == 2);

    errors.clear();
    spec_from_json(json::parse(R"({"kind": "clocked", "triplet": {"Q": 1},
                                   "clock": {"type": "staircase", "function": "devil"}})"),
                   "spec", errors);
    CHECK(errors.size() == 1);
    CHECK_THROWS_AS(spec_from_json(json::parse(R"({"kind": "nope"})")), ValidationError);
}

TEST_CASE("grids") {
    const auto g = uniform_grid(1.0, 0.3);
    CHECK(g == std::vector<double>{0.0, 0.3, 0.6, 0.8999999999999999, 1.0});
    CHECK(uniform_grid(1.0, 0.25).size() == 5);
    CHECK_THROWS_AS(validate_grid(std::vector<double>{}), ValidationError);
    CHECK_THROWS_AS(validate_grid(std::vector<double>{0.1, 0.2}), ValidationError);
    CHECK_THROWS_AS(validate_grid(std::vector<double>{0.0, 0.2, 0.2}), ValidationError);
}

TEST_CASE("pure drift paths are deterministic lines") {
    const LevyTriplet drift{1.5, 0.0, {}};
    const auto grid = uniform_grid(1.0, 0.125);
    const auto path = simulate_levy(drift, 2.0, grid, 3);
    REQUIRE(path.states.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(path.states[i] == doctest::Approx(2.0 + 1.5 * grid[i]));
    CHECK(path.spec_fingerprint == fingerprint(ProcessSpec{drift}));
}

TEST_CASE("Brownian marginals match N(x0, Q t)") {
    const std::size_t n = 20000;
    const auto grid = uniform_grid(1.0, 0.05);
    const auto [m, v] = mean_var(finals(simulate_ensemble(brownian(2.0), 1.0, grid, n, 5)));
    CHECK(std::abs(m - 1.0) <= 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(v - 2.0) <= 5.0 * 2.0 * std::sqrt(2.0 / n));
}

TEST_CASE("compound Poisson: jump times enter the grid and counts are Poisson") {
    const std::size_t n = 20000;
    const auto grid = uniform_grid(1.0, 0.5);
    const auto paths = simulate_ensemble(poisson_plus_two(), 0.0, grid, n, 6);
    std::size_t zero = 0;
    double mean = 0.0;
    for (const auto& p : paths) {
        const double jumps = p.states.back() / 2.0;
        CHECK(jumps == std::floor(jumps));
        CHECK(p.times.size() >= grid.size());
        CHECK(p.times.size() <= grid.size() + static_cast<std::size_t>(jumps));
        if (jumps == 0.0) ++zero;
        mean += jumps;
    }
    mean /= n;
    const double p0 = std::exp(-1.0);
    CHECK(std::abs(static_cast<double>(zero) / n - p0) <= 5.0 * std::sqrt(p0 * (1 - p0) / n));
    CHECK(std::abs(mean - 1.0) <= 5.0 * std::sqrt(1.0 / n));
}

TEST_CASE("ensembles are bit-identical across thread counts and to the serial loop") {
    const auto spec = ProcessSpec{LevyTriplet{0.3, 1.0, {{2.0, JumpSize::uniform(-1.0, 1.0)}}}};
    const auto grid = uniform_grid(0.5, 0.01);
    const auto serial = simulate_ensemble_serial(spec, 0.0, grid, 200, 9);
    for (int threads : {1, 2, 3, 4}) CHECK(same_paths(simulate_ensemble(spec, 0.0, grid, 200, 9, {threads}), serial));
    CHECK_FALSE(same_paths(simulate_ensemble(spec, 0.0, grid, 200, 10), serial));
}

TEST_CASE("identity clock reproduces simulate_levy bit for bit") {
    const LevyTriplet t{0.2, 1.0, {{1.0, JumpSize::two_point(-1.0, 2.0, 0.5)}}};
    const auto grid = uniform_grid(1.0, 0.01);
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto a = simulate_levy(t, 0.5, grid, 4, i);
        const auto b = simulate_clocked({t, ClockSpec::identity()}, 0.5, grid, 4, i);
        CHECK(a.times == b.times);
        CHECK(a.states == b.states);
    }
}

TEST_CASE("unit-rate absolutely continuous clock matches the unclocked law (KS)") {
    const std::size_t n = 10000;
    const LevyTriplet t{0.0, 1.0, {{1.0, JumpSize::constant(0.5)}}};
    const auto grid = uniform_grid(1.0, 0.05);
    const auto a = finals(simulate_ensemble(ProcessSpec{t}, 0.0, grid, n, 100));
    const auto b = finals(simulate_ensemble(
        ProcessSpec{ClockedProcess{t, ClockSpec::ac_of_state(Coefficient::constant(1.0))}}, 0.0, grid, n, 200));
    CHECK(oracle::ks_statistic(a, b) < oracle::ks_critical(n, n, 1e-3));
}

TEST_CASE("rate-2 clock doubles the Brownian variance") {
    const std::size_t n = 20000;
    const auto grid = uniform_grid(1.0, 0.05);
    const auto spec = ProcessSpec{ClockedProcess{brownian(), ClockSpec::ac_of_state(Coefficient::constant(2.0))}};
    const auto [m, v] = mean_var(finals(simulate_ensemble(spec, 0.0, grid, n, 7)));
    CHECK(std::abs(m) <= 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(v - 2.0) <= 5.0 * 2.0 * std::sqrt(2.0 / n));
}

TEST_CASE("Cantor clock: X_t ~ N(0, C(t))") {
    const std::size_t n = 20000;
    const auto grid = uniform_grid(0.25, 1.0 / 64.0);
    const auto spec = ProcessSpec{ClockedProcess{brownian(), ClockSpec::deterministic(StaircaseFunction::cantor())}};
    const auto paths = simulate_ensemble(spec, 0.0, grid, n, 8);
    const auto [m, v] = mean_var(finals(paths));
    const double var = 1.0 / 3.0;  // C(1/4)
    CHECK(std::abs(m) <= 5.0 * std::sqrt(var / n));
    CHECK(std::abs(v - var) <= 5.0 * var * std::sqrt(2.0 / n));
    // The clock is flat on [1/9, 2/9] (a removed middle third at the second level).
    for (std::size_t i = 0; i < 50; ++i) {
        const auto& p = paths[i];
        for (std::size_t k = 0; k + 1 < p.times.size(); ++k) {
            if (p.times[k] >= 1.0 / 9.0 + 1e-12 && p.times[k + 1] <= 2.0 / 9.0) CHECK(p.states[k + 1] == p.states[k]);
        }
    }
}

TEST_CASE("clock checks") {
    const auto grid = uniform_grid(1.0, 0.1);
    const auto neg = ClockedProcess{brownian(), ClockSpec::ac_of_state(Coefficient::polynomial({-1.0}))};
    CHECK_THROWS_AS(simulate_clocked(neg, 0.0, grid, 1), ValidationError);
    const auto dec = ClockedProcess{brownian(), ClockSpec::deterministic(StaircaseFunction::sampled({0.0, 2.0}, {0.0, 1.0}))};
    CHECK_NOTHROW(simulate_clocked(dec, 0.0, grid, 1));
    CHECK_THROWS_AS(simulate_clocked(dec, 0.0, uniform_grid(3.0, 0.1), 1), DomainError);
}

TEST_CASE("Ornstein-Uhlenbeck Euler scheme matches the exact moments") {
    const std::size_t n = 20000;
    DiffChar ou;
    ou.drift = Coefficient::polynomial({0.0, -1.0});
    ou.diffusion = Coefficient::constant(1.0);
    const auto grid = uniform_grid(1.0, 0.01);
    const auto [m, v] = mean_var(finals(simulate_ensemble(ou, 1.0, grid, n, 12)));
    const double exact_m = std::exp(-1.0);
    const double exact_v = 0.5 * (1.0 - std::exp(-2.0));
    // Euler bias is O(dt) = 1e-2 relative.
    CHECK(std::abs(m - exact_m) <= 5.0 * std::sqrt(exact_v / n) + 0.01 * exact_m);
    CHECK(std::abs(v - exact_v) <= 5.0 * exact_v * std::sqrt(2.0 / n) + 0.01 * exact_v);
}

TEST_CASE("Levy-type checks") {
    DiffChar c;
    c.diffusion = Coefficient::polynomial({1.0, -1.0});  // Q(x) = 1 - x
    CHECK_THROWS_AS(simulate_levy_type(c, 0.0, uniform_grid(1.0, 0.02), 1), ValidationError);  // step > max_dt
    CHECK_THROWS_AS(simulate_levy_type(c, 2.0, uniform_grid(0.1, 0.01), 1), std::runtime_error);
    DiffChar jumps;
    jumps.jumps.push_back({Coefficient::polynomial({0.0, 1.0}), JumpSize::constant(1.0)});  // rate x
    CHECK_THROWS_AS(simulate_levy_type(jumps, -1.0, uniform_grid(0.1, 0.01), 1), std::runtime_error);
    const auto p = simulate_levy_type(jumps, 0.0, uniform_grid(0.1, 0.01), 1);  // zero rate: no jumps
    for (double x : p.states) CHECK(x == 0.0);
}

TEST_CASE("jumps inside the unit ball are compensated") {
    const std::size_t n = 20000;
    DiffChar c;
    c.jumps.push_back({Coefficient::constant(2.0), JumpSize::constant(1.0)});
    auto [m, v] = mean_var(finals(simulate_ensemble(c, 0.0, uniform_grid(1.0, 0.01), n, 13)));
    CHECK(std::abs(m) <= 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(v - 2.0) <= 5.0 * 2.0 * std::sqrt(2.0 / n));

    // Uniform(-0.5, 1.5): E[Y 1{|Y| <= 1}] = (1 - 0.25) / 2 / 2 = 0.1875, E[Y] = 0.5.
    const LevyTriplet t{0.0, 0.0, {{4.0, JumpSize::uniform(-0.5, 1.5)}}};
    CHECK(t.jumps[0].size.small_jump_mean() == 0.1875);
    CHECK(t.path_drift() == -0.75);
    std::tie(m, v) = mean_var(finals(simulate_ensemble(ProcessSpec{t}, 0.0, uniform_grid(1.0, 0.1), n, 14)));
    const double second = (1.5 * 1.5 * 1.5 + 0.125) / 3.0 / 2.0;  // E[Y^2]
    CHECK(std::abs(m - 4.0 * (0.5 - 0.1875)) <= 5.0 * std::sqrt(4.0 * second / n));
    CHECK(std::abs(v - 4.0 * second) <= 0.05 * 4.0 * second);
    CHECK(JumpSize::two_point(-2.0, 0.5, 0.25).small_jump_mean() == 0.375);
    CHECK(JumpSize::constant(-1.0).small_jump_mean() == -1.0);
    CHECK(JumpSize::constant(1.5).small_jump_mean() == 0.0);
}

TEST_CASE("first exit time uses a strict inequality") {
    PathSample p;
    p.times = {0.0, 1.0, 2.0, 3.0};
    p.states = {0.0, 1.0, -1.5, 0.0};
    CHECK_FALSE(first_exit_time(p, 0.0, 1.5));
    const auto e = first_exit_time(p, 0.0, 1.0);
    REQUIRE(e);
    CHECK(e->index == 2);
    CHECK(e->time == 2.0);
    CHECK(stopped_final_state(p, 0.0, 1.0) == -1.5);
    CHECK(stopped_final_state(p, 0.0, 2.0) == 0.0);
    CHECK_THROWS_AS(first_exit_time(p, 0.0, 0.0), ValidationError);
}

TEST_CASE("sample_det_path evaluates the family on the grid") {
    const auto grid = uniform_grid(3.0, 0.5);
    const auto p = sample_det_path({DetFamily::Kind::quadratic}, 0.0, grid);
    CHECK(p.states == std::vector<double>{0.0, 0.25, 1.0, 1.25, 4.0, 4.25, 9.0});
}
