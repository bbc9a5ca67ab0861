#pragma once

// Versioned JSON experiment configuration.
//
//   {"schema_version": 1, "experiment": "<kind>", "seed": N,
//    "spec": {...}, "params": {...}, "output_dir": "out"}
//
// "spec" uses the process JSON form (see process.hpp) and is required for the
// symbol, det_symbol, indices and homogeneity experiments. Unknown keys are
// errors, and all problems are collected before reporting. Missing params take
// the defaults below; to_json writes every field back out.

#include "psym/process.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace psym {

inline constexpr int kSchemaVersion = 1;

enum class ExperimentKind { symbol, det_symbol, indices, singular, decompose, homogeneity };
std::string to_string(ExperimentKind kind);

// t0, t0 r, ..., t0 r^(count-1)
struct ScheduleParams {
    double first = 0.1;
    double ratio = 0.5;
    std::size_t count = 8;
};

// lo, lo + 1/den, ..., hi; or orbit points of the quadratic family when
// orbit_m_max is set; or an explicit list.
struct GridParams {
    std::vector<double> values;
    double lo = 0.0;
    double hi = 1.0;
    int denominator = 8;
    std::optional<int> orbit_m_max;
    bool explicit_list = false;

    std::vector<double> points() const;
};

struct ExperimentParams {
    // symbol, det_symbol
    std::vector<double> xs{0.0};
    std::vector<double> xis{1.0};
    std::vector<double> ks;  // empty: k = 10 for symbol, no stopping for det_symbol
    ScheduleParams t_schedule;
    std::size_t n_paths = 10000;
    double dt = 1e-3;
    double abs_tol = 1e-2;
    double divergence_ratio = 1.2;
    std::size_t plot_paths = 5;
    double path_horizon = 5.0;

    // indices
    std::vector<double> window;  // empty: 41 points from window_lo..window_hi
    double window_lo = 0.0;
    double window_hi = 5.0;
    std::size_t window_count = 41;
    ScheduleParams r_grid{10.0, 2.0, 11};
    std::vector<double> lambdas{0.9};
    std::vector<double> growth_times{10.0, 100.0, 1000.0};
    double growth_step = 1.0 / 64.0;

    // singular, decompose
    nlohmann::json function = "cantor";  // staircase JSON form, see process.hpp
    std::vector<double> points{0.0};
    std::vector<std::string> sides{"right"};
    std::string envelope = "upper";
    ScheduleParams h_schedule{1.0 / 3.0, 1.0 / 3.0, 12};
    double scan_lo = 0.0;
    double scan_hi = 1.0;
    std::size_t scan_resolution = 729;
    double threshold = 50.0;
    double lo = 0.0;
    double hi = 1.0;
    double step = 1.0 / 6561.0;
    double cap = 10.0;
    std::size_t median_window = 5;

    // homogeneity
    GridParams starts;
    GridParams times;
    GridParams shifts;
    double tol = 1e-12;

    int threads = 0;
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    ExperimentKind kind = ExperimentKind::symbol;
    std::uint64_t seed = 0;
    std::optional<ProcessSpec> spec;
    ExperimentParams params;
    std::string output_dir = "out";
};

/// Parses and validates a config document. Throws ValidationError carrying
/// every problem; a syntax error reports its line and column.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig parse_config_json(const nlohmann::json& doc);

/// Canonical form with all defaults filled in.
nlohmann::json to_json(const ExperimentConfig& config);

/// FNV-1a of the canonical dump without output_dir, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace psym
