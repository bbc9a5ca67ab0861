#pragma once

// Experiment runner and built-in presets.
//
// Every experiment writes its data files plus manifest.json and plot.py into
// the output directory. Data files depend only on the config, so reruns are
// byte-identical; the manifest additionally records the wall time.

#include "psym/config.hpp"
#include "psym/indices.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace psym {

inline constexpr const char* kVersion = "0.1.0";

struct RunResult {
    std::filesystem::path output_dir;
    std::vector<std::string> files;  // data files, relative to output_dir
    nlohmann::json summary;
};

/// Runs the experiment and writes its outputs. Exceptions from the module
/// operations propagate unchanged.
RunResult run_experiment(const ExperimentConfig& config);

/// Symbol used by the indices experiment: exact for deterministic families,
/// the Lévy–Khintchine exponent for Lévy, Lévy-type and absolutely continuous
/// clocks. Throws std::runtime_error for staircase clocks, which have none.
SymbolFn symbol_function(const ProcessSpec& spec, const ExperimentParams& params);

/// State window of the indices experiment. A {lo, hi, count} window is
/// equispaced; for the quadratic family its points are orbit parameters tau
/// and are mapped to the orbit states f_0(tau).
std::vector<double> state_window(const ProcessSpec& spec, const ExperimentParams& params);

struct Preset {
    std::string name;
    std::string description;
    std::string config;  // JSON text
};

const std::vector<Preset>& presets();
const Preset* find_preset(std::string_view name);

}  // namespace psym
