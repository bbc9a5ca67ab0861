#pragma once

// Generalized Blumenthal–Getoor index from symbol evaluations, and the
// running-supremum growth diagnostic t^{-1/lambda} sup_{s<=t} |X_s - x|.

#include "psym/process.hpp"
#include "psym/simulate.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace psym {

using SymbolFn = std::function<std::complex<double>(double y, double xi)>;

/// max over y in window and eps in {-1, -1/2, 1/2, 1} of |symbol(y, eps / R)|.
/// Throws DomainError for R <= 0 and ValidationError for an empty window.
double h_of_r(const SymbolFn& symbol, std::span<const double> window, double R);

struct HSample {
    double R = 0.0;
    double H = 0.0;
};

/// H(R) over a list of R values.
std::vector<HSample> h_table(const SymbolFn& symbol, std::span<const double> window, std::span<const double> Rs);

/// R0, R0 q, ..., R0 q^(count-1).
std::vector<double> geometric_r_grid(double first, double ratio, std::size_t count);

struct Beta0Fit {
    double value = 0.0;  // infinity when H vanishes on the fitted tail
    double slope = 0.0;  // of log H against log R
    double residual = 0.0;  // RMS of the log-log fit residuals
    std::size_t tail_points = 0;

    bool infinite() const noexcept { return std::isinf(value); }
};

/// Least-squares slope of log H against log R over the largest-R half of the
/// samples (rounded up); value = max(0, -slope). Logs are taken relative to
/// the first tail sample, so rescaling H by a power of two is bit-exact.
/// Requires >= 8 samples with R geometric of ratio >= 2 and H >= 0.
Beta0Fit beta0(std::span<const HSample> samples);

enum class GrowthVerdict { decays, flat, grows };
std::string to_string(GrowthVerdict v);

/// grows if each of the last 3 values exceeds its predecessor by a factor
/// >= 1.1, decays if each is <= 0.9 times its predecessor (or all are 0),
/// else flat.
GrowthVerdict growth_verdict(std::span<const double> scaled_sups);

struct GrowthRow {
    double lambda = 0.0;
    double t = 0.0;
    double scaled_sup = 0.0;  // t^{-1/lambda} sup_{s<=t} |X_s - x|; median over paths for ensembles
};

struct GrowthTable {
    std::vector<GrowthRow> rows;  // lambda-major, t increasing
    std::vector<double> lambdas;
    std::vector<GrowthVerdict> verdicts;  // per lambda
};

struct GrowthOptions {
    double step = 1.0 / 64.0;  // sup is taken over a uniform grid of this step
    std::size_t n_paths = 1000;  // ignored for deterministic families
    std::uint64_t seed = 0;
    Parallelism parallel;
};

/// Deterministic families use one exact path. Random specs use n_paths
/// independent paths; the table holds the median scaled sup per (lambda, t)
/// and the verdict is the median of the per-path verdicts.
GrowthTable path_growth(const ProcessSpec& spec, double x, std::span<const double> lambdas,
                        std::span<const double> ts, const GrowthOptions& options = {});

/// Single-threaded reference for path_growth.
GrowthTable path_growth_serial(const ProcessSpec& spec, double x, std::span<const double> lambdas,
                               std::span<const double> ts, const GrowthOptions& options = {});

struct IndexReport {
    std::vector<HSample> samples;
    Beta0Fit fit;
    std::vector<double> window;
    GrowthTable growth;
};

/// beta0 is written as the string "infinity" when infinite.
nlohmann::json to_json(const IndexReport& report);

}  // namespace psym
