#pragma once

// Path samplers for every ProcessSpec kind, ensembles and exit times.
//
// Randomness for path i of an ensemble comes from PathRng(seed, i), so a path
// is a pure function of (spec, x0, grid, seed, i). Ensembles are generated in
// parallel with OpenMP; simulate_ensemble_serial is the reference loop.

#include "psym/process.hpp"
#include "psym/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace psym {

// A trajectory on a time grid. Samplers with exact jump placement add the jump
// times to the caller's grid.
struct PathSample {
    std::vector<double> times;
    std::vector<double> states;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    std::uint64_t spec_fingerprint = 0;
};

struct Parallelism {
    int threads = 0;  // 0: OpenMP default
};

/// Throws ValidationError unless the grid starts at 0 and strictly increases.
void validate_grid(std::span<const double> grid);

/// 0, step, 2 step, ... up to and including `end` (the last step may be short).
std::vector<double> uniform_grid(double end, double step);

/// Exact in law on the grid: Gaussian increments (mean path_drift()*dt, variance
/// Q*dt) and compound Poisson jumps at exponential arrival times, which are
/// inserted into the output grid.
PathSample simulate_levy(const LevyTriplet& triplet, double x0, std::span<const double> grid,
                         std::uint64_t seed, std::uint64_t path_index = 0);

/// Euler scheme with coefficients frozen at the left end of each step
/// (weak order 1). Jumps arriving within a step are applied at its end.
/// Throws ValidationError if a step exceeds char.max_dt and
/// std::runtime_error if Q(x) < 0 or a rate is negative along the path.
PathSample simulate_levy_type(const DiffChar& characteristics, double x0, std::span<const double> grid,
                              std::uint64_t seed, std::uint64_t path_index = 0);

/// The triplet's dynamics in operational time F(t): each step uses
/// F(t_{k+1}) - F(t_k) in place of dt. The identity clock reproduces
/// simulate_levy bit for bit.
PathSample simulate_clocked(const ClockedProcess& process, double x0, std::span<const double> grid,
                            std::uint64_t seed, std::uint64_t path_index = 0);

/// f_x evaluated on the grid.
PathSample sample_det_path(const DetFamily& family, double x0, std::span<const double> grid);

/// Dispatches on the spec kind.
PathSample simulate(const ProcessSpec& spec, double x0, std::span<const double> grid, std::uint64_t seed,
                    std::uint64_t path_index = 0);

std::vector<PathSample> simulate_ensemble(const ProcessSpec& spec, double x0, std::span<const double> grid,
                                          std::size_t n_paths, std::uint64_t seed, Parallelism par = {});
std::vector<PathSample> simulate_ensemble_serial(const ProcessSpec& spec, double x0,
                                                 std::span<const double> grid, std::size_t n_paths,
                                                 std::uint64_t seed);

struct ExitTime {
    std::size_t index;
    double time;
};

/// First grid point with |X - x| > k; nullopt if the path never leaves.
std::optional<ExitTime> first_exit_time(const PathSample& path, double x, double k);

/// X at min(exit time, last grid time).
double stopped_final_state(const PathSample& path, double x, double k);

}  // namespace psym
