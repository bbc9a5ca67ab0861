#include "psym/simulate.hpp"

#include "path_kernels.hpp"

#include <cmath>

#include <omp.h>

namespace psym {

using detail::Draws;

void validate_grid(std::span<const double> grid) {
    if (grid.empty()) throw ValidationError("time grid is empty");
    if (grid[0] != 0.0) throw ValidationError(fmt::format("time grid must start at 0 (got {})", grid[0]));
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1]) || !std::isfinite(grid[i])) {
            throw ValidationError(fmt::format("time grid not strictly increasing at index {}", i));
        }
    }
}

std::vector<double> uniform_grid(double end, double step) {
    if (!(end > 0.0) || !(step > 0.0)) throw ValidationError("uniform_grid: end and step must be > 0");
    const auto n = static_cast<std::size_t>(std::ceil(end / step - 1e-9));
    std::vector<double> grid;
    grid.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) grid.push_back(static_cast<double>(i) * step);
    grid.push_back(end);
    return grid;
}

namespace {

struct PathSink {
    PathSample& path;
    void operator()(double t, double x) const {
        path.times.push_back(t);
        path.states.push_back(x);
    }
};

PathSample make_path(std::size_t reserve, std::uint64_t seed, std::uint64_t index, std::uint64_t fp) {
    PathSample p;
    p.times.reserve(reserve);
    p.states.reserve(reserve);
    p.seed = seed;
    p.path_index = index;
    p.spec_fingerprint = fp;
    return p;
}

// F(t_k) on the grid for a deterministic clock, checked to be nondecreasing.
std::vector<double> clock_values(const StaircaseFunction& f, std::span<const double> grid) {
    std::vector<double> values(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        values[k] = f(grid[k]);
        if (k > 0 && values[k] < values[k - 1]) {
            throw ValidationError(fmt::format("clock decreases between t = {} and t = {}", grid[k - 1], grid[k]));
        }
    }
    return values;
}

}  // namespace

PathSample simulate_levy(const LevyTriplet& triplet, double x0, std::span<const double> grid, std::uint64_t seed,
                         std::uint64_t path_index) {
    triplet.validate();
    validate_grid(grid);
    auto path = make_path(grid.size(), seed, path_index, fingerprint(ProcessSpec{triplet}));
    Draws draws(seed, path_index);
    detail::levy_kernel(triplet, x0, grid, [](std::size_t, double, double dt) { return dt; }, draws,
                        PathSink{path});
    return path;
}

PathSample simulate_levy_type(const DiffChar& characteristics, double x0, std::span<const double> grid,
                              std::uint64_t seed, std::uint64_t path_index) {
    characteristics.validate();
    validate_grid(grid);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (grid[k] - grid[k - 1] > characteristics.max_dt * (1.0 + 1e-12)) {
            throw ValidationError(fmt::format("levy_type: step {} exceeds max_dt {}", grid[k] - grid[k - 1],
                                              characteristics.max_dt));
        }
    }
    auto path = make_path(grid.size(), seed, path_index, fingerprint(ProcessSpec{characteristics}));
    Draws draws(seed, path_index);
    detail::levy_type_kernel(characteristics, x0, grid, draws, PathSink{path});
    return path;
}

PathSample simulate_clocked(const ClockedProcess& process, double x0, std::span<const double> grid,
                            std::uint64_t seed, std::uint64_t path_index) {
    validate(ProcessSpec{process});
    validate_grid(grid);
    auto path = make_path(grid.size(), seed, path_index, fingerprint(ProcessSpec{process}));
    Draws draws(seed, path_index);
    switch (process.clock.kind) {
        case ClockSpec::Kind::identity:
            detail::levy_kernel(process.triplet, x0, grid, [](std::size_t, double, double dt) { return dt; },
                                draws, PathSink{path});
            break;
        case ClockSpec::Kind::staircase: {
            const auto values = clock_values(*process.clock.staircase, grid);
            detail::levy_kernel(
                process.triplet, x0, grid,
                [&](std::size_t k, double, double) { return values[k + 1] - values[k]; }, draws, PathSink{path});
            break;
        }
        case ClockSpec::Kind::ac_of_state: {
            const Coefficient& g = process.clock.rate;
            detail::levy_kernel(
                process.triplet, x0, grid,
                [&](std::size_t, double x, double dt) {
                    const double rate = g(x);
                    if (rate < 0.0 || !std::isfinite(rate)) {
                        throw ValidationError(fmt::format("clock rate g(x) = {} < 0 at x = {}", rate, x));
                    }
                    return rate * dt;
                },
                draws, PathSink{path});
            break;
        }
    }
    return path;
}

PathSample sample_det_path(const DetFamily& family, double x0, std::span<const double> grid) {
    validate_grid(grid);
    auto path = make_path(grid.size(), 0, 0, fingerprint(ProcessSpec{family}));
    for (double t : grid) PathSink{path}(t, det_family_eval(family, x0, t));
    return path;
}

PathSample simulate(const ProcessSpec& spec, double x0, std::span<const double> grid, std::uint64_t seed,
                    std::uint64_t path_index) {
    return std::visit(
        [&](const auto& s) -> PathSample {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LevyTriplet>) {
                return simulate_levy(s, x0, grid, seed, path_index);
            } else if constexpr (std::is_same_v<T, DiffChar>) {
                return simulate_levy_type(s, x0, grid, seed, path_index);
            } else if constexpr (std::is_same_v<T, ClockedProcess>) {
                return simulate_clocked(s, x0, grid, seed, path_index);
            } else {
                return sample_det_path(s, x0, grid);
            }
        },
        spec);
}

std::vector<PathSample> simulate_ensemble(const ProcessSpec& spec, double x0, std::span<const double> grid,
                                          std::size_t n_paths, std::uint64_t seed, Parallelism par) {
    validate(spec);
    validate_grid(grid);
    std::vector<PathSample> paths(n_paths);
    detail::ExceptionSlot slot;
    const int threads = par.threads > 0 ? par.threads : omp_get_max_threads();
    const auto n = static_cast<std::int64_t>(n_paths);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) {
        slot.run([&] { paths[i] = simulate(spec, x0, grid, seed, static_cast<std::uint64_t>(i)); });
    }
    slot.rethrow();
    return paths;
}

std::vector<PathSample> simulate_ensemble_serial(const ProcessSpec& spec, double x0, std::span<const double> grid,
                                                 std::size_t n_paths, std::uint64_t seed) {
    std::vector<PathSample> paths;
    paths.reserve(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) paths.push_back(simulate(spec, x0, grid, seed, i));
    return paths;
}

std::optional<ExitTime> first_exit_time(const PathSample& path, double x, double k) {
    if (!(k > 0.0)) throw ValidationError(fmt::format("exit radius must be > 0 (got {})", k));
    for (std::size_t i = 0; i < path.states.size(); ++i) {
        if (std::abs(path.states[i] - x) > k) return ExitTime{i, path.times[i]};
    }
    return std::nullopt;
}

double stopped_final_state(const PathSample& path, double x, double k) {
    const auto exit = first_exit_time(path, x, k);
    return exit ? path.states[exit->index] : path.states.back();
}

}  // namespace psym
