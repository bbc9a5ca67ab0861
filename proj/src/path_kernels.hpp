#pragma once

// Streaming path kernels shared by the PathSample samplers and the Monte
// Carlo estimators. A kernel pushes (time, state) pairs into a sink instead of
// materialising the path.

#include "psym/errors.hpp"
#include "psym/process.hpp"
#include "psym/rng.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <span>
#include <stdexcept>

#include <fmt/format.h>

namespace psym::detail {

class Draws {
public:
    Draws(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}

    double gaussian() { return normal_(rng_); }
    double exponential(double rate) { return std::exponential_distribution<double>(rate)(rng_); }
    double uniform(double hi) { return std::uniform_real_distribution<double>(0.0, hi)(rng_); }
    PathRng& engine() { return rng_; }

private:
    PathRng rng_;
    std::normal_distribution<double> normal_;
};

inline double pick_levy_jump(const LevyTriplet& triplet, double total_rate, Draws& draws) {
    double u = draws.uniform(total_rate);
    for (const auto& j : triplet.jumps) {
        if (u < j.rate) return j.size.sample(draws.engine());
        u -= j.rate;
    }
    // u landed on the rounding slack at the top end
    for (auto it = triplet.jumps.rbegin(); it != triplet.jumps.rend(); ++it) {
        if (it->rate > 0.0) return it->size.sample(draws.engine());
    }
    return 0.0;
}

// Lévy dynamics where grid interval k lasts op_increment(k, x, dt) units of
// operational time. Jump arrivals are mapped back to real time linearly
// within the interval and emitted as extra points when they fall strictly
// inside it.
template <class OpIncrement, class Sink>
void levy_kernel(const LevyTriplet& triplet, double x0, std::span<const double> grid, OpIncrement&& op_increment,
                 Draws& draws, Sink&& sink) {
    const double total = triplet.total_rate();
    const bool diffusive = triplet.diffusion > 0.0;
    const double slope = triplet.path_drift();
    auto advance = [&](double x, double ds) {
        x += slope * ds;
        if (diffusive) x += std::sqrt(triplet.diffusion * ds) * draws.gaussian();
        return x;
    };

    double x = x0;
    double last_time = grid[0];
    sink(grid[0], x);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double dt = grid[k + 1] - grid[k];
        const double op = op_increment(k, x, dt);
        double elapsed = 0.0;
        if (total > 0.0 && op > 0.0) {
            const double scale = dt / op;
            double tau = draws.exponential(total);
            while (tau < op) {
                x = advance(x, tau - elapsed);
                x += pick_levy_jump(triplet, total, draws);
                const double when = grid[k] + tau * scale;
                if (when > last_time && when < grid[k + 1]) {
                    sink(when, x);
                    last_time = when;
                }
                elapsed = tau;
                tau += draws.exponential(total);
            }
        }
        x = advance(x, op - elapsed);
        sink(grid[k + 1], x);
        last_time = grid[k + 1];
    }
}

// Euler scheme for differential characteristics, coefficients frozen per step.
template <class Sink>
void levy_type_kernel(const DiffChar& ch, double x0, std::span<const double> grid, Draws& draws, Sink&& sink) {
    double x = x0;
    sink(grid[0], x);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double dt = grid[k + 1] - grid[k];
        double drift = ch.drift(x);
        const double q = ch.diffusion(x);
        if (q < 0.0 || !std::isfinite(q)) {
            throw std::runtime_error(fmt::format("levy_type: Q(x) = {} < 0 at x = {}", q, x));
        }
        double total = 0.0;
        for (const auto& j : ch.jumps) {
            const double r = j.rate(x);
            if (r < 0.0 || !std::isfinite(r)) {
                throw std::runtime_error(fmt::format("levy_type: jump rate {} < 0 at x = {}", r, x));
            }
            total += r;
            if (r > 0.0) drift -= r * j.size.small_jump_mean();
        }
        double next = x + drift * dt;
        if (q > 0.0) next += std::sqrt(q * dt) * draws.gaussian();
        if (total > 0.0) {
            for (double tau = draws.exponential(total); tau < dt; tau += draws.exponential(total)) {
                double u = draws.uniform(total);
                const StateJump* chosen = nullptr;
                for (const auto& j : ch.jumps) {
                    const double r = j.rate(x);
                    if (r > 0.0) chosen = &j;
                    if (u < r) break;
                    u -= r;
                }
                next += chosen->size.sample(draws.engine());
            }
        }
        x = next;
        sink(grid[k + 1], x);
    }
}

// Collects the first exception thrown inside an OpenMP loop body.
class ExceptionSlot {
public:
    template <class F>
    void run(F&& f) noexcept {
        try {
            f();
        } catch (...) {
            std::lock_guard lock(mutex_);
            if (!error_) error_ = std::current_exception();
        }
    }

    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

private:
    std::mutex mutex_;
    std::exception_ptr error_;
};

}  // namespace psym::detail
