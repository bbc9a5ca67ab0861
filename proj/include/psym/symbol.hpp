#pragma once

// Lévy–Khintchine evaluation and Monte Carlo estimation of the probabilistic
// symbol p(x, xi) = -lim_{t->0} E^x[(exp(i (X_{t ^ sigma} - x) xi) - 1) / t],
// sigma the first exit time from the ball of radius k around x.

#include "psym/process.hpp"
#include "psym/simulate.hpp"

#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace psym {

using Complex = std::complex<double>;

// chi(y) = 1 for |y| <= 1, 0 otherwise.
struct Cutoff {
    double radius = 1.0;
    double operator()(double y) const noexcept { return std::abs(y) <= radius ? 1.0 : 0.0; }
};

/// -i drift xi + Q xi^2 / 2 - sum_i rate_i E[e^{i xi Y_i} - 1 - i xi Y_i chi(Y_i)].
/// Constant and two-point jump laws are integrated in closed form, uniform
/// laws by composite Simpson with 10^4 subintervals split at the cutoff.
Complex lk_eval(const LevyTriplet& triplet, double xi, Cutoff chi = {});

/// lk_eval with the differential characteristics frozen at x.
Complex lk_eval_state(const DiffChar& characteristics, double x, double xi, Cutoff chi = {});

/// E[e^{i xi Y} - 1 - i xi Y chi(Y)] for one jump law.
Complex jump_integrand_mean(const JumpSize& size, double xi, Cutoff chi = {});

struct McOptions {
    double default_dt = 1e-3;  // grid step is min(default_dt, t / 16)
    double abs_tol = 1e-2;     // convergence floor; must cover the O(t) drift of the last 3 quotients
    double divergence_ratio = 1.2;
    Parallelism parallel;
};

struct QuotientSample {
    double t = 0.0;
    Complex value;      // -(mean of e^{i (X_t^sigma - x) xi} - 1) / t
    double se_re = 0.0;  // standard error of the mean, divided by t
    double se_im = 0.0;
    std::size_t n_paths = 0;

    double se() const noexcept { return std::hypot(se_re, se_im); }
};

/// Simulation grid for horizon t: uniform with step min(default_dt, t/16).
std::vector<double> quotient_grid(double t, double default_dt);

/// Stopped small-time quotient over n_paths independent paths from x. Paths
/// are accumulated in fixed-size chunks merged in index order, so the result
/// does not depend on the thread count. Deterministic families are evaluated
/// once with zero standard error.
QuotientSample mc_quotient(const ProcessSpec& spec, double x, double xi, double k, double t, std::size_t n_paths,
                           std::uint64_t seed, const McOptions& options = {});

/// Single-threaded reference for mc_quotient: one running accumulator over paths in
/// index order. Agrees with mc_quotient up to summation rounding.
QuotientSample mc_quotient_serial(const ProcessSpec& spec, double x, double xi, double k, double t,
                                  std::size_t n_paths, std::uint64_t seed, const McOptions& options = {});

enum class SymbolVerdict { converged, diverged, inconclusive };
std::string to_string(SymbolVerdict v);

struct SymbolEstimate {
    double x = 0.0;
    double xi = 0.0;
    double k = std::numeric_limits<double>::infinity();
    std::vector<QuotientSample> table;  // t strictly decreasing
    std::optional<Complex> value;       // present iff converged
    double value_se = 0.0;              // standard error of value
    SymbolVerdict verdict = SymbolVerdict::inconclusive;
    std::size_t total_paths = 0;
};

/// Verdict rules applied to a quotient table:
///  diverged   the last 4 |q| increase strictly, each by a factor >= divergence_ratio;
///  converged  the last 3 q pairwise differ by less than
///             max(abs_tol, 3 sqrt(se_i^2 + se_j^2)); the value is their
///             inverse-variance weighted mean (plain mean when any se is 0);
///  otherwise inconclusive.
void classify(SymbolEstimate& estimate, const McOptions& options = {});

/// t_0, t_0 r, ..., t_0 r^(count-1); requires t_0 > 0 and 0 < r < 1.
std::vector<double> time_schedule(double first, double ratio, std::size_t count);

/// mc_quotient at every scheduled t (independent seeds per level), then classify.
SymbolEstimate estimate_symbol(const ProcessSpec& spec, double x, double xi, double k,
                               std::span<const double> t_schedule, std::size_t n_paths, std::uint64_t seed,
                               const McOptions& options = {});

/// Exact quotients of a deterministic family (no sampling, zero standard
/// error). With a finite k the path is stopped on a 64-step grid over [0, t].
SymbolEstimate det_symbol(const DetFamily& family, double x, double xi, std::span<const double> t_schedule,
                          double k = std::numeric_limits<double>::infinity(), const McOptions& options = {});

struct KIndependenceReport {
    bool pass = false;
    std::vector<double> ks;
    std::vector<SymbolEstimate> estimates;
    std::vector<std::vector<double>> gaps;  // |value_i - value_j|, NaN if either did not converge
};

/// Agreement check over per-k estimates. All must be converged; values must
/// pairwise agree within 3 sqrt(value_se_i^2 + value_se_j^2), or exactly when
/// `exact` is set.
KIndependenceReport k_independence(std::vector<SymbolEstimate> estimates, bool exact);

/// Runs estimate_symbol (or det_symbol for deterministic families) per k; the
/// i-th k uses seed derive_seed(seed, i).
KIndependenceReport k_independence_check(const ProcessSpec& spec, double x, double xi, std::span<const double> ks,
                                         std::span<const double> t_schedule, std::size_t n_paths,
                                         std::uint64_t seed, const McOptions& options = {});

}  // namespace psym
