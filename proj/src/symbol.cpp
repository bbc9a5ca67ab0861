#include "psym/symbol.hpp"

#include "psym/errors.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace psym {

namespace {

constexpr std::size_t kQuadratureIntervals = 10000;

// e^{i xi y} - 1 - i xi y chi(y), with the real part written as -2 sin^2
// to keep small arguments accurate.
Complex compensated_exponential(double xi, double y, const Cutoff& chi) {
    const double half = std::sin(0.5 * xi * y);
    return {-2.0 * half * half, std::sin(xi * y) - xi * y * chi(y)};
}

// Composite Simpson on [lo, hi] with an even number of subintervals.
Complex simpson(double lo, double hi, std::size_t intervals, double xi, const Cutoff& chi) {
    if (intervals % 2 == 1) ++intervals;
    const double h = (hi - lo) / static_cast<double>(intervals);
    // chi is evaluated from the interior side at the ends of each piece.
    const double mid = 0.5 * (lo + hi);
    auto f = [&](std::size_t i) {
        const double y = i == intervals ? hi : lo + h * static_cast<double>(i);
        const double half = std::sin(0.5 * xi * y);
        return Complex{-2.0 * half * half, std::sin(xi * y) - xi * y * chi(mid)};
    };
    Complex sum = f(0) + f(intervals);
    for (std::size_t i = 1; i < intervals; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(i);
    return sum * (h / 3.0);
}

Complex uniform_mean(double a, double b, double xi, const Cutoff& chi) {
    // chi is piecewise constant with breaks at +-radius.
    std::vector<double> cuts{a};
    for (double c : {-chi.radius, chi.radius}) {
        if (c > a && c < b) cuts.push_back(c);
    }
    cuts.push_back(b);
    Complex total{0.0, 0.0};
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double width = cuts[i + 1] - cuts[i];
        const auto n = std::max<std::size_t>(
            2, static_cast<std::size_t>(std::ceil(static_cast<double>(kQuadratureIntervals) * width / (b - a))));
        total += simpson(cuts[i], cuts[i + 1], n, xi, chi);
    }
    return total / (b - a);
}

// Values for xi < 0 are conjugates of those at -xi.
template <class F>
Complex hermitian(double xi, F&& at_nonnegative) {
    if (xi < 0.0) return std::conj(at_nonnegative(-xi));
    return at_nonnegative(xi);
}

}  // namespace

Complex jump_integrand_mean(const JumpSize& size, double xi, Cutoff chi) {
    return hermitian(xi, [&](double w) -> Complex {
        switch (size.kind) {
            case JumpSize::Kind::constant:
                return compensated_exponential(w, size.a, chi);
            case JumpSize::Kind::two_point:
                return size.p * compensated_exponential(w, size.a, chi) +
                       (1.0 - size.p) * compensated_exponential(w, size.b, chi);
            case JumpSize::Kind::uniform:
                return uniform_mean(size.a, size.b, w, chi);
        }
        return {};
    });
}

Complex lk_eval(const LevyTriplet& triplet, double xi, Cutoff chi) {
    triplet.validate();
    return hermitian(xi, [&](double w) {
        Complex q{0.5 * w * w * triplet.diffusion, -triplet.drift * w};
        for (const auto& j : triplet.jumps) q -= j.rate * jump_integrand_mean(j.size, w, chi);
        return q;
    });
}

Complex lk_eval_state(const DiffChar& characteristics, double x, double xi, Cutoff chi) {
    LevyTriplet frozen;
    frozen.drift = characteristics.drift(x);
    frozen.diffusion = characteristics.diffusion(x);
    for (const auto& j : characteristics.jumps) frozen.jumps.push_back({j.rate(x), j.size});
    return lk_eval(frozen, xi, chi);
}

// ---------------------------------------------------------------------------

std::string to_string(SymbolVerdict v) {
    switch (v) {
        case SymbolVerdict::converged:
            return "converged";
        case SymbolVerdict::diverged:
            return "diverged";
        case SymbolVerdict::inconclusive:
            return "inconclusive";
    }
    return {};
}

void classify(SymbolEstimate& estimate, const McOptions& options) {
    estimate.value.reset();
    estimate.value_se = 0.0;
    estimate.verdict = SymbolVerdict::inconclusive;
    const auto& table = estimate.table;
    const std::size_t n = table.size();

    if (n >= 4) {
        bool growing = true;
        for (std::size_t i = n - 3; i < n; ++i) {
            const double prev = std::abs(table[i - 1].value);
            const double cur = std::abs(table[i].value);
            if (!(cur > prev && cur >= options.divergence_ratio * prev)) {
                growing = false;
                break;
            }
        }
        if (growing) {
            estimate.verdict = SymbolVerdict::diverged;
            return;
        }
    }
    if (n < 3) return;

    const auto tail = std::span(table).last(3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = i + 1; j < 3; ++j) {
            const double pooled = std::hypot(tail[i].se(), tail[j].se());
            if (!(std::abs(tail[i].value - tail[j].value) < std::max(options.abs_tol, 3.0 * pooled))) return;
        }
    }
    const bool weighted = std::all_of(tail.begin(), tail.end(), [](const auto& q) { return q.se() > 0.0; });
    Complex sum{0.0, 0.0};
    double weights = 0.0;
    for (const auto& q : tail) {
        const double w = weighted ? 1.0 / (q.se() * q.se()) : 1.0;
        sum += w * q.value;
        weights += w;
    }
    estimate.value = sum / weights;
    estimate.value_se = weighted ? 1.0 / std::sqrt(weights) : 0.0;
    estimate.verdict = SymbolVerdict::converged;
}

std::vector<double> time_schedule(double first, double ratio, std::size_t count) {
    if (!(first > 0.0)) throw ValidationError(fmt::format("t schedule: first time must be > 0 (got {})", first));
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw ValidationError(fmt::format("t schedule: schedule must decrease (ratio {} not in (0,1))", ratio));
    }
    if (count == 0) throw ValidationError("t schedule: count must be >= 1");
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(first * std::pow(ratio, static_cast<double>(i)));
    return out;
}

namespace {

void check_schedule(std::span<const double> ts) {
    if (ts.empty()) throw ValidationError("t schedule is empty");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!(ts[i] > 0.0)) throw DomainError(fmt::format("t schedule: t = {} must be > 0", ts[i]));
        if (i > 0 && !(ts[i] < ts[i - 1])) throw ValidationError("t schedule: schedule must decrease");
    }
}

}  // namespace

SymbolEstimate estimate_symbol(const ProcessSpec& spec, double x, double xi, double k,
                               std::span<const double> t_schedule, std::size_t n_paths, std::uint64_t seed,
                               const McOptions& options) {
    check_schedule(t_schedule);
    if (n_paths < 1000) throw ValidationError(fmt::format("estimate_symbol: n_paths must be >= 1000 (got {})", n_paths));
    SymbolEstimate est;
    est.x = x;
    est.xi = xi;
    est.k = k;
    for (std::size_t level = 0; level < t_schedule.size(); ++level) {
        auto q = mc_quotient(spec, x, xi, k, t_schedule[level], n_paths, derive_seed(seed, level), options);
        est.total_paths += q.n_paths;
        est.table.push_back(q);
    }
    classify(est, options);
    return est;
}

SymbolEstimate det_symbol(const DetFamily& family, double x, double xi, std::span<const double> t_schedule,
                          double k, const McOptions& options) {
    check_schedule(t_schedule);
    if (!(k > 0.0)) throw ValidationError(fmt::format("exit radius must be > 0 (got {})", k));
    SymbolEstimate est;
    est.x = x;
    est.xi = xi;
    est.k = k;
    for (double t : t_schedule) {
        double state = 0.0;
        if (std::isinf(k)) {
            state = det_family_eval(family, x, t);
        } else {
            const auto grid = uniform_grid(t, t / 64.0);
            state = stopped_final_state(sample_det_path(family, x, grid), x, k);
        }
        const double delta = state - x;
        const double half = std::sin(0.5 * delta * xi);
        est.table.push_back({t, Complex{2.0 * half * half / t, -std::sin(delta * xi) / t}, 0.0, 0.0, 1});
        est.total_paths += 1;
    }
    classify(est, options);
    return est;
}

KIndependenceReport k_independence(std::vector<SymbolEstimate> estimates, bool exact) {
    KIndependenceReport report;
    const std::size_t n = estimates.size();
    report.pass = n > 0;
    report.gaps.assign(n, std::vector<double>(n, std::numeric_limits<double>::quiet_NaN()));
    for (const auto& e : estimates) {
        report.ks.push_back(e.k);
        if (e.verdict != SymbolVerdict::converged) report.pass = false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!estimates[i].value || !estimates[j].value) continue;
            const double gap = std::abs(*estimates[i].value - *estimates[j].value);
            report.gaps[i][j] = gap;
            const bool agree = exact ? gap == 0.0 : gap <= 3.0 * std::hypot(estimates[i].value_se, estimates[j].value_se);
            if (!agree) report.pass = false;
        }
    }
    report.estimates = std::move(estimates);
    return report;
}

KIndependenceReport k_independence_check(const ProcessSpec& spec, double x, double xi, std::span<const double> ks,
                                         std::span<const double> t_schedule, std::size_t n_paths,
                                         std::uint64_t seed, const McOptions& options) {
    if (ks.empty()) throw ValidationError("k list is empty");
    std::vector<SymbolEstimate> estimates;
    const auto* family = std::get_if<DetFamily>(&spec);
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double k = ks[i];
        if (!(k > 0.0)) throw ValidationError(fmt::format("exit radius must be > 0 (got {})", k));
        estimates.push_back(family != nullptr ? det_symbol(*family, x, xi, t_schedule, k, options)
                                              : estimate_symbol(spec, x, xi, k, t_schedule, n_paths,
                                                                derive_seed(seed, i), options));
    }
    return k_independence(std::move(estimates), family != nullptr);
}

}  // namespace psym
