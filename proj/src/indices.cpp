#include "psym/indices.hpp"

#include "path_kernels.hpp"
#include "psym/errors.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <omp.h>

namespace psym {

double h_of_r(const SymbolFn& symbol, std::span<const double> window, double R) {
    if (!(R > 0.0)) throw DomainError(fmt::format("H(R): R must be > 0 (got {})", R));
    if (window.empty()) throw ValidationError("H(R): state window is empty");
    double h = 0.0;
    for (double y : window) {
        for (double eps : {-1.0, -0.5, 0.5, 1.0}) h = std::max(h, std::abs(symbol(y, eps / R)));
    }
    return h;
}

std::vector<HSample> h_table(const SymbolFn& symbol, std::span<const double> window, std::span<const double> Rs) {
    std::vector<HSample> out;
    out.reserve(Rs.size());
    for (double R : Rs) out.push_back({R, h_of_r(symbol, window, R)});
    return out;
}

std::vector<double> geometric_r_grid(double first, double ratio, std::size_t count) {
    if (!(first > 0.0)) throw ValidationError(fmt::format("R grid: first R must be > 0 (got {})", first));
    if (!(ratio >= 2.0)) throw ValidationError(fmt::format("R grid: ratio must be >= 2 (got {})", ratio));
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(first * std::pow(ratio, static_cast<double>(i)));
    return out;
}

Beta0Fit beta0(std::span<const HSample> samples) {
    const std::size_t n = samples.size();
    if (n < 8) throw ValidationError(fmt::format("beta0: need >= 8 samples (got {})", n));
    const double ratio = samples[1].R / samples[0].R;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(samples[i].R > 0.0)) throw ValidationError(fmt::format("beta0: R[{}] must be > 0", i));
        if (!(samples[i].H >= 0.0) || std::isinf(samples[i].H)) {
            throw ValidationError(fmt::format("beta0: H[{}] must be finite and >= 0", i));
        }
        if (i == 0) continue;
        const double r = samples[i].R / samples[i - 1].R;
        if (!(r >= 2.0 * (1.0 - 1e-12)) || std::abs(r - ratio) > 1e-9 * ratio) {
            throw ValidationError(fmt::format("beta0: R grid must be geometric with ratio >= 2 (step {} has {})", i, r));
        }
    }

    Beta0Fit fit;
    const auto tail = samples.last((n + 1) / 2);
    fit.tail_points = tail.size();
    // H vanishing anywhere on the tail means R^lambda H(R) is eventually 0 for every lambda.
    if (std::any_of(tail.begin(), tail.end(), [](const HSample& s) { return s.H == 0.0; })) {
        fit.value = std::numeric_limits<double>::infinity();
        fit.slope = -std::numeric_limits<double>::infinity();
        return fit;
    }

    const double r0 = tail[0].R;
    const double h0 = tail[0].H;
    std::vector<double> lx, ly;
    for (const auto& s : tail) {
        lx.push_back(std::log(s.R / r0));
        ly.push_back(std::log(s.H / h0));
    }
    const auto m = static_cast<double>(tail.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    fit.slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (my + fit.slope * (lx[i] - mx));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / m);
    fit.value = std::max(0.0, -fit.slope);
    return fit;
}

std::string to_string(GrowthVerdict v) {
    switch (v) {
        case GrowthVerdict::decays:
            return "decays";
        case GrowthVerdict::flat:
            return "flat";
        case GrowthVerdict::grows:
            return "grows";
    }
    return {};
}

GrowthVerdict growth_verdict(std::span<const double> v) {
    if (v.size() < 3) throw ValidationError(fmt::format("growth verdict needs >= 3 values (got {})", v.size()));
    const auto tail = v.last(3);
    if (std::all_of(tail.begin(), tail.end(), [](double s) { return s == 0.0; })) return GrowthVerdict::decays;
    bool grows = true, decays = true;
    for (std::size_t i = 1; i < 3; ++i) {
        if (!(tail[i] >= 1.1 * tail[i - 1])) grows = false;
        if (!(tail[i] <= 0.9 * tail[i - 1])) decays = false;
    }
    if (grows) return GrowthVerdict::grows;
    if (decays) return GrowthVerdict::decays;
    return GrowthVerdict::flat;
}

namespace {

void check_growth_args(std::span<const double> lambdas, std::span<const double> ts, const GrowthOptions& options) {
    if (lambdas.empty()) throw ValidationError("path_growth: lambda list is empty");
    for (double l : lambdas) {
        if (!(l > 0.0) || std::isinf(l)) throw ValidationError(fmt::format("path_growth: lambda must be in (0, inf) (got {})", l));
    }
    if (ts.size() < 3) throw ValidationError("path_growth: need >= 3 times");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!(ts[i] > 0.0) || (i > 0 && !(ts[i] > ts[i - 1]))) {
            throw ValidationError("path_growth: t list must be positive and increasing");
        }
    }
    if (!(options.step > 0.0)) throw ValidationError("path_growth: step must be > 0");
}

// Grid over [0, t_max] containing every t in ts.
std::vector<double> growth_grid(std::span<const double> ts, double step) {
    std::vector<double> grid{0.0};
    double start = 0.0;
    for (double t : ts) {
        const auto part = uniform_grid(t - start, std::min(step, t - start));
        for (std::size_t i = 1; i < part.size(); ++i) grid.push_back(i + 1 == part.size() ? t : start + part[i]);
        start = t;
    }
    return grid;
}

// sup_{s<=t}|X_s - x| at each t in ts for one path.
std::vector<double> running_sups(const PathSample& path, double x, std::span<const double> ts) {
    std::vector<double> out;
    out.reserve(ts.size());
    double sup = 0.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < path.times.size() && j < ts.size(); ++i) {
        sup = std::max(sup, std::abs(path.states[i] - x));
        if (path.times[i] == ts[j]) {
            out.push_back(sup);
            ++j;
        }
    }
    return out;
}

double scaled(double sup, double t, double lambda) { return sup * std::pow(t, -1.0 / lambda); }

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

GrowthTable assemble(std::span<const double> lambdas, std::span<const double> ts,
                     const std::vector<std::vector<double>>& sups) {
    GrowthTable table;
    table.lambdas.assign(lambdas.begin(), lambdas.end());
    const std::size_t n = sups.size();
    for (double lambda : lambdas) {
        std::vector<double> meds;
        for (std::size_t j = 0; j < ts.size(); ++j) {
            std::vector<double> vals(n);
            for (std::size_t p = 0; p < n; ++p) vals[p] = scaled(sups[p][j], ts[j], lambda);
            meds.push_back(median(std::move(vals)));
            table.rows.push_back({lambda, ts[j], meds.back()});
        }
        // Verdicts are ordered decays < flat < grows; take the (lower) median.
        std::vector<int> verdicts(n);
        for (std::size_t p = 0; p < n; ++p) {
            std::vector<double> row(ts.size());
            for (std::size_t j = 0; j < ts.size(); ++j) row[j] = scaled(sups[p][j], ts[j], lambda);
            verdicts[p] = static_cast<int>(growth_verdict(row));
        }
        std::sort(verdicts.begin(), verdicts.end());
        table.verdicts.push_back(static_cast<GrowthVerdict>(verdicts[(n - 1) / 2]));
    }
    return table;
}

template <bool Parallel>
GrowthTable growth_impl(const ProcessSpec& spec, double x, std::span<const double> lambdas,
                        std::span<const double> ts, const GrowthOptions& options) {
    check_growth_args(lambdas, ts, options);
    validate(spec);
    const auto grid = growth_grid(ts, options.step);
    const bool det = std::holds_alternative<DetFamily>(spec);
    const std::size_t n = det ? 1 : options.n_paths;
    if (n == 0) throw ValidationError("path_growth: n_paths must be >= 1");
    std::vector<std::vector<double>> sups(n);
    auto one = [&](std::size_t i) { sups[i] = running_sups(simulate(spec, x, grid, options.seed, i), x, ts); };
    if constexpr (Parallel) {
        detail::ExceptionSlot slot;
        const int threads = options.parallel.threads > 0 ? options.parallel.threads : omp_get_max_threads();
        const auto nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
        for (std::int64_t i = 0; i < nn; ++i) slot.run([&] { one(static_cast<std::size_t>(i)); });
        slot.rethrow();
    } else {
        for (std::size_t i = 0; i < n; ++i) one(i);
    }
    return assemble(lambdas, ts, sups);
}

}  // namespace

GrowthTable path_growth(const ProcessSpec& spec, double x, std::span<const double> lambdas,
                        std::span<const double> ts, const GrowthOptions& options) {
    return growth_impl<true>(spec, x, lambdas, ts, options);
}

GrowthTable path_growth_serial(const ProcessSpec& spec, double x, std::span<const double> lambdas,
                               std::span<const double> ts, const GrowthOptions& options) {
    return growth_impl<false>(spec, x, lambdas, ts, options);
}

nlohmann::json to_json(const IndexReport& report) {
    using nlohmann::json;
    json samples = json::array();
    for (const auto& s : report.samples) samples.push_back({{"R", s.R}, {"H", s.H}});
    json growth = json::array();
    for (const auto& r : report.growth.rows) growth.push_back({{"lambda", r.lambda}, {"t", r.t}, {"scaled_sup", r.scaled_sup}});
    json verdicts = json::object();
    for (std::size_t i = 0; i < report.growth.lambdas.size(); ++i) {
        verdicts[fmt::format("{}", report.growth.lambdas[i])] = to_string(report.growth.verdicts[i]);
    }
    json out;
    out["samples"] = samples;
    out["beta0"] = report.fit.infinite() ? json("infinity") : json(report.fit.value);
    out["slope"] = report.fit.infinite() ? json(nullptr) : json(report.fit.slope);
    out["residual"] = report.fit.residual;
    out["tail_points"] = report.fit.tail_points;
    out["window"] = report.window;
    out["growth"] = growth;
    out["growth_verdicts"] = verdicts;
    return out;
}

}  // namespace psym
