#include "psym/symbol.hpp"

#include "path_kernels.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

namespace psym {

using detail::Draws;

namespace {

constexpr std::size_t kChunk = 512;

// Records X at the first point with |X - x| > k, else the last point seen.
struct StopSink {
    double x;
    double k;
    double state = 0.0;
    bool stopped = false;

    void operator()(double, double value) {
        if (stopped) return;
        state = value;
        if (std::abs(value - x) > k) stopped = true;
    }
};

// Welford accumulator for y = e^{i delta xi} - 1, merged pairwise (Chan et
// al.); identical samples give exactly zero variance.
struct Moments {
    double n = 0.0;
    double mean_re = 0.0;
    double mean_im = 0.0;
    double m2_re = 0.0;
    double m2_im = 0.0;

    void add(double delta, double xi) {
        const double half = std::sin(0.5 * delta * xi);
        const double yr = -2.0 * half * half;
        const double yi = std::sin(delta * xi);
        n += 1.0;
        const double dr = yr - mean_re;
        const double di = yi - mean_im;
        mean_re += dr / n;
        mean_im += di / n;
        m2_re += dr * (yr - mean_re);
        m2_im += di * (yi - mean_im);
    }
    void merge(const Moments& o) {
        if (o.n == 0.0) return;
        if (n == 0.0) {
            *this = o;
            return;
        }
        const double total = n + o.n;
        const double dr = o.mean_re - mean_re;
        const double di = o.mean_im - mean_im;
        mean_re += dr * (o.n / total);
        mean_im += di * (o.n / total);
        m2_re += o.m2_re + dr * dr * (n * o.n / total);
        m2_im += o.m2_im + di * di * (n * o.n / total);
        n = total;
    }
};

// Stopped increment X_{t ^ sigma} - x for one path.
class PathStopper {
public:
    PathStopper(const ProcessSpec& spec, double x, double k, std::vector<double> grid, std::uint64_t seed)
        : spec_(spec), x_(x), k_(k), grid_(std::move(grid)), seed_(seed) {
        if (const auto* c = std::get_if<ClockedProcess>(&spec_); c && c->clock.kind == ClockSpec::Kind::staircase) {
            clock_.resize(grid_.size());
            for (std::size_t i = 0; i < grid_.size(); ++i) {
                clock_[i] = (*c->clock.staircase)(grid_[i]);
                if (i > 0 && clock_[i] < clock_[i - 1]) {
                    throw ValidationError(
                        fmt::format("clock decreases between t = {} and t = {}", grid_[i - 1], grid_[i]));
                }
            }
        }
    }

    double operator()(std::uint64_t index) const {
        Draws draws(seed_, index);
        StopSink sink{x_, k_};
        auto dt_clock = [](std::size_t, double, double dt) { return dt; };
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, LevyTriplet>) {
                    detail::levy_kernel(s, x_, grid_, dt_clock, draws, std::ref(sink));
                } else if constexpr (std::is_same_v<T, DiffChar>) {
                    detail::levy_type_kernel(s, x_, grid_, draws, std::ref(sink));
                } else if constexpr (std::is_same_v<T, ClockedProcess>) {
                    run_clocked(s, draws, sink);
                } else {
                    for (double t : grid_) sink(t, det_family_eval(s, x_, t));
                }
            },
            spec_);
        return sink.state - x_;
    }

private:
    void run_clocked(const ClockedProcess& p, Draws& draws, StopSink& sink) const {
        switch (p.clock.kind) {
            case ClockSpec::Kind::identity:
                detail::levy_kernel(p.triplet, x_, grid_, [](std::size_t, double, double dt) { return dt; }, draws,
                                    std::ref(sink));
                return;
            case ClockSpec::Kind::staircase:
                detail::levy_kernel(
                    p.triplet, x_, grid_, [&](std::size_t i, double, double) { return clock_[i + 1] - clock_[i]; },
                    draws, std::ref(sink));
                return;
            case ClockSpec::Kind::ac_of_state:
                detail::levy_kernel(
                    p.triplet, x_, grid_,
                    [&](std::size_t, double y, double dt) {
                        const double rate = p.clock.rate(y);
                        if (rate < 0.0 || !std::isfinite(rate)) {
                            throw ValidationError(fmt::format("clock rate g(x) = {} < 0 at x = {}", rate, y));
                        }
                        return rate * dt;
                    },
                    draws, std::ref(sink));
                return;
        }
    }

    const ProcessSpec& spec_;
    double x_;
    double k_;
    std::vector<double> grid_;
    std::vector<double> clock_;
    std::uint64_t seed_;
};

void check_args(const ProcessSpec& spec, double k, double t, std::size_t n_paths) {
    if (!(t > 0.0)) throw DomainError(fmt::format("quotient horizon t must be > 0 (got {})", t));
    if (!(k > 0.0)) throw ValidationError(fmt::format("exit radius must be > 0 (got {})", k));
    if (n_paths == 0) throw ValidationError("n_paths must be >= 1");
    validate(spec);
}

QuotientSample finish(const Moments& m, double t, std::size_t n) {
    QuotientSample q;
    q.t = t;
    q.n_paths = n;
    const auto nd = static_cast<double>(n);
    q.value = Complex{-m.mean_re / t, -m.mean_im / t};
    if (n > 1) {
        q.se_re = std::sqrt(std::max(0.0, m.m2_re) / (nd - 1.0) / nd) / t;
        q.se_im = std::sqrt(std::max(0.0, m.m2_im) / (nd - 1.0) / nd) / t;
    }
    return q;
}

std::optional<QuotientSample> deterministic(const ProcessSpec& spec, double x, double xi, double k, double t,
                                            const McOptions& options) {
    const auto* family = std::get_if<DetFamily>(&spec);
    if (family == nullptr) return std::nullopt;
    PathStopper stop(spec, x, k, quotient_grid(t, options.default_dt), 0);
    Moments m;
    m.add(stop(0), xi);
    return finish(m, t, 1);
}

}  // namespace

std::vector<double> quotient_grid(double t, double default_dt) {
    if (!(t > 0.0)) throw DomainError(fmt::format("quotient horizon t must be > 0 (got {})", t));
    return uniform_grid(t, std::min(default_dt, t / 16.0));
}

QuotientSample mc_quotient(const ProcessSpec& spec, double x, double xi, double k, double t, std::size_t n_paths,
                           std::uint64_t seed, const McOptions& options) {
    check_args(spec, k, t, n_paths);
    if (auto det = deterministic(spec, x, xi, k, t, options)) return *det;

    const PathStopper stop(spec, x, k, quotient_grid(t, options.default_dt), seed);
    const std::size_t chunks = (n_paths + kChunk - 1) / kChunk;
    std::vector<Moments> partial(chunks);
    detail::ExceptionSlot slot;
    const int threads = options.parallel.threads > 0 ? options.parallel.threads : omp_get_max_threads();
    const auto nc = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t c = 0; c < nc; ++c) {
        slot.run([&] {
            const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
            const std::size_t hi = std::min(n_paths, lo + kChunk);
            Moments m;
            for (std::size_t i = lo; i < hi; ++i) m.add(stop(i), xi);
            partial[static_cast<std::size_t>(c)] = m;
        });
    }
    slot.rethrow();
    Moments total;
    for (const auto& m : partial) total.merge(m);
    return finish(total, t, n_paths);
}

QuotientSample mc_quotient_serial(const ProcessSpec& spec, double x, double xi, double k, double t,
                                  std::size_t n_paths, std::uint64_t seed, const McOptions& options) {
    check_args(spec, k, t, n_paths);
    if (auto det = deterministic(spec, x, xi, k, t, options)) return *det;

    const PathStopper stop(spec, x, k, quotient_grid(t, options.default_dt), seed);
    Moments total;
    for (std::size_t i = 0; i < n_paths; ++i) total.add(stop(i), xi);
    return finish(total, t, n_paths);
}

}  // namespace psym
