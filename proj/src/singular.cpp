#include "psym/singular.hpp"

#include "psym/errors.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

namespace psym {

namespace {

using boost::multiprecision::cpp_int;
using uint128 = unsigned __int128;

// t in (0,1) as mantissa / 2^exponent with an odd mantissa.
struct DyadicFraction {
    std::uint64_t mantissa;
    unsigned exponent;
};

DyadicFraction to_dyadic(double t) {
    int e = 0;
    const double m = std::frexp(t, &e);
    auto mantissa = static_cast<std::uint64_t>(std::ldexp(m, 53));
    int exponent = 53 - e;
    while ((mantissa & 1U) == 0U && exponent > 0) {
        mantissa >>= 1U;
        --exponent;
    }
    return {mantissa, static_cast<unsigned>(exponent)};
}

// Ternary digits of num / 2^exponent, mapped to binary digits of C.
template <class Int>
double cantor_from_digits(Int num, unsigned exponent) {
    const Int mask = (Int(1) << exponent) - 1;
    std::uint64_t bits = 0;
    int nbits = 0;
    int leading = 0;
    bool started = false;
    while (num != 0 && nbits < 64) {
        num *= 3;
        const auto digit = static_cast<unsigned>(num >> exponent);
        num &= mask;
        if (!started) {
            if (digit == 0) {
                ++leading;
                continue;
            }
            started = true;
        }
        bits = (bits << 1U) | (digit != 0 ? 1U : 0U);
        ++nbits;
        if (digit == 1) break;
    }
    if (nbits == 0) return 0.0;
    return std::ldexp(static_cast<double>(bits), -(leading + nbits));
}

void require_unit(double t, const char* what) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw DomainError(fmt::format("{}: argument {} outside [0,1]", what, t));
    }
}

double split_periodic(double t, double (*unit)(double)) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw DomainError(fmt::format("staircase argument {} outside [0, inf)", t));
    }
    const double whole = std::floor(t);
    return whole + unit(t - whole);
}

std::optional<double> parse_double(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

}  // namespace

double cantor_eval(double t) {
    require_unit(t, "cantor_eval");
    if (t == 0.0) return 0.0;
    if (t == 1.0) return 1.0;
    const auto [mantissa, exponent] = to_dyadic(t);
    if (exponent <= 125) {
        return cantor_from_digits<uint128>(mantissa, exponent);
    }
    return cantor_from_digits<cpp_int>(cpp_int(mantissa), exponent);
}

double cantor_eval(std::uint64_t num, std::uint64_t den) {
    if (den == 0 || num > den) {
        throw DomainError(fmt::format("cantor_eval: {}/{} outside [0,1]", num, den));
    }
    if (num == den) return 1.0;
    uint128 r = num;
    std::uint64_t bits = 0;
    int nbits = 0;
    int leading = 0;
    bool started = false;
    while (r != 0 && nbits < 64) {
        r *= 3;
        const auto digit = static_cast<unsigned>(r / den);
        r %= den;
        if (!started) {
            if (digit == 0) {
                ++leading;
                continue;
            }
            started = true;
        }
        bits = (bits << 1U) | (digit != 0 ? 1U : 0U);
        ++nbits;
        if (digit == 1) break;
    }
    if (nbits == 0) return 0.0;
    return std::ldexp(static_cast<double>(bits), -(leading + nbits));
}

double staircase_extend(double t) {
    return split_periodic(t, [](double u) { return cantor_eval(u); });
}

double minkowski_eval(double t) {
    require_unit(t, "minkowski_eval");
    if (t == 0.0) return 0.0;
    if (t == 1.0) return 1.0;
    const auto [mantissa, exponent] = to_dyadic(t);

    // ?(x) = 2 * sum_k (-1)^(k+1) 2^-(a_1 + ... + a_k), x = [0; a_1, a_2, ...].
    // Terms more than kExtraBits below the first one do not reach the result.
    constexpr long kExtraBits = 72;
    constexpr long kUnderflow = 1100;
    cpp_int p = mantissa;
    cpp_int q = cpp_int(1) << exponent;

    long first = -1;
    long partial = 0;
    __int128 acc = 0;
    int sign = 1;
    while (p != 0) {
        const cpp_int a = q / p;
        const cpp_int r = q % p;
        if (a > kUnderflow) break;
        partial += a.convert_to<long>();
        if (first < 0) {
            first = partial;
            if (first > kUnderflow) return 0.0;
        }
        if (partial - first > kExtraBits) break;
        // 2^(1 - partial) scaled by 2^(first - 1 + kExtraBits).
        acc += static_cast<__int128>(sign) * (static_cast<__int128>(1) << (first + kExtraBits - partial));
        sign = -sign;
        q = p;
        p = r;
    }
    if (first < 0) return 0.0;
    return std::ldexp(static_cast<double>(acc), -static_cast<int>(first - 1 + kExtraBits));
}

// ---------------------------------------------------------------------------

StaircaseFunction StaircaseFunction::cantor() {
    return StaircaseFunction{};
}

StaircaseFunction StaircaseFunction::minkowski() {
    StaircaseFunction f;
    f.kind_ = StaircaseKind::minkowski;
    return f;
}

StaircaseFunction StaircaseFunction::affine_plus_cantor(double slope, double weight) {
    if (!(slope >= 0.0) || !(weight >= 0.0) || !std::isfinite(slope) || !std::isfinite(weight)) {
        throw ValidationError(fmt::format("affine+cantor coefficients must be finite and >= 0, got {},{}",
                                          slope, weight));
    }
    StaircaseFunction f;
    f.kind_ = StaircaseKind::affine_cantor;
    f.slope_ = slope;
    f.weight_ = weight;
    return f;
}

StaircaseFunction StaircaseFunction::sampled(std::vector<double> abscissae, std::vector<double> values) {
    if (abscissae.size() != values.size()) {
        throw ValidationError(fmt::format("sampled staircase: {} abscissae but {} values",
                                          abscissae.size(), values.size()));
    }
    if (abscissae.size() < 2) {
        throw ValidationError("sampled staircase needs at least two points");
    }
    for (std::size_t i = 0; i < abscissae.size(); ++i) {
        if (!std::isfinite(abscissae[i]) || !std::isfinite(values[i])) {
            throw ValidationError(fmt::format("sampled staircase: non-finite entry at row {}", i));
        }
        if (i > 0 && !(abscissae[i] > abscissae[i - 1])) {
            throw ValidationError(fmt::format("sampled staircase: abscissae not strictly increasing at row {}", i));
        }
        if (i > 0 && values[i] < values[i - 1]) {
            throw ValidationError(fmt::format("sampled staircase: values decrease at row {}", i));
        }
    }
    StaircaseFunction f;
    f.kind_ = StaircaseKind::sampled;
    f.ts_ = std::move(abscissae);
    f.vs_ = std::move(values);
    return f;
}

StaircaseFunction StaircaseFunction::parse(std::string_view name) {
    if (name == "cantor") return cantor();
    if (name == "minkowski") return minkowski();
    constexpr std::string_view prefix = "affine+cantor:";
    if (name.starts_with(prefix)) {
        const auto rest = name.substr(prefix.size());
        const auto comma = rest.find(',');
        if (comma != std::string_view::npos) {
            const auto a = parse_double(rest.substr(0, comma));
            const auto b = parse_double(rest.substr(comma + 1));
            if (a && b) return affine_plus_cantor(*a, *b);
        }
    }
    throw ValidationError(fmt::format("unknown staircase function '{}' (expected cantor, minkowski or "
                                      "affine+cantor:a,b)",
                                      name));
}

StaircaseFunction StaircaseFunction::from_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError(fmt::format("cannot open staircase CSV '{}'", path.string()));
    }
    std::vector<double> ts;
    std::vector<double> vs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto comma = line.find(',');
        const auto t = comma == std::string::npos ? std::nullopt : parse_double(std::string_view(line).substr(0, comma));
        const auto v = comma == std::string::npos ? std::nullopt : parse_double(std::string_view(line).substr(comma + 1));
        if (!t || !v) {
            if (ts.empty() && lineno == 1) continue;  // header
            throw ValidationError(fmt::format("{}:{}: expected two numeric columns", path.string(), lineno));
        }
        ts.push_back(*t);
        vs.push_back(*v);
    }
    return sampled(std::move(ts), std::move(vs));
}

double StaircaseFunction::operator()(double t) const {
    switch (kind_) {
        case StaircaseKind::cantor:
            return staircase_extend(t);
        case StaircaseKind::minkowski:
            return split_periodic(t, [](double u) { return minkowski_eval(u); });
        case StaircaseKind::affine_cantor:
            return slope_ * t + weight_ * staircase_extend(t);
        case StaircaseKind::sampled: {
            if (!(t >= ts_.front() && t <= ts_.back())) {
                throw DomainError(fmt::format("sampled staircase: {} outside [{}, {}]", t, ts_.front(), ts_.back()));
            }
            const auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
            if (it == ts_.end()) return vs_.back();
            const auto hi = static_cast<std::size_t>(it - ts_.begin());
            const auto lo = hi - 1;
            if (t == ts_[lo]) return vs_[lo];
            const double frac = (t - ts_[lo]) / (ts_[hi] - ts_[lo]);
            return std::min(vs_[lo] + (vs_[hi] - vs_[lo]) * frac, vs_[hi]);
        }
    }
    return 0.0;
}

Interval StaircaseFunction::domain() const noexcept {
    if (kind_ == StaircaseKind::sampled) return {ts_.front(), ts_.back()};
    return {0.0, std::numeric_limits<double>::infinity()};
}

std::string StaircaseFunction::name() const {
    switch (kind_) {
        case StaircaseKind::cantor:
            return "cantor";
        case StaircaseKind::minkowski:
            return "minkowski";
        case StaircaseKind::affine_cantor:
            return fmt::format("affine+cantor:{},{}", slope_, weight_);
        case StaircaseKind::sampled:
            return "sampled";
    }
    return {};
}

// ---------------------------------------------------------------------------

double DiniEstimate::max_quotient() const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& q : quotients) best = std::max(best, q.quotient);
    return best;
}

std::vector<double> geometric_schedule(double first, double ratio, std::size_t count) {
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(first * std::pow(ratio, static_cast<double>(i)));
    }
    return out;
}

std::vector<double> default_dini_schedule() {
    return geometric_schedule(1.0 / 3.0, 1.0 / 3.0, 12);
}

DiniEstimate dini(const StaircaseFunction& f, double x0, DiniSide side, DiniEnvelope envelope,
                  std::span<const double> steps, const DiniOptions& options) {
    if (steps.empty()) throw ValidationError("dini: empty step schedule");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (!(steps[i] > 0.0) || (i > 0 && !(steps[i] < steps[i - 1]))) {
            throw ValidationError("dini: step schedule must be positive and strictly decreasing");
        }
    }
    const Interval dom = f.domain();
    const double sign = side == DiniSide::right ? 1.0 : -1.0;
    if (!dom.contains(x0)) throw DomainError(fmt::format("dini: x0 = {} outside the domain", x0));
    for (double h : steps) {
        if (!dom.contains(x0 + sign * h)) {
            throw DomainError(fmt::format("dini: evaluation point {} outside the domain", x0 + sign * h));
        }
    }

    DiniEstimate est;
    est.x0 = x0;
    est.side = side;
    est.envelope = envelope;
    const double f0 = f(x0);
    for (double h : steps) {
        const double signed_h = sign * h;
        est.quotients.push_back({signed_h, (f(x0 + signed_h) - f0) / signed_h});
    }

    const std::size_t n = est.quotients.size();
    const std::size_t m = std::max<std::size_t>(options.tail, 2);
    if (n >= m) {
        bool growing = true;
        for (std::size_t i = n - m + 1; i < n; ++i) {
            const double prev = std::abs(est.quotients[i - 1].quotient);
            const double cur = std::abs(est.quotients[i].quotient);
            if (!(cur > prev && cur >= options.divergence_ratio * prev)) {
                growing = false;
                break;
            }
        }
        if (growing) {
            est.verdict.kind = DiniVerdict::Kind::diverging;
            return est;
        }
    }

    const std::size_t used = std::min(n, m);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = n - used; i < n; ++i) {
        lo = std::min(lo, est.quotients[i].quotient);
        hi = std::max(hi, est.quotients[i].quotient);
    }
    const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    if (hi - lo <= options.finite_tol * scale) {
        est.verdict.kind = DiniVerdict::Kind::finite;
        est.verdict.value = envelope == DiniEnvelope::upper ? hi : lo;
    }
    return est;
}

std::vector<DiniHit> find_infinite_dini(const StaircaseFunction& f, Interval interval,
                                        std::size_t resolution, double threshold,
                                        std::span<const double> steps) {
    if (!(interval.hi > interval.lo)) {
        throw DomainError(fmt::format("find_infinite_dini: empty interval [{}, {}]", interval.lo, interval.hi));
    }
    if (!(threshold > 0.0)) throw ValidationError("find_infinite_dini: threshold must be > 0");
    if (resolution == 0) throw ValidationError("find_infinite_dini: resolution must be >= 1");
    if (steps.empty()) throw ValidationError("find_infinite_dini: empty step schedule");

    const Interval dom = f.domain();
    std::vector<DiniHit> hits;
    for (std::size_t i = 0; i <= resolution; ++i) {
        const double x = interval.lo + (interval.hi - interval.lo) * static_cast<double>(i) /
                                           static_cast<double>(resolution);
        DiniSide side = DiniSide::right;
        if (!dom.contains(x + steps.front())) {
            if (!dom.contains(x - steps.front())) continue;
            side = DiniSide::left;
        }
        const auto est = dini(f, x, side, DiniEnvelope::upper, steps);
        const double q = est.max_quotient();
        if (q > threshold) hits.push_back({x, q});
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const DiniHit& a, const DiniHit& b) { return a.max_quotient > b.max_quotient; });
    return hits;
}

// ---------------------------------------------------------------------------

namespace {

// Doubles mapped to integers in the same order.
std::int64_t ordered_bits(double x) {
    const auto b = std::bit_cast<std::int64_t>(x);
    return b >= 0 ? b : std::numeric_limits<std::int64_t>::min() - b;
}

double from_ordered_bits(std::int64_t k) {
    return std::bit_cast<double>(k >= 0 ? k : std::numeric_limits<std::int64_t>::min() - k);
}

// An s near F - A with A + s == F exactly. s -> fl(A + s) is nondecreasing,
// so a bracket around F - A is bisected in the ordering of doubles.
std::optional<double> exact_remainder(double target, double ac) {
    const double s0 = target - ac;
    const double sum0 = ac + s0;
    if (sum0 == target) return s0;
    if (!std::isfinite(sum0)) return std::nullopt;
    const bool low = sum0 < target;
    double width = std::abs(target - sum0);
    double far = s0;
    for (int i = 0; i < 64; ++i) {
        far = low ? s0 + width : s0 - width;
        const double sum = ac + far;
        if (sum == target) return far;
        if (low ? sum > target : sum < target) break;
        width *= 2.0;
    }
    std::int64_t lo = ordered_bits(low ? s0 : far);
    std::int64_t hi = ordered_bits(low ? far : s0);
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        const double sum = ac + from_ordered_bits(mid);
        if (sum == target) return from_ordered_bits(mid);
        (sum < target ? lo : hi) = mid;
    }
    return std::nullopt;
}

double neighbour_median(std::span<const double> quotients, std::size_t center, std::size_t window,
                        double cap) {
    const std::size_t half = window / 2;
    const std::size_t lo = center >= half ? center - half : 0;
    const std::size_t hi = std::min(quotients.size() - 1, center + half);
    std::vector<double> vals;
    for (std::size_t j = lo; j <= hi; ++j) {
        if (j != center && quotients[j] <= cap) vals.push_back(quotients[j]);
    }
    if (vals.empty()) return 0.0;
    std::sort(vals.begin(), vals.end());
    const std::size_t mid = vals.size() / 2;
    return vals.size() % 2 == 1 ? vals[mid] : 0.5 * (vals[mid - 1] + vals[mid]);
}

}  // namespace

Decomposition lebesgue_decompose(std::span<const double> samples, double step,
                                 const DecomposeOptions& options) {
    if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("lebesgue_decompose: step must be > 0");
    if (samples.size() < 2) throw ValidationError("lebesgue_decompose: need at least two samples");
    if (!(options.cap > 0.0)) throw ValidationError("lebesgue_decompose: cap must be > 0");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i])) {
            throw ValidationError(fmt::format("lebesgue_decompose: non-finite sample at index {}", i));
        }
        if (i > 0 && samples[i] < samples[i - 1]) {
            throw ValidationError(fmt::format("lebesgue_decompose: samples decrease at index {}", i));
        }
    }

    const std::size_t n = samples.size();
    // Backward difference quotients; the first point borrows its neighbour's.
    std::vector<double> quotients(n);
    for (std::size_t i = 1; i < n; ++i) quotients[i] = (samples[i] - samples[i - 1]) / step;
    quotients[0] = quotients[1];

    Decomposition out;
    out.step = step;
    out.density.resize(n);
    out.singular.resize(n);

    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double g = quotients[i];
        if (g > options.cap) g = neighbour_median(quotients, i, options.window, options.cap);

        // Rounding can leave F - A unreachable (a tie in A + s); nudging g by
        // a few ulps of cum + g moves A off the tie.
        auto attempt = [&](double& density) -> std::optional<double> {
            const double ulp = std::nextafter(cum + density, std::numeric_limits<double>::infinity()) - (cum + density);
            for (int j = 0; j < 9; ++j) {
                const double offset = static_cast<double>((j + 1) / 2) * ((j % 2 == 1) ? -1.0 : 1.0);
                const double candidate = std::max(0.0, density + offset * ulp);
                if (auto r = exact_remainder(samples[i], (cum + candidate) * step)) {
                    density = candidate;
                    return r;
                }
            }
            return std::nullopt;
        };
        auto s = attempt(g);
        // Monotone projection: lower g until S stops decreasing. With g = 0
        // the exact remainder cannot fall below the previous S.
        if (i > 0 && (!s || *s < out.singular[i - 1])) {
            const double prev = out.singular[i - 1];
            g = std::max(0.0, (samples[i] - prev) / step - cum);
            s = attempt(g);
            for (int tries = 0; (!s || *s < prev) && g > 0.0; ++tries) {
                g = tries < 64 ? std::max(0.0, std::nextafter(cum + g, 0.0) - cum) : 0.0;
                s = attempt(g);
            }
            if (s && *s < prev && samples[i] == samples[i - 1]) s = prev;
        }
        if (!s) {
            throw std::runtime_error(fmt::format("lebesgue_decompose: no exact remainder at index {}", i));
        }
        out.density[i] = g;
        out.singular[i] = *s;
        cum += g;
    }
    return out;
}

std::vector<double> reconstruct(const Decomposition& d) {
    std::vector<double> out(d.density.size());
    double cum = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        cum += d.density[i];
        out[i] = cum * d.step + d.singular[i];
    }
    return out;
}

}  // namespace psym
