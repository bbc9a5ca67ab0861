#include "psym/process.hpp"

#include "psym/errors.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace psym {

namespace {

void check_jump_size(const JumpSize& size, const std::string& where, std::vector<std::string>& problems) {
    switch (size.kind) {
        case JumpSize::Kind::constant:
            if (!std::isfinite(size.a)) problems.push_back(where + ": jump size must be finite");
            break;
        case JumpSize::Kind::uniform:
            if (!std::isfinite(size.a) || !std::isfinite(size.b) || !(size.a < size.b)) {
                problems.push_back(fmt::format("{}: uniform jump needs finite a < b (got {}, {})", where, size.a, size.b));
            }
            break;
        case JumpSize::Kind::two_point:
            if (!std::isfinite(size.a) || !std::isfinite(size.b)) {
                problems.push_back(where + ": two-point atoms must be finite");
            }
            if (!(size.p >= 0.0 && size.p <= 1.0)) {
                problems.push_back(fmt::format("{}: two-point probability must lie in [0,1] (got {})", where, size.p));
            }
            break;
    }
}

void throw_if_any(std::vector<std::string> problems) {
    if (!problems.empty()) throw ValidationError(std::move(problems));
}

// Sign checks that hold for every x: table values, or a constant polynomial.
void check_nonnegative(const Coefficient& c, const std::string& where, std::vector<std::string>& problems) {
    const auto& ys = c.coefficients();
    if (!c.is_polynomial() || ys.size() <= 1) {
        for (double y : ys) {
            if (!(y >= 0.0)) {
                problems.push_back(fmt::format("{}: must be >= 0 (got {})", where, y));
                return;
            }
        }
    }
}

double frac(double y) { return y - std::floor(y); }

// Largest integer m with m^2 <= x.
double integer_root(double x) {
    auto m = std::floor(std::sqrt(x));
    while ((m + 1) * (m + 1) <= x) m += 1;
    while (m * m > x) m -= 1;
    return m;
}

}  // namespace

double JumpSize::mean() const {
    switch (kind) {
        case Kind::constant:
            return a;
        case Kind::uniform:
            return 0.5 * (a + b);
        case Kind::two_point:
            return p * a + (1.0 - p) * b;
    }
    return a;
}

double JumpSize::small_jump_mean() const {
    auto inside = [](double y) { return std::abs(y) <= 1.0 ? y : 0.0; };
    switch (kind) {
        case Kind::constant:
            return inside(a);
        case Kind::uniform: {
            const double lo = std::max(a, -1.0);
            const double hi = std::min(b, 1.0);
            return hi > lo ? 0.5 * (hi * hi - lo * lo) / (b - a) : 0.0;
        }
        case Kind::two_point:
            return p * inside(a) + (1.0 - p) * inside(b);
    }
    return 0.0;
}

void JumpSize::validate() const {
    std::vector<std::string> problems;
    check_jump_size(*this, "jump size", problems);
    throw_if_any(std::move(problems));
}

double LevyTriplet::total_rate() const {
    double total = 0.0;
    for (const auto& j : jumps) total += j.rate;
    return total;
}

double LevyTriplet::path_drift() const {
    double out = drift;
    for (const auto& j : jumps) {
        if (j.rate > 0.0) out -= j.rate * j.size.small_jump_mean();
    }
    return out;
}

void LevyTriplet::validate() const {
    std::vector<std::string> problems;
    if (!std::isfinite(drift)) problems.push_back("drift: must be finite");
    if (!(diffusion >= 0.0) || !std::isfinite(diffusion)) {
        problems.push_back(fmt::format("Q: must be >= 0 (got {})", diffusion));
    }
    for (std::size_t i = 0; i < jumps.size(); ++i) {
        if (!(jumps[i].rate >= 0.0) || !std::isfinite(jumps[i].rate)) {
            problems.push_back(fmt::format("jumps[{}].rate: must be finite and >= 0 (got {})", i, jumps[i].rate));
        }
        check_jump_size(jumps[i].size, fmt::format("jumps[{}].size", i), problems);
    }
    throw_if_any(std::move(problems));
}

// ---------------------------------------------------------------------------

Coefficient Coefficient::constant(double value) {
    return polynomial({value});
}

Coefficient Coefficient::polynomial(std::vector<double> coefficients) {
    if (coefficients.empty()) coefficients.push_back(0.0);
    for (double c : coefficients) {
        if (!std::isfinite(c)) throw ValidationError("polynomial coefficient must be finite");
    }
    Coefficient out;
    out.xs_.clear();
    out.ys_ = std::move(coefficients);
    return out;
}

Coefficient Coefficient::tabulated(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size() || xs.empty()) {
        throw ValidationError(fmt::format("table needs matching non-empty x and y (got {} and {})", xs.size(), ys.size()));
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw ValidationError("table entries must be finite");
        if (i > 0 && !(xs[i] > xs[i - 1])) throw ValidationError("table x must be strictly increasing");
    }
    Coefficient out;
    out.xs_ = std::move(xs);
    out.ys_ = std::move(ys);
    return out;
}

double Coefficient::operator()(double x) const {
    if (xs_.empty()) {
        double acc = 0.0;
        for (auto it = ys_.rbegin(); it != ys_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }
    if (x <= xs_.front()) return ys_.front();
    if (x >= xs_.back()) return ys_.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin());
    const auto lo = hi - 1;
    const double w = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
    return ys_[lo] + (ys_[hi] - ys_[lo]) * w;
}

bool Coefficient::is_zero() const noexcept {
    return std::all_of(ys_.begin(), ys_.end(), [](double y) { return y == 0.0; });
}

void DiffChar::validate() const {
    std::vector<std::string> problems;
    check_nonnegative(diffusion, "Q", problems);
    for (std::size_t i = 0; i < jumps.size(); ++i) {
        check_nonnegative(jumps[i].rate, fmt::format("jumps[{}].rate", i), problems);
        check_jump_size(jumps[i].size, fmt::format("jumps[{}].size", i), problems);
    }
    if (!(max_dt > 0.0) || !std::isfinite(max_dt)) {
        problems.push_back(fmt::format("max_dt: must be > 0 (got {})", max_dt));
    }
    throw_if_any(std::move(problems));
}

// ---------------------------------------------------------------------------

std::string kind_name(const ProcessSpec& spec) {
    constexpr const char* names[] = {"levy", "levy_type", "clocked", "det_family"};
    return names[spec.index()];
}

void validate(const ProcessSpec& spec) {
    if (const auto* t = std::get_if<LevyTriplet>(&spec)) t->validate();
    if (const auto* c = std::get_if<DiffChar>(&spec)) c->validate();
    if (const auto* c = std::get_if<ClockedProcess>(&spec)) {
        c->triplet.validate();
        if (c->clock.kind == ClockSpec::Kind::staircase && !c->clock.staircase) {
            throw ValidationError("clock: staircase clock without a function");
        }
        if (c->clock.kind == ClockSpec::Kind::ac_of_state) {
            std::vector<std::string> problems;
            check_nonnegative(c->clock.rate, "clock.g", problems);
            throw_if_any(std::move(problems));
        }
    }
}

bool on_orbit(const DetFamily& family, double x) {
    if (!std::isfinite(x)) return false;
    if (family.kind == DetFamily::Kind::sawtooth) return true;
    if (x < 0.0) return false;
    const double m = integer_root(x);
    return x - m * m < 0.5;
}

double det_family_eval(const DetFamily& family, double x, double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError(fmt::format("deterministic family: time {} < 0", t));
    if (!std::isfinite(x)) throw DomainError("deterministic family: start must be finite");
    if (family.kind == DetFamily::Kind::sawtooth) {
        return std::floor(x) + frac(x + t);
    }
    if (!on_orbit(family, x)) {
        throw DomainError(fmt::format("quadratic family: start {} is off the orbit (need m^2 <= x < m^2 + 1/2 "
                                      "for some integer m >= 0)",
                                      x));
    }
    const double m = integer_root(x);
    const double path_time = m + 2.0 * (x - m * m);
    const double u = path_time + t;
    const double whole = std::floor(u);
    return whole * whole + 0.5 * (u - whole);
}

}  // namespace psym
