#pragma once

// Process specifications: Lévy triplets, state-dependent differential
// characteristics, clock-changed processes and deterministic Markov families.

#include "psym/singular.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace psym {

// Law of a single jump size.
struct JumpSize {
    enum class Kind { constant, uniform, two_point };

    Kind kind = Kind::constant;
    double a = 0.0;  // constant value, uniform lower end, first atom
    double b = 0.0;  // uniform upper end, second atom
    double p = 1.0;  // probability of the first atom (two_point)

    static JumpSize constant(double value) { return {Kind::constant, value, value, 1.0}; }
    static JumpSize uniform(double lo, double hi) { return {Kind::uniform, lo, hi, 1.0}; }
    static JumpSize two_point(double first, double second, double p_first) {
        return {Kind::two_point, first, second, p_first};
    }

    template <class Rng>
    double sample(Rng& rng) const {
        switch (kind) {
            case Kind::constant:
                return a;
            case Kind::uniform:
                return std::uniform_real_distribution<double>(a, b)(rng);
            case Kind::two_point:
                return std::bernoulli_distribution(p)(rng) ? a : b;
        }
        return a;
    }

    double mean() const;
    // E[Y 1{|Y| <= 1}]: the part of the mean compensated by the unit-ball cutoff.
    double small_jump_mean() const;
    void validate() const;
};

struct JumpComponent {
    double rate = 0.0;
    JumpSize size;
};

// Constant-coefficient triplet (drift, diffusion Q, finite jump measure) in
// Lévy-Khintchine form: jumps inside the unit ball are compensated, so paths
// move with slope drift - sum rate_i E[Y_i 1{|Y_i| <= 1}] between jumps.
struct LevyTriplet {
    double drift = 0.0;
    double diffusion = 0.0;
    std::vector<JumpComponent> jumps;

    double total_rate() const;
    double path_drift() const;
    // Throws ValidationError naming every offending field.
    void validate() const;
};

// A continuous coefficient x -> c(x): polynomial or tabulated with linear
// interpolation and constant extension beyond the table.
class Coefficient {
public:
    Coefficient() : ys_{0.0} {}

    static Coefficient constant(double value);
    static Coefficient polynomial(std::vector<double> coefficients);  // c0 + c1 x + ...
    static Coefficient tabulated(std::vector<double> xs, std::vector<double> ys);

    double operator()(double x) const;

    bool is_polynomial() const noexcept { return xs_.empty(); }
    bool is_zero() const noexcept;
    const std::vector<double>& coefficients() const noexcept { return ys_; }
    const std::vector<double>& nodes() const noexcept { return xs_; }

private:
    std::vector<double> xs_;  // empty for polynomials
    std::vector<double> ys_;  // polynomial coefficients or table values
};

struct StateJump {
    Coefficient rate;
    JumpSize size;
};

// Differential characteristics (drift(x), Q(x), N(x, dy)) of a Lévy-type
// process, with the same small-jump compensation as LevyTriplet.
struct DiffChar {
    Coefficient drift;
    Coefficient diffusion;
    std::vector<StateJump> jumps;
    double max_dt = 1e-2;

    void validate() const;
};

struct ClockSpec {
    enum class Kind { identity, ac_of_state, staircase };

    Kind kind = Kind::identity;
    Coefficient rate;                            // g in dF = g(X) dt
    std::optional<StaircaseFunction> staircase;  // deterministic F(t)

    static ClockSpec identity() { return {}; }
    static ClockSpec ac_of_state(Coefficient g) { return {Kind::ac_of_state, std::move(g), std::nullopt}; }
    static ClockSpec deterministic(StaircaseFunction f) { return {Kind::staircase, Coefficient{}, std::move(f)}; }
};

// Lévy dynamics run in the operational time given by the clock.
struct ClockedProcess {
    LevyTriplet triplet;
    ClockSpec clock;
};

// Deterministic Markov families X_t^x = f_x(t).
//  sawtooth:  floor(x) + frac(x + t)
//  quadratic: f(tau_x + t), f(u) = floor(u)^2 + frac(u)/2, defined only on the
//             orbit {m^2 + s/2 : m >= 0, 0 <= s < 1}
struct DetFamily {
    enum class Kind { sawtooth, quadratic };
    Kind kind = Kind::sawtooth;
};

using ProcessSpec = std::variant<LevyTriplet, DiffChar, ClockedProcess, DetFamily>;

std::string kind_name(const ProcessSpec& spec);
void validate(const ProcessSpec& spec);

double det_family_eval(const DetFamily& family, double x, double t);
bool on_orbit(const DetFamily& family, double x);

// JSON form: {"kind": "levy" | "levy_type" | "clocked" | "det_family", ...}.
// Problems are appended to `errors` prefixed with their key path.
std::optional<ProcessSpec> spec_from_json(const nlohmann::json& doc, const std::string& path,
                                          std::vector<std::string>& errors);
ProcessSpec spec_from_json(const nlohmann::json& doc);  // throws ValidationError
nlohmann::json to_json(const ProcessSpec& spec);

// Staircase functions as a name understood by StaircaseFunction::parse,
// {"csv": path} or {"t": [...], "v": [...]}.
std::optional<StaircaseFunction> staircase_from_json(const nlohmann::json& doc, const std::string& path,
                                                     std::vector<std::string>& errors);
nlohmann::json staircase_to_json(const StaircaseFunction& f);

// FNV-1a of the canonical JSON form.
std::uint64_t fingerprint(const ProcessSpec& spec);

}  // namespace psym
