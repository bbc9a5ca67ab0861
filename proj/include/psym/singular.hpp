#pragma once

// Singular (staircase) functions, numerical Dini derivatives and a grid
// Lebesgue decomposition of increasing functions.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace psym {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double t) const noexcept { return t >= lo && t <= hi; }
};

/// Cantor function on [0,1] by exact ternary-digit expansion of the double
/// argument. Digits are scanned until the first 1; after the leading zeros at
/// least 64 digits are consumed, so the result is within one ulp of C(t).
double cantor_eval(double t);

/// Cantor function of the exact rational num/den, 0 <= num <= den.
double cantor_eval(std::uint64_t num, std::uint64_t den);

/// Periodized extension floor(t) + C(frac(t)) on [0, inf).
double staircase_extend(double t);

/// Minkowski question mark function on [0,1] from the exact continued
/// fraction of the double argument.
double minkowski_eval(double t);

enum class StaircaseKind { cantor, minkowski, affine_cantor, sampled };

// An increasing function handle. Analytic kinds are defined on [0, inf) via
// the periodized extension; sampled kinds on the span of their abscissae with
// linear interpolation between nodes.
class StaircaseFunction {
public:
    static StaircaseFunction cantor();
    static StaircaseFunction minkowski();
    // slope * t + weight * C~(t); both coefficients must be >= 0.
    static StaircaseFunction affine_plus_cantor(double slope, double weight);
    static StaircaseFunction sampled(std::vector<double> abscissae, std::vector<double> values);

    // "cantor", "minkowski" or "affine+cantor:a,b".
    static StaircaseFunction parse(std::string_view name);
    // Two columns (t,value), optional header, strictly increasing t.
    static StaircaseFunction from_csv(const std::filesystem::path& path);

    double operator()(double t) const;

    StaircaseKind kind() const noexcept { return kind_; }
    Interval domain() const noexcept;
    // Canonical name understood by parse(); "sampled" for sampled functions.
    std::string name() const;

    double slope() const noexcept { return slope_; }
    double weight() const noexcept { return weight_; }
    const std::vector<double>& abscissae() const noexcept { return ts_; }
    const std::vector<double>& values() const noexcept { return vs_; }

private:
    StaircaseFunction() = default;

    StaircaseKind kind_ = StaircaseKind::cantor;
    double slope_ = 0.0;
    double weight_ = 1.0;
    std::vector<double> ts_;
    std::vector<double> vs_;
};

// ---------------------------------------------------------------------------
// Dini derivatives

enum class DiniSide { right, left };
enum class DiniEnvelope { upper, lower };

struct DiniQuotient {
    double h;         // signed: negative on the left side
    double quotient;  // (f(x0 + h) - f(x0)) / h
};

struct DiniVerdict {
    enum class Kind { finite, diverging, inconclusive };
    Kind kind = Kind::inconclusive;
    double value = std::numeric_limits<double>::quiet_NaN();  // set for finite
};

// A finite-schedule surrogate for a Dini derivative: the limsup/liminf is not
// computed, only classified from the tail of the quotient sequence.
struct DiniEstimate {
    double x0 = 0.0;
    DiniSide side = DiniSide::right;
    DiniEnvelope envelope = DiniEnvelope::upper;
    std::vector<DiniQuotient> quotients;
    DiniVerdict verdict;

    double max_quotient() const;
};

struct DiniOptions {
    double divergence_ratio = 1.2;  // theta
    std::size_t tail = 4;           // m
    double finite_tol = 1e-6;       // relative spread of a finite tail
};

/// first, first*ratio, first*ratio^2, ... (count entries).
std::vector<double> geometric_schedule(double first, double ratio, std::size_t count);

/// Default step schedule: 3^-1 ... 3^-12.
std::vector<double> default_dini_schedule();

/// Difference quotients of f at x0 along the schedule and their verdict.
/// Diverging: the last `tail` quotients grow strictly in magnitude, each by a
/// factor >= divergence_ratio. Finite: their spread is within finite_tol; the
/// reported value is the tail max (upper) or min (lower). Otherwise inconclusive.
DiniEstimate dini(const StaircaseFunction& f, double x0, DiniSide side, DiniEnvelope envelope,
                  std::span<const double> steps, const DiniOptions& options = {});

struct DiniHit {
    double point;
    double max_quotient;
};

/// Scans resolution+1 equispaced points of the interval and returns those whose
/// largest upper Dini quotient exceeds threshold, sorted by quotient descending.
/// Right quotients are used where x + steps[0] stays in the domain, left ones
/// otherwise. Heuristic: points between grid nodes are not seen.
std::vector<DiniHit> find_infinite_dini(const StaircaseFunction& f, Interval interval,
                                        std::size_t resolution, double threshold,
                                        std::span<const double> steps);

// ---------------------------------------------------------------------------
// Lebesgue decomposition on a uniform grid

struct DecomposeOptions {
    double cap = 10.0;       // quotients above this are singular mass
    std::size_t window = 5;  // neighbourhood for the median replacement
};

struct Decomposition {
    double step = 0.0;
    std::vector<double> density;   // g at each grid point
    std::vector<double> singular;  // S at each grid point, nondecreasing
};

/// Splits grid samples F into step * cumsum(g) + S. F is reproduced exactly
/// by reconstruct(); S is nondecreasing and g is nonnegative.
Decomposition lebesgue_decompose(std::span<const double> samples, double step,
                                 const DecomposeOptions& options = {});

/// step * (g_0 + ... + g_i) + S_i, evaluated in the same order the
/// decomposition used.
std::vector<double> reconstruct(const Decomposition& d);

}  // namespace psym
