#pragma once

#include "psym/process.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace psym {

// x, t -> f_x(t)
using FamilyFn = std::function<double(double, double)>;

struct ProbeGrid {
    std::vector<double> starts;  // x, y
    std::vector<double> times;   // s, t
    std::vector<double> shifts;  // h
};

// f_x(s) == f_y(t) but f_x(s + h) != f_y(t + h).
struct HomogeneityWitness {
    double x, s, y, t, h;
    double lhs, rhs;  // f_x(s + h), f_y(t + h)
};

struct HomogeneityReport {
    bool pass = true;
    std::optional<HomogeneityWitness> witness;
    std::size_t matched_pairs = 0;
};

/// Probes the Markov time-shift condition: whenever two probed states agree
/// within tol, the shifted states must agree within tol for every probed h.
/// Starts loop outermost, then times, then the second point, then shifts;
/// the first violation in that order is reported.
HomogeneityReport check_time_homogeneity(const FamilyFn& family, const ProbeGrid& grid, double tol);
HomogeneityReport check_time_homogeneity(const DetFamily& family, const ProbeGrid& grid, double tol);

/// {lo, lo + 1/den, ..., hi}
std::vector<double> rational_grid(double lo, double hi, int denominator);

/// Orbit points m^2 + j/(2 den) for m = 0..m_max, j = 0..den-1.
std::vector<double> quadratic_orbit_grid(int m_max, int denominator);

}  // namespace psym
