#include "psym/homogeneity.hpp"

#include "psym/errors.hpp"

#include <cmath>

namespace psym {

HomogeneityReport check_time_homogeneity(const FamilyFn& family, const ProbeGrid& grid, double tol) {
    if (!(tol >= 0.0)) throw ValidationError("homogeneity tolerance must be >= 0");
    struct Probe {
        double start, time, value;
    };
    std::vector<Probe> probes;
    probes.reserve(grid.starts.size() * grid.times.size());
    for (double x : grid.starts) {
        for (double s : grid.times) probes.push_back({x, s, family(x, s)});
    }

    HomogeneityReport report;
    for (std::size_t a = 0; a < probes.size(); ++a) {
        for (std::size_t b = 0; b < probes.size(); ++b) {
            if (a == b) continue;
            const auto& p = probes[a];
            const auto& q = probes[b];
            if (std::abs(p.value - q.value) > tol) continue;
            ++report.matched_pairs;
            for (double h : grid.shifts) {
                const double lhs = family(p.start, p.time + h);
                const double rhs = family(q.start, q.time + h);
                if (std::abs(lhs - rhs) > tol) {
                    report.pass = false;
                    report.witness = HomogeneityWitness{p.start, p.time, q.start, q.time, h, lhs, rhs};
                    return report;
                }
            }
        }
    }
    return report;
}

HomogeneityReport check_time_homogeneity(const DetFamily& family, const ProbeGrid& grid, double tol) {
    return check_time_homogeneity([&](double x, double t) { return det_family_eval(family, x, t); }, grid, tol);
}

std::vector<double> rational_grid(double lo, double hi, int denominator) {
    if (denominator <= 0 || !(hi >= lo)) throw ValidationError("rational_grid: need denominator > 0 and hi >= lo");
    std::vector<double> out;
    const auto first = static_cast<long>(std::ceil(lo * denominator));
    const auto last = static_cast<long>(std::floor(hi * denominator));
    for (long i = first; i <= last; ++i) out.push_back(static_cast<double>(i) / denominator);
    return out;
}

std::vector<double> quadratic_orbit_grid(int m_max, int denominator) {
    if (m_max < 0 || denominator <= 0) throw ValidationError("quadratic_orbit_grid: invalid arguments");
    std::vector<double> out;
    for (int m = 0; m <= m_max; ++m) {
        for (int j = 0; j < denominator; ++j) {
            out.push_back(static_cast<double>(m) * m + static_cast<double>(j) / (2.0 * denominator));
        }
    }
    return out;
}

}  // namespace psym
