#pragma once

// Independent reference computations used by the tests. None of these call
// into the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace oracle {

// Cantor function of the exact rational num / 2^shift (num < 2^shift, shift
// <= 100) by schoolbook ternary expansion: digits 0/2 map to binary 0/1 and
// the first digit 1 terminates with a binary 1. 64 binary digits are kept
// after the first nonzero one, then rounded to double.
inline double cantor_dyadic(unsigned __int128 num, unsigned shift) {
    const unsigned __int128 den = static_cast<unsigned __int128>(1) << shift;
    if (num >= den) return 1.0;
    unsigned __int128 r = num;
    std::uint64_t bits = 0;
    int exponent = 0;  // value = bits * 2^-exponent
    int kept = 0;
    while (r != 0 && kept < 64) {
        r *= 3;
        const auto digit = static_cast<unsigned>(r / den);
        r %= den;
        ++exponent;
        bits = (bits << 1) | (digit == 0 ? 0u : 1u);
        if (bits != 0) ++kept;
        if (digit == 1) break;
    }
    return std::ldexp(static_cast<double>(bits), -exponent);
}

// Cantor function of a double in [0, 1).
inline double cantor(double t) {
    int e = 0;
    const double m = std::frexp(t, &e);  // t = m 2^e, m in [0.5, 1)
    if (t == 0.0) return 0.0;
    const auto mant = static_cast<std::uint64_t>(std::ldexp(m, 53));
    const int shift = 53 - e;
    return cantor_dyadic(mant, static_cast<unsigned>(shift));
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

// Critical value of the two-sample KS statistic at level alpha.
inline double ks_critical(std::size_t n, std::size_t m, double alpha) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt(static_cast<double>(n + m) / static_cast<double>(n * m));
}

// -(E e^{i xi Z} - 1) / t for Z ~ N(mean, var), the exact Gaussian quotient.
inline std::complex<double> gaussian_quotient(double mean, double var, double xi, double t) {
    const std::complex<double> cf = std::exp(std::complex<double>(-0.5 * xi * xi * var, xi * mean));
    return -(cf - 1.0) / t;
}

// Least-squares slope of y against x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace oracle
