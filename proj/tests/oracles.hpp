#pragma once

// Test-only oracles, independent of the library's evaluation paths.

#include <cmath>

#include "hilfer/special_functions.hpp"

namespace oracles {

/// Straight long-double Mittag-Leffler partial sum; no stopping logic.
inline double ml_series(double alpha, double beta, double z, int terms = 400) {
    long double sum = 0.0L, zk = 1.0L;
    for (int k = 0; k < terms; ++k) {
        sum += zk * hilfer::detail::rgamma_ld(static_cast<long double>(alpha) * k + beta);
        zk *= z;
    }
    return static_cast<double>(sum);
}

/// erfcx(x) = e^{x^2} erfc(x) for large x via the asymptotic series.
inline double erfcx_asymptotic(double x) {
    const double inv2x2 = 1.0 / (2.0 * x * x);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 12; ++k) {
        term *= -(2.0 * k - 1.0) * inv2x2;
        sum += term;
    }
    return sum / (x * std::sqrt(hilfer::detail::pi));
}

} // namespace oracles
