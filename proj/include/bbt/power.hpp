#pragma once

#include <cmath>

#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "bbt/error.hpp"

namespace bbt {

// Two-sided power of a t-test with n observations per group (or n pairs).
inline double t_test_power(double d, double n, double alpha, bool paired) {
    const double df = paired ? n - 1.0 : 2.0 * n - 2.0;
    const double ncp = paired ? d * std::sqrt(n) : d * std::sqrt(n / 2.0);
    const double q = boost::math::quantile(boost::math::complement(boost::math::students_t(df), alpha / 2.0));
    const boost::math::non_central_t nct(df, ncp);
    return boost::math::cdf(boost::math::complement(nct, q)) + boost::math::cdf(nct, -q);
}

// Smallest real n reaching the requested two-sided power, by bisection.
inline double t_test_power_n(double d, double alpha, double power, bool paired) {
    if (!(d > 0) || !std::isfinite(d)) throw ConfigError("effect size must be > 0");
    if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must be in (0, 1)");
    if (!(power > 0 && power < 1)) throw ConfigError("power must be in (0, 1)");
    if (power <= alpha) throw ConfigError("power must exceed alpha");
    double lo = 2.0, hi = 1e7;
    if (t_test_power(d, lo, alpha, paired) >= power) return lo;
    if (t_test_power(d, hi, alpha, paired) < power) throw ConfigError("requested power is not attainable");
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (t_test_power(d, mid, alpha, paired) >= power ? hi : lo) = mid;
    }
    return hi;
}

} // namespace bbt
