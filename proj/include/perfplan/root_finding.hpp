#pragma once

#include <cmath>
#include <functional>

#include "perfplan/errors.hpp"

namespace perfplan::detail {

// Bisection for an increasing function f with f(lo) <= 0 <= f(hi).
// Stops when |f(mid)| <= f_tol or the bracket collapses.
inline double bisect_increasing(const std::function<double(double)>& f,
                                double lo, double hi, double f_tol,
                                int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo > 0.0 || fhi < 0.0)
        throw DomainError("bisect_increasing: root not bracketed");
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    double mid = 0.5 * (lo + hi);
    for (int i = 0; i < max_iter; ++i) {
        mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::fabs(fm) <= f_tol) return mid;
        if (fm < 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * std::max(1.0, std::fabs(mid))) break;
    }
    return 0.5 * (lo + hi);
}

// Bisection in log-space for an increasing f over a positive bracket that
// may span hundreds of decades. Same stopping rule as above.
inline double bisect_increasing_log(const std::function<double(double)>& f,
                                    double lo, double hi, double f_tol,
                                    int max_iter = 400) {
    double llo = std::log(lo);
    double lhi = std::log(hi);
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo > 0.0 || fhi < 0.0)
        throw DomainError("bisect_increasing_log: root not bracketed");
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    double mid = std::exp(0.5 * (llo + lhi));
    for (int i = 0; i < max_iter; ++i) {
        mid = std::exp(0.5 * (llo + lhi));
        const double fm = f(mid);
        if (std::fabs(fm) <= f_tol) return mid;
        if (fm < 0.0)
            llo = std::log(mid);
        else
            lhi = std::log(mid);
        if (lhi - llo <= 4e-16) break;
    }
    return mid;
}

} // namespace perfplan::detail
