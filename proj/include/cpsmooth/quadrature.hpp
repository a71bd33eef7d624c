// Composite Simpson quadrature with a one-level refinement check.
//
// Integrands here are smooth oscillatory functions of a characteristic
// function (occasionally with |.| kinks), so plain Simpson converges fast;
// the doubled-resolution pass certifies the requested relative accuracy and
// numeric_error is thrown when the two levels disagree.

#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "errors.hpp"

namespace cpsmooth {

struct QuadratureOptions {
    int subdivisions = 2048; // initial even number of subintervals
    double rel_tol = 1e-6;   // refinement agreement requirement
};

namespace detail {

template <typename F>
double simpson_pass(F&& f, double a, double b, int n) {
    const double step = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += f(a + i * step) * (i % 2 ? 4.0 : 2.0);
    return sum * step / 3.0;
}

} // namespace detail

/// Integrate f over [a, b]; the result is the refined (2n) pass, accepted
/// only if it agrees with the n pass to rel_tol.
template <typename F>
double integrate(F&& f, double a, double b, QuadratureOptions opts = {}) {
    if (!(a < b)) throw input_error("integrate: empty or inverted interval");
    int n = opts.subdivisions;
    if (n < 2) n = 2;
    if (n % 2) ++n;
    const double coarse = detail::simpson_pass(f, a, b, n);
    const double fine = detail::simpson_pass(f, a, b, 2 * n);
    const double scale = std::max(std::abs(fine), 1e-300);
    if (std::abs(fine - coarse) > opts.rel_tol * scale + 1e-14)
        throw numeric_error("integrate: refinement check failed (coarse " +
                            std::to_string(coarse) + ", fine " + std::to_string(fine) + ")");
    return fine;
}

} // namespace cpsmooth
