#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace dendrite {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive Gauss-Kronrod (G15/K31) on a finite interval.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double tol = 1e-12, unsigned max_depth = 20)
{
    QuadratureResult r;
    if (a == b) return r;
    // Boost compares its error estimate against an absolute floor, so short intervals
    // never terminate; integrate on [0, 1] and rescale. Below ~1e-12 the estimate stalls at roundoff.
    tol = std::max(tol, 1e-12);
    const double h = b - a;
    auto unit = [&](double u) { return f(a + h * u); };
    double err = 0.0;
    r.value = h * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(unit, 0.0, 1.0, max_depth, tol, &err);
    r.error = std::abs(h) * err;
    return r;
}

/// Tanh-sinh for integrands with integrable endpoint singularities.
template <class F>
QuadratureResult integrate_singular(F&& f, double a, double b, double tol = 1e-12)
{
    QuadratureResult r;
    if (a == b) return r;
    // integrate() extends the abscissa tables lazily, so one instance per thread
    thread_local boost::math::quadrature::tanh_sinh<double> ts(15);
    double err = 0.0;
    double l1 = 0.0;
    r.value = ts.integrate(f, a, b, tol, &err, &l1);
    r.error = err;
    return r;
}

inline double ipow(double x, int p)
{
    double result = 1.0;
    unsigned e = static_cast<unsigned>(p);
    while (e) {
        if (e & 1u) result *= x;
        x *= x;
        e >>= 1u;
    }
    return result;
}

}  // namespace dendrite
