#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "dendrite/function_spec.hpp"
#include "dendrite/rate_curve.hpp"

namespace dendrite {

/// sqrt(2 rho H0) * int_0^t sqrt(g). Exact value of Gamma_t(g) when H is maximal at 0.
double gamma_closed_form(const RateCurve& g, double t, double rho, double H0);

/// sqrt(2 rho sup H) * int_0^t sqrt(g).
double gamma_upper_bound(const RateCurve& g, double t, double rho, double H_sup);

/// sqrt(2 rho sup H) * int_0^t |sqrt(g) - sqrt(g2)|, bounding |Gamma_t(g) - Gamma_t(g2)|.
double gamma_modulus(const RateCurve& g, const RateCurve& g2, double t, double rho, double H_sup);

/// Lattice for the variational problem: M time steps over [0, t], P cells over
/// [0, L], slopes k rho / (Q + 1) for |k| <= Q.
struct PathLattice {
    std::size_t M = 400;
    std::size_t P = 400;
    int Q = 32;
};

struct GammaResult {
    /// Gamma at the final time.
    double value = 0.0;
    /// Gamma_{s_k}(g) for every lattice time s_k = k t / M (one forward sweep yields them all).
    std::vector<double> times;
    std::vector<double> values;
    /// The same quadrature with H replaced by sup H: the DP can never exceed it.
    double bound = 0.0;
    /// Maximizing path (s, x), from s = 0 to s = t, recovered on the lattice.
    std::vector<std::pair<double, double>> path;
};

/// Sup over lattice paths ending at the soma of
/// sqrt(2/rho) int_0^t sqrt(H(beta) g (rho^2 - beta'^2)) ds.
/// Forward dynamic programming with linear interpolation of the value function
/// between x-nodes; the time integral is Simpson on the pieces where g is linear.
GammaResult gamma_variational(const RateCurve& g, const FunctionSpec& H, double t, double rho, double L,
                              const PathLattice& lattice = {});

/// CSV `s,x` of the maximizing path.
void write_path_csv(std::ostream& out, const GammaResult& r);

}  // namespace dendrite
