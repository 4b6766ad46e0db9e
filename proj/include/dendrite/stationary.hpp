#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <vector>

namespace dendrite {

/// Stationary problem for F(v) = I - v, v_min = 0, lambda(v) = (v - alpha)_+^p.
struct StationaryConfig {
    double alpha = 1.0;
    int p = 4;
    double gamma = 5.0;
    double I = 1.0;
    /// scan of a over (a_lo, a_hi]; a_hi <= 0 means alpha + 20
    double a_lo = 0.0;
    double a_hi = 0.0;
    std::size_t resolution = 2000;
    double tangency_tol = 1e-6;

    double scan_hi() const { return a_hi > 0.0 ? a_hi : alpha + 20.0; }
};

/// g_p(x) = x + x^2/2 + ... + x^p/p.
double g_p(double x, int p);

/// int_0^u lambda(a y) / (1 - y) dy in closed form. Requires u in [0, 1).
double inner_exponent(double u, double a, double alpha, int p);

struct KaValue {
    double value = std::numeric_limits<double>::infinity();
    /// quadrature error estimate
    double error = 0.0;
    bool infinite() const { return value == std::numeric_limits<double>::infinity(); }
};

enum class KaBranch {
    automatic,
    /// z = 1 - exp(-r / (a - alpha)^p) on [0, R], tail below 1e-14; used for a < alpha + 1
    exponential,
    /// integral over z in [0, 1]; used for a >= alpha + 1
    uniform,
};

/// K_a, +infinity for a <= alpha. Throws std::runtime_error when the quadrature
/// error estimate exceeds 1e-8 relative (the message carries the estimate).
KaValue compute_Ka(double a, double alpha, int p, KaBranch branch = KaBranch::automatic);

/// Density of g_a at v in [0, a), given K_a; zero outside.
double g_a_value(double v, double a, double alpha, int p, double Ka);

struct GaSamples {
    /// a <= alpha: g_a is the atom at a and `density` is empty.
    bool atom = false;
    double atom_at = 0.0;
    std::vector<double> v;
    std::vector<double> density;
};

GaSamples g_a_density(double a, double alpha, int p, const std::vector<double>& v_grid);

/// phi_gamma(a) = a - sqrt(gamma / K_a), equal to a where K_a is infinite.
double phi_gamma(double a, double gamma, double alpha, int p);

struct RootReport {
    std::vector<double> roots;
    /// near-zero minima of |phi - I| without a sign change
    std::vector<double> tangencies;
    std::size_t count() const { return roots.size(); }
};

/// Sign-change scan of phi_gamma - I over `resolution` points, then bisection to 1e-8.
/// Requires resolution >= 1000.
RootReport count_roots(const StationaryConfig& cfg);

/// K_a on a uniform scan grid. Reused across gamma since K_a does not depend on it.
struct KaGrid {
    double alpha = 0.0;
    int p = 1;
    std::vector<double> a;
    std::vector<double> K;

    double phi(std::size_t i, double gamma) const;
    /// Sign changes of phi_gamma - I on the grid (exact zeros count once).
    std::size_t root_count(double gamma, double I) const;
    /// Largest drop of phi_gamma between a point and any later one; 0 when monotone.
    double largest_drop(double gamma) const;
};

KaGrid ka_grid(double alpha, int p, double a_lo, double a_hi, std::size_t resolution);

struct CriticalGammas {
    /// onset of non-monotone phi (three roots for some I)
    double gamma1_lo = 0.0, gamma1_hi = 0.0;
    /// three roots already for I = probe_I
    double gamma2_lo = 0.0, gamma2_hi = 0.0;
    bool gamma1_found = false;
    bool gamma2_found = false;
};

/// Brackets gamma_1 and gamma_2 by bisection in [g_lo, g_hi] on the grid root-count function,
/// down to bracket width `tol`. A drop counts as non-monotone above `drop_tol`.
CriticalGammas critical_gammas(const KaGrid& grid, double g_lo, double g_hi, double tol = 1e-3,
                               double probe_I = 1e-3, double drop_tol = 1e-9);

struct BifurcationRow {
    double gamma = 0.0;
    double I = 0.0;
    std::size_t roots = 0;
};

std::vector<BifurcationRow> bifurcation_table(const StationaryConfig& base, const std::vector<double>& gammas,
                                              const std::vector<double>& Is);

/// CSV `a,K_a,phi_gamma`; infinite K_a is written as `inf`.
void write_phi_scan_csv(std::ostream& out, const KaGrid& grid, double gamma);
/// CSV `gamma,I,root_count`.
void write_bifurcation_csv(std::ostream& out, const std::vector<BifurcationRow>& rows);

}  // namespace dendrite
