#include "dendrite/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dendrite/quadrature.hpp"

namespace dendrite {

namespace {

void check_shape(double alpha, int p)
{
    if (!(alpha >= 0.0) || p < 1) throw std::invalid_argument("stationary: need alpha >= 0 and p >= 1");
}

// R(z) = -log(1 - z) - g_p(z) = sum_{k > p} z^k / k, with L = -log(1 - z) supplied.
// The series avoids the cancellation for small z.
double remainder(double z, double L, int p)
{
    if (z >= 0.5) return std::max(0.0, L - g_p(z, p));
    double term = ipow(z, p + 1), sum = 0.0;
    for (int k = p + 1; k < p + 200; ++k) {
        double add = term / k;
        sum += add;
        if (add < 1e-17 * sum) break;
        term *= z;
    }
    return sum;
}

std::runtime_error quadrature_failure(double a, double err)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, "compute_Ka: quadrature did not converge at a=%.6g (error %.3g)", a, err);
    return std::runtime_error(buf);
}

}  // namespace

double g_p(double x, int p)
{
    double s = 0.0, term = 1.0;
    for (int k = 1; k <= p; ++k) {
        term *= x;
        s += term / k;
    }
    return s;
}

double inner_exponent(double u, double a, double alpha, int p)
{
    check_shape(alpha, p);
    if (!(u >= 0.0 && u < 1.0)) throw std::out_of_range("inner_exponent: u must lie in [0, 1)");
    if (!(a > alpha)) throw std::invalid_argument("inner_exponent: a > alpha required");
    if (a * u <= alpha) return 0.0;
    double c = a - alpha;
    double z = (a * u - alpha) / c;
    // -log(a (1 - u) / c) = -log(1 - z)
    return ipow(c, p) * remainder(z, -std::log1p(-z), p);
}

KaValue compute_Ka(double a, double alpha, int p, KaBranch branch)
{
    check_shape(alpha, p);
    if (!(a > 0.0)) throw std::invalid_argument("compute_Ka: a > 0 required");
    KaValue out;
    if (a <= alpha) return out;
    double c = a - alpha;
    double beta = ipow(c, p);
    if (branch == KaBranch::automatic) branch = c < 1.0 ? KaBranch::exponential : KaBranch::uniform;
    double head = std::log(a / c);
    QuadratureResult q;
    if (branch == KaBranch::exponential) {
        // integrand exp(-beta R(z)), z = 1 - exp(-r / beta); below exp(beta H_p - r) beyond R
        auto f = [&](double r) {
            double L = r / beta;
            double z = -std::expm1(-L);
            return std::exp(-beta * remainder(z, L, p));
        };
        double R = beta * g_p(1.0, p) - std::log(beta) + 14.0 * std::log(10.0);
        // the integrand leaves its plateau near r = 1
        double knee = std::min(R, 1.0 + beta * g_p(1.0, p));
        auto q1 = integrate(f, 0.0, knee, 1e-12);
        auto q2 = integrate(f, knee, R, 1e-12);
        q.value = (q1.value + q2.value) / beta;
        q.error = (q1.error + q2.error) / beta;
    } else {
        // (1 - z)^(beta - 1) exp(beta g_p(z)) = exp(-beta R(z)) / (1 - z)
        auto f = [&](double z) {
            if (z >= 1.0) return beta == 1.0 ? std::exp(g_p(1.0, p)) : 0.0;
            double L = -std::log1p(-z);
            return std::exp(-beta * remainder(z, L, p) + L);
        };
        if (beta >= 1.0)
            q = integrate_singular(f, 0.0, 1.0, 1e-12);
        else
            throw std::invalid_argument("compute_Ka: the uniform branch needs a >= alpha + 1");
    }
    out.value = head + q.value;
    out.error = q.error;
    if (!(out.error <= 1e-8 * out.value)) throw quadrature_failure(a, out.error);
    return out;
}

double g_a_value(double v, double a, double alpha, int p, double Ka)
{
    if (!(v >= 0.0 && v < a)) return 0.0;
    return std::exp(-inner_exponent(v / a, a, alpha, p)) / (Ka * (a - v));
}

GaSamples g_a_density(double a, double alpha, int p, const std::vector<double>& v_grid)
{
    GaSamples out;
    auto K = compute_Ka(a, alpha, p);
    if (K.infinite()) {
        out.atom = true;
        out.atom_at = a;
        return out;
    }
    out.v = v_grid;
    out.density.reserve(v_grid.size());
    for (double v : v_grid) out.density.push_back(g_a_value(v, a, alpha, p, K.value));
    return out;
}

double phi_gamma(double a, double gamma, double alpha, int p)
{
    if (!(gamma > 0.0)) throw std::invalid_argument("phi_gamma: gamma > 0 required");
    if (a == 0.0) return 0.0;
    auto K = compute_Ka(a, alpha, p);
    return K.infinite() ? a : a - std::sqrt(gamma / K.value);
}

RootReport count_roots(const StationaryConfig& cfg)
{
    if (cfg.resolution < 1000) throw std::invalid_argument("count_roots: resolution >= 1000 required");
    double lo = cfg.a_lo, hi = cfg.scan_hi();
    if (!(hi > lo) || lo < 0.0) throw std::invalid_argument("count_roots: bad scan range");
    auto f = [&](double a) { return phi_gamma(a, cfg.gamma, cfg.alpha, cfg.p) - cfg.I; };
    RootReport rep;
    std::size_t n = cfg.resolution;
    std::vector<double> a(n + 1), y(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        a[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        y[i] = f(a[i]);
    }
    for (std::size_t i = 1; i <= n; ++i) {
        if (y[i] == 0.0) {
            rep.roots.push_back(a[i]);
            continue;
        }
        if (y[i - 1] == 0.0 && i > 1) continue;  // counted at the previous node
        if ((y[i - 1] < 0.0) != (y[i] < 0.0) && y[i - 1] != 0.0) {
            double l = a[i - 1], r = a[i], fl = y[i - 1];
            while (r - l > 1e-8) {
                double m = 0.5 * (l + r);
                double fm = f(m);
                if ((fm < 0.0) == (fl < 0.0)) {
                    l = m;
                    fl = fm;
                } else {
                    r = m;
                }
            }
            rep.roots.push_back(0.5 * (l + r));
        }
    }
    if (y[0] == 0.0 && lo > 0.0) rep.roots.insert(rep.roots.begin(), a[0]);
    for (std::size_t i = 1; i < n; ++i) {
        double m = std::abs(y[i]);
        bool local_min = m <= std::abs(y[i - 1]) && m <= std::abs(y[i + 1]);
        bool same_sign = (y[i - 1] < 0.0) == (y[i] < 0.0) && (y[i + 1] < 0.0) == (y[i] < 0.0);
        if (local_min && same_sign && y[i] != 0.0 && m < cfg.tangency_tol) rep.tangencies.push_back(a[i]);
    }
    return rep;
}

double KaGrid::phi(std::size_t i, double gamma) const
{
    if (a[i] == 0.0 || std::isinf(K[i])) return a[i];
    return a[i] - std::sqrt(gamma / K[i]);
}

std::size_t KaGrid::root_count(double gamma, double I) const
{
    std::size_t roots = 0;
    double prev = phi(0, gamma) - I;
    if (prev == 0.0 && a[0] > 0.0) ++roots;
    for (std::size_t i = 1; i < a.size(); ++i) {
        double y = phi(i, gamma) - I;
        if (y == 0.0 || (prev != 0.0 && (prev < 0.0) != (y < 0.0))) ++roots;
        prev = y;
    }
    return roots;
}

double KaGrid::largest_drop(double gamma) const
{
    double peak = -std::numeric_limits<double>::infinity(), drop = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double y = phi(i, gamma);
        peak = std::max(peak, y);
        drop = std::max(drop, peak - y);
    }
    return drop;
}

KaGrid ka_grid(double alpha, int p, double a_lo, double a_hi, std::size_t resolution)
{
    if (!(a_hi > a_lo) || a_lo < 0.0 || resolution < 1) throw std::invalid_argument("ka_grid: bad scan range");
    KaGrid g;
    g.alpha = alpha;
    g.p = p;
    for (std::size_t i = 0; i <= resolution; ++i) {
        double a = a_lo + (a_hi - a_lo) * static_cast<double>(i) / static_cast<double>(resolution);
        g.a.push_back(a);
        g.K.push_back(a > 0.0 ? compute_Ka(a, alpha, p).value : std::numeric_limits<double>::infinity());
    }
    return g;
}

CriticalGammas critical_gammas(const KaGrid& grid, double g_lo, double g_hi, double tol, double probe_I,
                               double drop_tol)
{
    CriticalGammas out;
    // both predicates grow with gamma since phi_gamma decreases in gamma pointwise
    auto bracket = [&](auto&& pred, double& lo, double& hi) {
        if (pred(g_lo) || !pred(g_hi)) return false;
        lo = g_lo;
        hi = g_hi;
        while (hi - lo > tol) {
            double m = 0.5 * (lo + hi);
            (pred(m) ? hi : lo) = m;
        }
        return true;
    };
    auto three_somewhere = [&](double g) {
        double drop = grid.largest_drop(g);
        if (drop <= drop_tol) return false;
        // an I > 0 in the middle of the dip crosses phi three times
        double peak = -std::numeric_limits<double>::infinity(), best = 0.0, I = 0.0;
        for (std::size_t i = 0; i < grid.a.size(); ++i) {
            double y = grid.phi(i, g);
            peak = std::max(peak, y);
            if (peak - y > best) {
                best = peak - y;
                I = 0.5 * (peak + std::max(y, 0.0));
            }
        }
        return grid.root_count(g, I) >= 3;
    };
    auto three_small = [&](double g) { return grid.root_count(g, probe_I) >= 3; };
    out.gamma1_found = bracket(three_somewhere, out.gamma1_lo, out.gamma1_hi);
    out.gamma2_found = bracket(three_small, out.gamma2_lo, out.gamma2_hi);
    return out;
}

std::vector<BifurcationRow> bifurcation_table(const StationaryConfig& base, const std::vector<double>& gammas,
                                              const std::vector<double>& Is)
{
    auto grid = ka_grid(base.alpha, base.p, base.a_lo, base.scan_hi(), base.resolution);
    std::vector<BifurcationRow> rows;
    for (double g : gammas)
        for (double I : Is) rows.push_back({g, I, grid.root_count(g, I)});
    return rows;
}

void write_phi_scan_csv(std::ostream& out, const KaGrid& grid, double gamma)
{
    char buf[128];
    out << "a,K_a,phi_gamma\n";
    for (std::size_t i = 0; i < grid.a.size(); ++i) {
        if (std::isinf(grid.K[i]))
            std::snprintf(buf, sizeof buf, "%.17g,inf,%.17g\n", grid.a[i], grid.phi(i, gamma));
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", grid.a[i], grid.K[i], grid.phi(i, gamma));
        out << buf;
    }
}

void write_bifurcation_csv(std::ostream& out, const std::vector<BifurcationRow>& rows)
{
    char buf[96];
    out << "gamma,I,root_count\n";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu\n", r.gamma, r.I, r.roots);
        out << buf;
    }
}

}  // namespace dendrite
