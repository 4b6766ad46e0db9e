#include "dendrite/gamma_functional.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace dendrite {

namespace {

void check_horizon(const RateCurve& g, double t)
{
    if (t < g.t0() || t > g.t_end() * (1.0 + 1e-12)) throw std::out_of_range("Gamma: t beyond the rate-curve grid");
}

struct QuadNode {
    double offset;  // tau - s_{k+1}, <= 0
    double weight;  // Simpson weight times sqrt(g(tau))
};

// Simpson nodes on every piece of [a, b] where g is linear.
std::vector<QuadNode> step_nodes(const RateCurve& g, double a, double b)
{
    std::vector<QuadNode> nodes;
    auto pts = curve_pieces(g, a, b);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double lo = pts[i - 1], hi = pts[i];
        double ga = g(lo), gb = g(hi);
        double h = (hi - lo) / 6.0;
        nodes.push_back({lo - b, h * std::sqrt(ga)});
        nodes.push_back({0.5 * (lo + hi) - b, 4.0 * h * std::sqrt(0.5 * (ga + gb))});
        nodes.push_back({hi - b, h * std::sqrt(gb)});
    }
    return nodes;
}

}  // namespace

double gamma_closed_form(const RateCurve& g, double t, double rho, double H0)
{
    check_horizon(g, t);
    return std::sqrt(2.0 * rho * H0) * integral_sqrt(g, g.t0(), t);
}

double gamma_upper_bound(const RateCurve& g, double t, double rho, double H_sup)
{
    check_horizon(g, t);
    return std::sqrt(2.0 * rho * H_sup) * integral_sqrt(g, g.t0(), t);
}

double gamma_modulus(const RateCurve& g, const RateCurve& g2, double t, double rho, double H_sup)
{
    check_horizon(g, t);
    check_horizon(g2, t);
    auto pts = curve_pieces(g, g.t0(), t);
    auto pts2 = curve_pieces(g2, g.t0(), t);
    pts.insert(pts.end(), pts2.begin(), pts2.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double total = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double lo = pts[i - 1], hi = pts[i];
        double a1 = g(lo), b1 = g(hi), a2 = g2(lo), b2 = g2(hi);
        double d0 = std::abs(std::sqrt(a1) - std::sqrt(a2));
        double dm = std::abs(std::sqrt(0.5 * (a1 + b1)) - std::sqrt(0.5 * (a2 + b2)));
        double d1 = std::abs(std::sqrt(b1) - std::sqrt(b2));
        total += (hi - lo) / 6.0 * (d0 + 4.0 * dm + d1);
    }
    return std::sqrt(2.0 * rho * H_sup) * total;
}

GammaResult gamma_variational(const RateCurve& g, const FunctionSpec& H, double t, double rho, double L,
                              const PathLattice& lat)
{
    check_horizon(g, t);
    if (lat.M < 1 || lat.P < 1 || lat.Q < 0) throw std::invalid_argument("gamma_variational: infeasible lattice");
    if (!(rho > 0.0) || !(L > 0.0)) throw std::invalid_argument("gamma_variational: rho and L must be positive");

    const std::size_t M = lat.M, P = lat.P;
    const int Q = lat.Q;
    const double ds = (t - g.t0()) / static_cast<double>(M);
    const double dx = L / static_cast<double>(P);
    const double scale = std::sqrt(2.0 / rho);
    const double H_sup = H.sup_on(0.0, L);

    std::vector<double> slope(2 * Q + 1), speed_factor(2 * Q + 1);
    for (int q = -Q; q <= Q; ++q) {
        double s = rho * q / (Q + 1);
        slope[q + Q] = s;
        speed_factor[q + Q] = scale * std::sqrt(rho * rho - s * s);
    }

    auto sqrt_H = [&](double x) { return std::sqrt(std::max(0.0, H(x))); };
    auto interp = [&](const std::vector<double>& V, double x) {
        double pos = x / dx;
        auto j = static_cast<std::size_t>(pos);
        if (j >= P) return V[P];
        double f = pos - static_cast<double>(j);
        return V[j] + f * (V[j + 1] - V[j]);
    };

    GammaResult r;
    r.times.resize(M + 1);
    r.values.resize(M + 1);
    r.times[0] = g.t0();
    r.values[0] = 0.0;

    std::vector<double> V(P + 1, 0.0), W(P + 1);
    std::vector<std::int8_t> choice(M * (P + 1), 0);
    const double slack = 1e-12 * L;
    double bound_sum = 0.0;

    for (std::size_t k = 0; k < M; ++k) {
        double a = g.t0() + ds * static_cast<double>(k);
        double b = k + 1 == M ? t : g.t0() + ds * static_cast<double>(k + 1);
        auto nodes = step_nodes(g, a, b);
        double wsum = 0.0;
        for (const auto& n : nodes) wsum += n.weight;
        bound_sum += wsum;
        double step = b - a;

        for (std::size_t j = 0; j <= P; ++j) {
            double xj = dx * static_cast<double>(j);
            double best = -std::numeric_limits<double>::infinity();
            int arg = 0;
            for (int q = -Q; q <= Q; ++q) {
                double s = slope[q + Q];
                double x0 = xj - s * step;
                if (x0 < -slack || x0 > L + slack) continue;
                x0 = std::clamp(x0, 0.0, L);
                double seg = 0.0;
                if (wsum > 0.0) {
                    for (const auto& n : nodes) seg += n.weight * sqrt_H(std::clamp(xj + s * n.offset, 0.0, L));
                    seg *= speed_factor[q + Q];
                }
                double total = interp(V, x0) + seg;
                if (total > best) {
                    best = total;
                    arg = q;
                }
            }
            W[j] = best;
            choice[k * (P + 1) + j] = static_cast<std::int8_t>(arg);
        }
        V.swap(W);
        r.times[k + 1] = b;
        r.values[k + 1] = V[0];
    }
    r.value = V[0];
    r.bound = std::sqrt(2.0 * rho * H_sup) * bound_sum;

    // backtrack along the stored choices from the soma
    std::vector<std::pair<double, double>> path(M + 1);
    double x = 0.0;
    path[M] = {t, 0.0};
    for (std::size_t k = M; k-- > 0;) {
        auto j = static_cast<std::size_t>(std::lround(x / dx));
        j = std::min(j, P);
        int q = choice[k * (P + 1) + j];
        x = std::clamp(x - slope[q + Q] * (r.times[k + 1] - r.times[k]), 0.0, L);
        path[k] = {r.times[k], x};
    }
    r.path = std::move(path);
    return r;
}

void write_path_csv(std::ostream& out, const GammaResult& r)
{
    char buf[96];
    out << "s,x\n";
    for (const auto& [s, x] : r.path) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s, x);
        out << buf;
    }
}

}  // namespace dendrite
