#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "doctest.h"
#include "dendrite/quadrature.hpp"
#include "dendrite/rng.hpp"
#include "dendrite/stationary.hpp"

using namespace dendrite;

namespace {

double lam(double v, double alpha, int p) { return v > alpha ? std::pow(v - alpha, p) : 0.0; }

// K_a from its defining double integral with u = 1 - e^{-s} and y = 1 - e^{-t}:
// K_a = int_0^inf exp(-int_0^s lambda(a (1 - e^{-t})) dt) ds, both layers by adaptive quadrature.
double Ka_nested(double a, double alpha, int p)
{
    double t0 = -std::log1p(-alpha / a);  // lambda vanishes before t0
    auto inner = [&](double s) {
        if (s <= t0) return 0.0;
        return integrate([&](double t) { return lam(-a * std::expm1(-t), alpha, p); }, t0, s, 1e-12).value;
    };
    boost::math::quadrature::exp_sinh<double> es;
    return es.integrate([&](double s) { return std::exp(-inner(s)); }, 1e-10);
}

// int_0^a h(v) g_a(v) dv with v = a (1 - e^{-s}); the exponent is evaluated from
// -log(1 - z) = s - log(a / c) so that large s stays exact.
template <class Weight>
double ga_moment(double a, double alpha, int p, double K, Weight&& h)
{
    double c = a - alpha, beta = std::pow(c, p);
    auto f = [&](double s) {
        double v = -a * std::expm1(-s);
        double z = 1.0 - (a / c) * std::exp(-s);
        double expo = z > 0.0 ? beta * ((s - std::log(a / c)) - g_p(z, p)) : 0.0;
        return h(v) * std::exp(-expo) / K;
    };
    boost::math::quadrature::exp_sinh<double> es;
    return es.integrate(f, 1e-12);
}

}  // namespace

TEST_CASE("g_p and the inner exponent")
{
    CHECK(g_p(0.5, 3) == doctest::Approx(0.5 + 0.125 + 0.125 / 3.0).epsilon(1e-15));
    CHECK(inner_exponent(0.4, 2.0, 1.0, 4) == 0.0);
    CHECK(inner_exponent(0.5, 2.0, 1.0, 4) == 0.0);
    double quad = integrate([](double y) { return std::max(0.0, 2.0 * y - 1.0) / (1.0 - y); }, 0.5, 0.9, 1e-12).value;
    CHECK(std::abs(inner_exponent(0.9, 2.0, 1.0, 1) - quad) <= 1e-10);
    // small arguments go through the series; compare with quadrature as well
    double q4 = integrate([](double y) { return std::pow(std::max(0.0, 3.0 * y - 1.0), 4) / (1.0 - y); }, 1.0 / 3.0,
                          0.34, 1e-12)
                    .value;
    CHECK(inner_exponent(0.34, 3.0, 1.0, 4) == doctest::Approx(q4).epsilon(1e-10));
    double prev = 0.0;
    for (int i = 0; i < 1000; ++i) {
        double v = inner_exponent(0.999 * i / 1000.0, 2.5, 1.0, 3);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK_THROWS_AS(inner_exponent(1.0, 2.0, 1.0, 1), std::out_of_range);
}

TEST_CASE("K_a: infinite up to alpha, finite and decreasing beyond")
{
    CHECK(compute_Ka(1.0, 1.0, 4).infinite());
    CHECK(compute_Ka(0.3, 1.0, 4).infinite());
    CHECK_THROWS_AS(compute_Ka(0.0, 1.0, 4), std::invalid_argument);
    auto grid = ka_grid(1.0, 4, 0.0, 21.0, 2000);
    for (std::size_t i = 1; i < grid.K.size(); ++i) {
        if (grid.a[i] <= 1.0) CHECK(std::isinf(grid.K[i]));
        else CHECK(grid.K[i] < grid.K[i - 1]);
    }
    // near alpha the constant behaves like log(a/c) + exp(beta H_p) / beta
    double c = 1e-3, beta = std::pow(c, 4);
    double K = compute_Ka(1.0 + c, 1.0, 4).value;
    CHECK((K - std::log((1.0 + c) / c)) * beta == doctest::Approx(std::exp(beta * g_p(1.0, 4))).epsilon(1e-8));
}

TEST_CASE("K_a: the two branches agree at alpha + 1")
{
    for (auto [alpha, p] : {std::pair{1.0, 4}, {0.0, 2}, {1.0, 2}, {0.0, 4}, {2.5, 3}, {0.5, 1}}) {
        double e = compute_Ka(alpha + 1.0, alpha, p, KaBranch::exponential).value;
        double u = compute_Ka(alpha + 1.0, alpha, p, KaBranch::uniform).value;
        CHECK(std::abs(e - u) <= 1e-6);
    }
    CHECK_THROWS_AS(compute_Ka(1.5, 1.0, 4, KaBranch::uniform), std::invalid_argument);
}

TEST_CASE("K_a against the nested-quadrature definition")
{
    for (auto [a, alpha, p] : {std::tuple{2.5, 1.0, 2}, {1.5, 1.0, 4}, {3.0, 0.0, 2}, {0.7, 0.0, 2}})
        CHECK(compute_Ka(a, alpha, p).value == doctest::Approx(Ka_nested(a, alpha, p)).epsilon(1e-7));
}

TEST_CASE("K_a against Monte Carlo of the uniform-variable form")
{
    // alpha = 1, p = 4, a = 2: beta = 1, K = log 2 + E[exp(g_4(U))]
    SplitMix rng(31);
    const int n = 10000000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = std::exp(g_p(rng.uniform(), 4));
        s += x;
        s2 += x * x;
    }
    double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(compute_Ka(2.0, 1.0, 4).value - (std::log(2.0) + mean)) <= 3.0 * se);
}

TEST_CASE("K_a lower bound for a >= 2")
{
    for (auto [alpha, p] : {std::pair{1.0, 4}, {0.0, 2}, {1.0, 2}, {0.0, 4}})
        for (int i = 0; i <= 80; ++i) {
            double a = 2.0 + 0.1 * i;
            CHECK(compute_Ka(a, alpha, p).value >= std::exp(-lam(1.0, alpha, p)) / a);
        }
}

TEST_CASE("g_a: atom below alpha, probability density above")
{
    auto atom = g_a_density(0.8, 1.0, 4, {0.1, 0.5});
    CHECK(atom.atom);
    CHECK(atom.atom_at == 0.8);
    CHECK(atom.density.empty());
    for (double a : {1.5, 2.0, 4.0}) {
        double K = compute_Ka(a, 1.0, 4).value;
        double mass = ga_moment(a, 1.0, 4, K, [](double) { return 1.0; });
        double flux = ga_moment(a, 1.0, 4, K, [](double v) { return lam(v, 1.0, 4); });
        // the library density is the integrand above divided by dv/ds = a - v
        double beta = std::pow(a - 1.0, 4);
        for (double u : {0.3, 0.6, 0.9, 0.999}) {
            double v = a * u, z = (v - 1.0) / (a - 1.0);
            double expo = z > 0.0 ? beta * (-std::log1p(-z) - g_p(z, 4)) : 0.0;
            CHECK(g_a_value(v, a, 1.0, 4, K) == doctest::Approx(std::exp(-expo) / (K * (a - v))).epsilon(1e-9));
        }
        CHECK(std::abs(mass - 1.0) <= 1e-4);
        CHECK(std::abs(K * flux - 1.0) <= 1e-4);
        std::vector<double> grid;
        for (int i = 0; i < 100; ++i) grid.push_back(a * i / 100.0);
        auto s = g_a_density(a, 1.0, 4, grid);
        CHECK_FALSE(s.atom);
        for (double d : s.density) CHECK(d >= 0.0);
        CHECK(g_a_value(a, a, 1.0, 4, K) == 0.0);
    }
}

TEST_CASE("phi_gamma: identity below alpha, zero at 0, unbounded")
{
    CHECK(phi_gamma(0.0, 5.0, 1.0, 4) == 0.0);
    for (double a : {0.2, 0.7, 1.0}) CHECK(phi_gamma(a, 5.0, 1.0, 4) == a);
    CHECK(phi_gamma(60.0, 5.0, 1.0, 4) > 50.0);
    // continuity across alpha
    CHECK(std::abs(phi_gamma(1.0 + 1e-6, 5.0, 1.0, 4) - 1.0) <= 1e-5);
    CHECK_THROWS_AS(phi_gamma(1.0, 0.0, 1.0, 4), std::invalid_argument);
}

TEST_CASE("roots: I below alpha is always a root")
{
    StationaryConfig cfg;
    cfg.gamma = 20.0;
    for (double I : {0.25, 0.6}) {
        cfg.I = I;
        auto r = count_roots(cfg);
        REQUIRE(!r.roots.empty());
        CHECK(r.roots.front() == doctest::Approx(I).epsilon(1e-7));
    }
    cfg.resolution = 999;
    CHECK_THROWS_AS(count_roots(cfg), std::invalid_argument);
}

TEST_CASE("roots: v^2 has exactly one root on a (gamma, I) grid")
{
    StationaryConfig base;
    base.alpha = 0.0;
    base.p = 2;
    auto rows = bifurcation_table(base, {0.5, 2.0, 5.0, 12.0, 30.0}, {0.2, 0.5, 1.0, 2.0, 4.0});
    REQUIRE(rows.size() == 25);
    for (const auto& r : rows) CHECK(r.roots == 1);
    base.gamma = 5.0;
    base.I = 1.0;
    auto direct = count_roots(base);
    CHECK(direct.count() == 1);
    CHECK(phi_gamma(direct.roots[0], 5.0, 0.0, 2) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("roots: (v-1)_+^4 at gamma = 5 has a three-root window")
{
    StationaryConfig cfg;
    cfg.gamma = 5.0;
    cfg.I = 0.3;
    CHECK(count_roots(cfg).count() == 1);
    cfg.I = 2.0;
    CHECK(count_roots(cfg).count() == 1);
    cfg.I = 0.9;
    auto r = count_roots(cfg);
    REQUIRE(r.count() == 3);
    for (double a : r.roots) CHECK(std::abs(phi_gamma(a, 5.0, 1.0, 4) - 0.9) <= 1e-6);
}

TEST_CASE("roots: tangency is flagged without a sign change")
{
    StationaryConfig cfg;
    cfg.gamma = 5.0;
    // local maximum of phi after alpha, sampled on the scan nodes
    double lo = 0.0, hi = cfg.scan_hi(), peak = -1.0;
    for (std::size_t i = 0; i <= cfg.resolution; ++i) {
        double a = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cfg.resolution);
        if (a > 1.0 && a < 1.6) peak = std::max(peak, phi_gamma(a, cfg.gamma, 1.0, 4));
    }
    cfg.I = peak + 5e-7;
    auto r = count_roots(cfg);
    CHECK(r.tangencies.size() == 1);
}

TEST_CASE("critical gammas for (v-1)_+^4")
{
    auto grid = ka_grid(1.0, 4, 0.0, 21.0, 4000);
    auto c = critical_gammas(grid, 0.1, 50.0);
    REQUIRE(c.gamma1_found);
    REQUIRE(c.gamma2_found);
    CHECK(c.gamma1_hi - c.gamma1_lo <= 1e-3);
    CHECK(c.gamma1_lo >= 1.0);
    CHECK(c.gamma1_hi <= 2.5);
    CHECK(c.gamma2_lo >= 8.0);
    CHECK(c.gamma2_hi <= 16.0);
    CHECK(grid.largest_drop(c.gamma1_lo) <= 1e-9);
    CHECK(grid.root_count(c.gamma2_hi, 1e-3) == 3);

    auto flat = ka_grid(0.0, 2, 0.0, 20.0, 2000);
    auto none = critical_gammas(flat, 0.1, 50.0);
    CHECK_FALSE(none.gamma1_found);
    CHECK_FALSE(none.gamma2_found);
}

TEST_CASE("csv outputs")
{
    auto grid = ka_grid(1.0, 4, 0.0, 2.0, 4);
    std::stringstream ss;
    write_phi_scan_csv(ss, grid, 5.0);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "a,K_a,phi_gamma");
    std::getline(ss, line);
    CHECK(line == "0,inf,0");
    int rows = 1;
    while (std::getline(ss, line)) ++rows;
    CHECK(rows == 5);

    std::stringstream bs;
    write_bifurcation_csv(bs, {{1.5, 0.5, 3}});
    std::getline(bs, line);
    CHECK(line == "gamma,I,root_count");
    std::getline(bs, line);
    CHECK(line == "1.5,0.5,3");
}
