#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dendrite/function_spec.hpp"
#include "dendrite/quadrature.hpp"
#include "dendrite/rng.hpp"

using namespace dendrite;

TEST_CASE("shifted power evaluates max(v - alpha, 0)^p")
{
    auto f = FunctionSpec::shifted_power(0.2, 8);
    CHECK(f(0.1) == 0.0);
    CHECK(f(0.2) == 0.0);
    CHECK(f(1.2) == doctest::Approx(1.0));
    CHECK(f(0.7) == doctest::Approx(std::pow(0.5, 8)).epsilon(1e-14));
    CHECK(f.polynomial_degree() == 8);
}

TEST_CASE("affine, constant and power kinds")
{
    auto a = FunctionSpec::affine(1.0, -0.1);
    CHECK(a(3.0) == doctest::Approx(0.7));
    double c0 = 0, c1 = 0;
    CHECK(a.affine_coefficients(c0, c1));
    CHECK(c0 == 1.0);
    CHECK(c1 == -0.1);
    CHECK(FunctionSpec::constant(2.5)(123.0) == 2.5);
    CHECK(FunctionSpec::power(2)(-1.0) == 0.0);
    CHECK(FunctionSpec::power(2)(3.0) == 9.0);
    CHECK_FALSE(FunctionSpec::power(2).affine_coefficients(c0, c1));
}

TEST_CASE("piecewise linear interpolates and extends by constants")
{
    auto f = FunctionSpec::piecewise_linear({{0.0, 1.0}, {1.0, 3.0}, {2.0, 3.0}});
    CHECK(f(-5.0) == 1.0);
    CHECK(f(0.5) == doctest::Approx(2.0));
    CHECK(f(1.5) == 3.0);
    CHECK(f(9.0) == 3.0);
    CHECK_THROWS_AS(FunctionSpec::piecewise_linear({{1.0, 0.0}, {0.5, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(FunctionSpec::piecewise_linear({{1.0, 0.0}, {1.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("sine bump is a probability density on its support")
{
    for (double hi : {1.0, 1.2, 3.0}) {
        auto f = FunctionSpec::sine_bump(0.0, hi);
        auto r = integrate([&](double v) { return f(v); }, 0.0, hi);
        CHECK(std::abs(r.value - 1.0) < 1e-8);
        CHECK(f(-0.1) == 0.0);
        CHECK(f(hi + 0.1) == 0.0);
        // f(v) = 1/(2 hi) + pi/(4 hi) sin(pi v / hi)
        CHECK(f(hi / 2) == doctest::Approx(1.0 / (2 * hi) + std::numbers::pi / (4 * hi)));
        CHECK(f(0.0) == doctest::Approx(f(hi)));
    }
}

TEST_CASE("sup and inf are exact on the polynomial kinds")
{
    auto f = FunctionSpec::shifted_power(0.2, 8);
    CHECK(f.sup_on(0.0, 1.0) == doctest::Approx(std::pow(0.8, 8)));
    CHECK(f.inf_on(0.0, 1.0) == 0.0);
    auto a = FunctionSpec::affine(2.0, -2.0);
    CHECK(a.sup_on(0.0, 1.0) == 2.0);
    CHECK(a.inf_on(0.0, 1.0) == 0.0);
    auto s = FunctionSpec::sine_bump(0.0, 1.2);
    CHECK(s.sup_on(0.0, 1.2) == doctest::Approx(1.0 / 2.4 + std::numbers::pi / 4.8));
}

TEST_CASE("parser round-trips every kind")
{
    const char* texts[] = {
        "shifted_power(alpha=0.2, p=8)",
        "power(p=2)",
        "affine(c0=1, c1=-0.10000000000000001)",
        "constant(c=1)",
        "piecewise_linear(0:1, 0.5:2, 1:0)",
        "sine_bump(lo=0, hi=1.2)",
    };
    for (const char* t : texts) {
        auto f = parse_function_spec(t);
        auto g = parse_function_spec(f.to_string());
        for (double v : {-0.5, 0.0, 0.1, 0.33, 0.5, 0.9, 1.1, 2.0}) CHECK(f(v) == g(v));
    }
    CHECK(parse_function_spec("  shifted_power( p = 4 , alpha = 1 ) ")(2.0) == 1.0);
}

TEST_CASE("parser rejects malformed specs")
{
    CHECK_THROWS_AS(parse_function_spec("bogus(p=1)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_function_spec("power(p=1.5)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_function_spec("power(q=1)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_function_spec("affine(c0=1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_function_spec("piecewise_linear(1:0, 0:1)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_function_spec("sine_bump(lo=1, hi=0)"), std::invalid_argument);
}

TEST_CASE("evaluation is pure and deterministic")
{
    SplitMix rng(11);
    auto f = parse_function_spec("piecewise_linear(0:0, 0.3:2, 1:0.5)");
    for (int i = 0; i < 1000; ++i) {
        double v = rng.uniform() * 2 - 0.5;
        CHECK(f(v) == f(v));
    }
}

TEST_CASE("law masses and sampler")
{
    auto uniform = Law::density(FunctionSpec::constant(1.0), 0.0, 1.0);
    CHECK(uniform.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(uniform.mass_above(0.25) == doctest::Approx(0.75));

    auto atoms = Law::atoms({0.1, 0.5}, {0.25, 0.75});
    CHECK(atoms.total_mass() == doctest::Approx(1.0));
    CHECK(atoms.mass_above(0.2) == doctest::Approx(0.75));
    LawSampler sa(atoms);
    CHECK(sa(0.1) == 0.1);
    CHECK(sa(0.3) == 0.5);

    // H(x) = 2(1 - x): inverse CDF 1 - sqrt(1 - u), linear density is exact
    auto H = Law::density(FunctionSpec::affine(2.0, -2.0), 0.0, 1.0);
    LawSampler sh(H);
    for (double u : {0.0, 0.01, 0.3, 0.5, 0.77, 0.999}) CHECK(sh(u) == doctest::Approx(1.0 - std::sqrt(1.0 - u)).epsilon(1e-10));
}
