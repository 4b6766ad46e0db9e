#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "dendrite/config_file.hpp"
#include "dendrite/model_config.hpp"

using namespace dendrite;

namespace {

SoftParams reference_soft()
{
    SoftParams p;
    p.lambda = FunctionSpec::shifted_power(0.2, 8);
    p.F = FunctionSpec::affine(1.0, -0.1);
    p.H = FunctionSpec::affine(2.0, -2.0);
    p.f0 = Law::density(FunctionSpec::constant(1.0), 0.0, 1.0);
    return p;
}

}  // namespace

TEST_CASE("reference soft configuration is valid without warnings")
{
    auto r = validate_soft(reference_soft());
    CHECK(r.ok());
    CHECK(r.warnings.empty());
    CHECK(reference_soft().alpha() == 0.2);
    CHECK(reference_soft().gamma() == doctest::Approx(4.0));
}

TEST_CASE("lambda = v^8 is accepted with an alpha warning")
{
    auto p = reference_soft();
    p.lambda = FunctionSpec::power(8);
    auto r = validate_soft(p);
    CHECK(r.ok());
    CHECK(r.has_warning("alpha=v_min"));
}

TEST_CASE("negative drift at v_min is an error")
{
    auto p = reference_soft();
    p.F = FunctionSpec::constant(-1.0);
    auto r = validate_soft(p);
    CHECK_FALSE(r.ok());
    CHECK(r.has_error("F(v_min) >= 0 violated"));
}

TEST_CASE("soft structural errors")
{
    auto p = reference_soft();
    p.rho = 0.0;
    CHECK(validate_soft(p).has_error("rho"));
    p = reference_soft();
    p.H = FunctionSpec::affine(1.0, -1.0);
    CHECK(validate_soft(p).has_error("H does not integrate"));
    p = reference_soft();
    p.f0 = Law::density(FunctionSpec::constant(2.0), 0.0, 1.0);
    CHECK(validate_soft(p).has_error("f0 is not a probability law"));
    p = reference_soft();
    p.f0 = Law::atoms({0.5}, {1.0});
    CHECK(validate_soft(p).ok());
}

TEST_CASE("(S2) warnings at zero delay")
{
    auto p = reference_soft();
    p.f0 = Law::density(FunctionSpec::constant(10.0), 0.0, 0.1);
    auto r = validate_soft(p);
    CHECK(r.ok());
    CHECK(r.has_warning("no mass above alpha"));
    p.theta = 0.4;
    CHECK_FALSE(validate_soft(p).has_warning("no mass above alpha"));
}

TEST_CASE("growth bound uses user constants")
{
    auto p = reference_soft();
    p.lambda = FunctionSpec::shifted_power(0.2, 8);
    p.growth_C = 1.0;
    p.growth_p = 2;
    CHECK(validate_soft(p).has_warning("lambda growth bound"));
    p.growth_p = 8;
    CHECK_FALSE(validate_soft(p).has_warning("lambda growth bound"));
}

TEST_CASE("alpha of a shifted power is stored exactly")
{
    for (double a : {0.0, 0.2, 1.0, 3.7}) {
        SoftParams p = reference_soft();
        p.lambda = FunctionSpec::shifted_power(a, 4);
        CHECK(p.alpha() == a);
    }
    CHECK(rate_threshold(FunctionSpec::piecewise_linear({{0.0, 0.0}, {0.5, 0.0}, {1.0, 1.0}}), 0.0) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("reference hard configuration is valid")
{
    HardParams p;
    p.I = 0.5;
    p.v_max = 1.2;
    p.f0 = Law::density(FunctionSpec::sine_bump(0.0, 1.2), 0.0, 1.2);
    auto r = validate_hard(p);
    CHECK(r.ok());
    CHECK(r.warnings.empty());
    CHECK(p.sigma() == doctest::Approx(2.0));
}

TEST_CASE("uniform f0 on [v_min, v_max] is valid")
{
    HardParams p;
    p.f0 = Law::density(FunctionSpec::constant(1.0 / 1.2), 0.0, 1.2);
    auto r = validate_hard(p);
    CHECK(r.ok());
    CHECK(r.warnings.empty());
}

TEST_CASE("hard errors")
{
    HardParams p;
    p.H = FunctionSpec::affine(0.0, 2.0);
    CHECK(validate_hard(p).has_error("H(0) not maximal"));
    p = HardParams{};
    p.I = 0.0;
    CHECK(validate_hard(p).has_error("I > 0"));
    p = HardParams{};
    p.f0 = Law::atoms({0.5}, {1.0});
    CHECK(validate_hard(p).has_error("continuous density"));
    p = HardParams{};
    p.f0 = Law::density(FunctionSpec::constant(2.0), 0.2, 0.7);
    CHECK(validate_hard(p).has_error("discontinuous"));
    p = HardParams{};
    // linear density a + b v on [0, 1.2] with 1.2 a + 0.72 b = 1
    p.f0 = Law::density(FunctionSpec::affine((1.0 - 0.72 * 0.2) / 1.2, 0.2), 0.0, 1.2);
    auto r = validate_hard(p);
    CHECK(r.ok());
    CHECK(r.has_warning("f0(v_min) != f0(v_max)"));
}

TEST_CASE("network arithmetic")
{
    NetworkParams n(10000, 1.0, 1.0, 2.0, 1);
    CHECK(n.N() == 10000.0);
    CHECK(n.w_n() == 0.01);
    NetworkParams m(20000, 1.0, 1.0, 2.0, 1);
    CHECK(m.w_n() * m.w_n() == doctest::Approx(n.w_n() * n.w_n() / 2).epsilon(1e-15));
    CHECK(validate_network(NetworkParams(0, 1.0, 1.0, 1.0, 1)).has_error("n >= 1"));
    CHECK(validate_network(NetworkParams(10, 0.0, 1.0, 1.0, 1)).has_error("p_n"));
}

TEST_CASE("config file parsing and resolution")
{
    auto cfg = ConfigFile::parse("# reference\nlambda = shifted_power(alpha=0.2, p=8)\nF = affine(c0=1, c1=-0.1)\n"
                                 "f0 = constant(c=1)\nf0_support = 0, 1\nn = 1e4\n");
    auto p = read_soft_params(cfg);
    auto net = read_network_params(cfg);
    CHECK(validate_soft(p).ok());
    CHECK(net.n == 10000);
    CHECK(cfg.unused_keys().empty());
    auto again = ConfigFile::parse(cfg.resolved_text());
    auto p2 = read_soft_params(again);
    CHECK(again.resolved_text() == cfg.resolved_text());
    CHECK(p2.F(3.0) == p.F(3.0));

    CHECK_THROWS_AS(ConfigFile::parse("novalue\n"), std::invalid_argument);
    CHECK_THROWS_AS(ConfigFile::parse("a = 1\na = 2\n"), std::invalid_argument);
    auto bad = ConfigFile::parse("rho = fast\n");
    CHECK_THROWS_AS(read_soft_params(bad), std::invalid_argument);
    auto typo = ConfigFile::parse("lamda = power(p=2)\n");
    read_soft_params(typo);
    CHECK(typo.unused_keys() == std::vector<std::string>{"lamda"});
    auto atoms = ConfigFile::parse("f0 = atoms(0.1:0.5, 0.9:0.5)\n");
    auto pa = read_soft_params(atoms);
    CHECK_FALSE(pa.f0.is_density());
    CHECK(pa.f0.total_mass() == doctest::Approx(1.0));
}
