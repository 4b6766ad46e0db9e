#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dendrite/function_spec.hpp"

namespace dendrite {

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool ok() const { return errors.empty(); }
    bool has_warning(const std::string& needle) const;
    bool has_error(const std::string& needle) const;
};

/// Soft model: neurons spike at rate lambda(V).
struct SoftParams {
    double v_min = 0.0;
    double L = 1.0;
    double rho = 1.0;
    double theta = 0.0;
    double w = 1.0;
    FunctionSpec lambda = FunctionSpec::shifted_power(0.2, 8);
    FunctionSpec F = FunctionSpec::affine(1.0, -0.1);
    FunctionSpec H = FunctionSpec::affine(2.0, -2.0);
    Law f0 = Law::density(FunctionSpec::constant(1.0), 0.0, 1.0);

    /// Constants of the growth bounds lambda <= C (1 + v - v_min)^p and
    /// F <= C (1 + v - v_min). A non-positive exponent means "use the degree of lambda".
    double growth_C = 1.0;
    int growth_p = 0;

    /// inf{v >= v_min : lambda(v) > 0}
    double alpha() const;
    /// gamma = 2 rho H(0) w^2
    double gamma() const { return 2.0 * rho * H(0.0) * w * w; }
};

/// Hard model: neurons spike when V reaches v_max; drift F = I.
struct HardParams {
    double v_min = 0.0;
    double v_max = 1.2;
    double L = 1.0;
    double rho = 1.0;
    double theta = 0.0;
    double w = 1.0;
    double I = 0.5;
    FunctionSpec H = FunctionSpec::affine(2.0, -2.0);
    Law f0 = Law::density(FunctionSpec::sine_bump(0.0, 1.2), 0.0, 1.2);

    /// sigma = rho H(0) w^2
    double sigma() const { return rho * H(0.0) * w * w; }
};

struct NetworkParams {
    std::int64_t n = 1000;
    double p_n = 1.0;
    double w = 1.0;
    double T = 2.0;
    std::uint64_t seed = 1;
    bool self_edges = true;

    NetworkParams() = default;
    NetworkParams(std::int64_t n_, double p_n_, double w_, double T_, std::uint64_t seed_)
        : n(n_), p_n(p_n_), w(w_), T(T_), seed(seed_)
    {
    }

    double N() const { return static_cast<double>(n) * p_n; }
    double w_n() const { return w / std::sqrt(N()); }
};

/// Smallest v >= v_min with lambda(v) > 0 (exact for the polynomial kinds).
double rate_threshold(const FunctionSpec& lambda, double v_min);

ValidationReport validate_soft(const SoftParams& params);
ValidationReport validate_hard(const HardParams& params);
ValidationReport validate_network(const NetworkParams& params);

/// Max of H over a uniform grid on [0, L].
double grid_max(const FunctionSpec& f, double lo, double hi, int points = 10000);

}  // namespace dendrite
