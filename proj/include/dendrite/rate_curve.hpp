#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

namespace dendrite {

/// Nonnegative function of time on a uniform grid, linear between nodes.
class RateCurve {
public:
    RateCurve() = default;
    /// Throws std::invalid_argument on dt <= 0, fewer than two nodes, or negative values.
    RateCurve(double t0, double dt, std::vector<double> values);

    static RateCurve constant(double c, double t_end, std::size_t cells);
    static RateCurve sample(const std::function<double(double)>& f, double t_end, std::size_t cells);

    /// Linear interpolation; throws std::out_of_range outside [t0, t_end].
    double operator()(double t) const;

    double t0() const { return t0_; }
    double dt() const { return dt_; }
    double t_end() const { return t0_ + dt_ * static_cast<double>(values_.size() - 1); }
    double time(std::size_t i) const { return t0_ + dt_ * static_cast<double>(i); }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    double max_value() const;

    /// h^theta(t) = h(t - theta) for t >= theta, 0 before; same grid.
    RateCurve delayed(double theta) const;

private:
    double t0_ = 0.0;
    double dt_ = 1.0;
    std::vector<double> values_{0.0, 0.0};
};

/// Node times of the curve strictly inside (a, b), with a and b added.
std::vector<double> curve_pieces(const RateCurve& g, double a, double b);

/// Simpson integral of sqrt(g) over [a, b], split at the curve nodes so g is linear on each piece.
double integral_sqrt(const RateCurve& g, double a, double b);

/// CSV `t,value` at full precision.
void write_rate_csv(std::ostream& out, const RateCurve& g, const char* value_name = "rate");

}  // namespace dendrite
