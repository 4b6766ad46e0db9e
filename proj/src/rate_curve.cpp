#include "dendrite/rate_curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dendrite {

RateCurve::RateCurve(double t0, double dt, std::vector<double> values) : t0_(t0), dt_(dt), values_(std::move(values))
{
    if (!(dt_ > 0.0)) throw std::invalid_argument("RateCurve: dt must be positive");
    if (values_.size() < 2) throw std::invalid_argument("RateCurve: need at least two nodes");
    for (double v : values_)
        if (!(v >= 0.0)) throw std::invalid_argument("RateCurve: values must be nonnegative");
}

RateCurve RateCurve::constant(double c, double t_end, std::size_t cells)
{
    return RateCurve(0.0, t_end / static_cast<double>(cells), std::vector<double>(cells + 1, c));
}

RateCurve RateCurve::sample(const std::function<double(double)>& f, double t_end, std::size_t cells)
{
    double dt = t_end / static_cast<double>(cells);
    std::vector<double> v(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) v[i] = f(dt * static_cast<double>(i));
    return RateCurve(0.0, dt, std::move(v));
}

double RateCurve::operator()(double t) const
{
    double pos = (t - t0_) / dt_;
    double last = static_cast<double>(values_.size() - 1);
    // a few ulps of slack for grid times computed by different expressions
    if (pos < -1e-9 || pos > last + 1e-9) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "RateCurve: t=%.17g outside [%.17g, %.17g]", t, t0_, t_end());
        throw std::out_of_range(buf);
    }
    pos = std::clamp(pos, 0.0, last);
    auto i = static_cast<std::size_t>(pos);
    if (i >= values_.size() - 1) return values_.back();
    double f = pos - static_cast<double>(i);
    return values_[i] + f * (values_[i + 1] - values_[i]);
}

double RateCurve::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

RateCurve RateCurve::delayed(double theta) const
{
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double s = time(i) - theta;
        v[i] = s >= t0_ ? (*this)(s) : 0.0;
    }
    return RateCurve(t0_, dt_, std::move(v));
}

std::vector<double> curve_pieces(const RateCurve& g, double a, double b)
{
    std::vector<double> pts{a};
    double first = std::ceil((a - g.t0()) / g.dt());
    for (auto i = static_cast<long long>(std::max(0.0, first)); i < static_cast<long long>(g.size()); ++i) {
        double s = g.time(static_cast<std::size_t>(i));
        if (s >= b) break;
        if (s > a) pts.push_back(s);
    }
    pts.push_back(b);
    return pts;
}

double integral_sqrt(const RateCurve& g, double a, double b)
{
    if (!(b > a)) return 0.0;
    auto pts = curve_pieces(g, a, b);
    double total = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double lo = pts[i - 1], hi = pts[i];
        double ga = g(lo), gb = g(hi);
        total += (hi - lo) / 6.0 * (std::sqrt(ga) + 4.0 * std::sqrt(0.5 * (ga + gb)) + std::sqrt(gb));
    }
    return total;
}

void write_rate_csv(std::ostream& out, const RateCurve& g, const char* value_name)
{
    char buf[96];
    out << "t," << value_name << "\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", g.time(i), g.values()[i]);
        out << buf;
    }
}

}  // namespace dendrite
