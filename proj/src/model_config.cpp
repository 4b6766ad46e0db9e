#include "dendrite/model_config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dendrite/quadrature.hpp"

namespace dendrite {

namespace {

constexpr double kMassTol = 1e-8;

std::string num(double x)
{
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

double integral_of(const FunctionSpec& f, double lo, double hi)
{
    std::vector<double> cuts{lo};
    for (double b : f.breakpoints())
        if (b > lo && b < hi) cuts.push_back(b);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i)
        total += integrate([&](double v) { return f(v); }, cuts[i - 1], cuts[i], 1e-14).value;
    return total;
}

void check_density_nonnegative(const FunctionSpec& f, double lo, double hi, const std::string& name,
                               ValidationReport& r)
{
    if (f.inf_on(lo, hi) < 0.0) r.errors.push_back(name + " takes negative values on its support");
}

}  // namespace

bool ValidationReport::has_warning(const std::string& needle) const
{
    return std::any_of(warnings.begin(), warnings.end(),
                       [&](const std::string& w) { return w.find(needle) != std::string::npos; });
}

bool ValidationReport::has_error(const std::string& needle) const
{
    return std::any_of(errors.begin(), errors.end(),
                       [&](const std::string& e) { return e.find(needle) != std::string::npos; });
}

double grid_max(const FunctionSpec& f, double lo, double hi, int points)
{
    double best = f(lo);
    for (int i = 0; i <= points; ++i) best = std::max(best, f(lo + (hi - lo) * i / points));
    return best;
}

double rate_threshold(const FunctionSpec& lambda, double v_min)
{
    if (const auto* s = std::get_if<ShiftedPower>(&lambda.kind())) return std::max(s->alpha, v_min);
    if (std::holds_alternative<Power>(lambda.kind())) return std::max(0.0, v_min);
    if (lambda(v_min) > 0.0) return v_min;
    // scan then bisect for the first point where lambda becomes positive
    double step = 1e-3;
    double lo = v_min;
    double hi = v_min;
    bool found = false;
    for (int i = 1; i <= 1000000; ++i) {
        hi = v_min + i * step;
        if (lambda(hi) > 0.0) {
            found = true;
            break;
        }
        lo = hi;
    }
    if (!found) return std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (lambda(mid) > 0.0 ? hi : lo) = mid;
    }
    return hi;
}

double SoftParams::alpha() const { return rate_threshold(lambda, v_min); }

ValidationReport validate_soft(const SoftParams& p)
{
    ValidationReport r;
    if (!(p.rho > 0.0)) r.errors.push_back("rho > 0 violated");
    if (!(p.L > 0.0)) r.errors.push_back("L > 0 violated");
    if (!(p.w > 0.0)) r.errors.push_back("w > 0 violated");
    if (!(p.theta >= 0.0)) r.errors.push_back("theta >= 0 violated");
    if (p.F(p.v_min) < 0.0) r.errors.push_back("F(v_min) >= 0 violated");
    if (p.lambda.inf_on(p.v_min, p.v_min + 100.0) < 0.0) r.errors.push_back("lambda takes negative values");

    if (p.L > 0.0) {
        check_density_nonnegative(p.H, 0.0, p.L, "H", r);
        double mass = integral_of(p.H, 0.0, p.L);
        if (std::abs(mass - 1.0) > kMassTol) r.errors.push_back("H does not integrate to 1 on [0,L] (got " + num(mass) + ")");
    }
    if (p.f0.is_density()) {
        const auto& d = p.f0.as_density();
        check_density_nonnegative(d.f, d.lo, d.hi, "f0", r);
        if (d.lo < p.v_min) r.errors.push_back("f0 support extends below v_min");
    } else if (p.f0.support_lo() < p.v_min) {
        r.errors.push_back("f0 has atoms below v_min");
    }
    double mass0 = p.f0.total_mass();
    if (std::abs(mass0 - 1.0) > kMassTol) r.errors.push_back("f0 is not a probability law (mass " + num(mass0) + ")");

    double alpha = p.alpha();
    if (!(alpha > p.v_min)) r.warnings.push_back("alpha=v_min: lambda does not vanish near v_min; the mean-field theory assumes it does");

    int gp = p.growth_p > 0 ? p.growth_p : std::max(1, p.lambda.polynomial_degree());
    for (int i = 0; i <= 10000; ++i) {
        double v = p.v_min + 100.0 * i / 10000.0;
        double base = 1.0 + (v - p.v_min);
        if (p.lambda(v) > p.growth_C * ipow(base, gp) * (1.0 + 1e-12)) {
            r.warnings.push_back("lambda growth bound C(1+v-v_min)^p fails at v=" + num(v));
            break;
        }
    }
    for (int i = 0; i <= 10000; ++i) {
        double v = p.v_min + 100.0 * i / 10000.0;
        if (p.F(v) > p.growth_C * (1.0 + (v - p.v_min)) * (1.0 + 1e-12)) {
            r.warnings.push_back("F growth bound C(1+v-v_min) fails at v=" + num(v));
            break;
        }
    }

    if (p.theta == 0.0) {
        // (S2): compact support is automatic for the laws representable here
        if (!std::isfinite(p.f0.support_hi())) r.warnings.push_back("f0 not compactly supported with theta=0 (S2 violated)");
        if (std::isfinite(alpha) && !(p.f0.mass_above(alpha) > 0.0))
            r.warnings.push_back("f0 puts no mass above alpha with theta=0 (S2 violated)");
        if (std::isfinite(alpha) && p.F(alpha) < 0.0) r.warnings.push_back("F(alpha) < 0 with theta=0 (S2 violated)");
    }
    return r;
}

ValidationReport validate_hard(const HardParams& p)
{
    ValidationReport r;
    if (!(p.v_max > p.v_min)) r.errors.push_back("v_min < v_max violated");
    if (!(p.I > 0.0)) r.errors.push_back("I > 0 violated");
    if (!(p.rho > 0.0)) r.errors.push_back("rho > 0 violated");
    if (!(p.L > 0.0)) r.errors.push_back("L > 0 violated");
    if (!(p.w >= 0.0)) r.errors.push_back("w >= 0 violated");
    if (!(p.theta >= 0.0)) r.errors.push_back("theta >= 0 violated");
    if (!r.ok()) return r;

    check_density_nonnegative(p.H, 0.0, p.L, "H", r);
    double massH = integral_of(p.H, 0.0, p.L);
    if (std::abs(massH - 1.0) > kMassTol) r.errors.push_back("H does not integrate to 1 on [0,L] (got " + num(massH) + ")");
    double hmax = grid_max(p.H, 0.0, p.L);
    if (p.H(0.0) < hmax - 1e-9) r.errors.push_back("H(0) not maximal (H(0)=" + num(p.H(0.0)) + ", max=" + num(hmax) + ")");

    if (!p.f0.is_density()) {
        r.errors.push_back("f0 must be a continuous density for the hard model (atoms given)");
        return r;
    }
    const auto& d = p.f0.as_density();
    if (d.lo < p.v_min - 1e-12 || d.hi > p.v_max + 1e-12) r.errors.push_back("f0 support must lie in [v_min, v_max]");
    check_density_nonnegative(d.f, d.lo, d.hi, "f0", r);
    // continuity of the zero-extended density on [v_min, v_max]
    if (d.lo > p.v_min && std::abs(d.f(d.lo)) > 1e-12) r.errors.push_back("f0 discontinuous at the lower support edge");
    if (d.hi < p.v_max && std::abs(d.f(d.hi)) > 1e-12) r.errors.push_back("f0 discontinuous at the upper support edge");
    double mass0 = p.f0.total_mass();
    if (std::abs(mass0 - 1.0) > kMassTol) r.errors.push_back("f0 is not a probability law (mass " + num(mass0) + ")");
    if (std::abs(p.f0.pdf(p.v_min) - p.f0.pdf(p.v_max)) > 1e-8)
        r.warnings.push_back("f0(v_min) != f0(v_max): kappa is not C^1 at multiples of the period");
    if (p.w == 0.0) r.warnings.push_back("w = 0: no excitation, pure drift");
    return r;
}

ValidationReport validate_network(const NetworkParams& p)
{
    ValidationReport r;
    if (p.n < 1) r.errors.push_back("n >= 1 violated");
    if (!(p.p_n > 0.0 && p.p_n <= 1.0)) r.errors.push_back("0 < p_n <= 1 violated");
    if (!(p.T >= 0.0)) r.errors.push_back("horizon T >= 0 violated");
    if (!p.self_edges) r.warnings.push_back("self-connections disabled");
    return r;
}

}  // namespace dendrite
