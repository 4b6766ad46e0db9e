#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "dendrite/meanfield.hpp"
#include "dendrite/quadrature.hpp"

namespace dendrite {

KappaPath KappaPath::zero(double t_end, std::size_t cells)
{
    KappaPath k;
    k.kappa = RateCurve::constant(0.0, t_end, cells);
    k.kappa_prime = k.kappa;
    return k;
}

KappaPath KappaPath::tabulate(const std::function<double(double)>& r, const std::function<double(double)>& r_prime,
                              double t_end, std::size_t cells)
{
    KappaPath k;
    k.kappa = RateCurve::sample(r, t_end, cells);
    k.kappa_prime = RateCurve::sample(r_prime, t_end, cells);
    return k;
}

void write_kappa_csv(std::ostream& out, const KappaPath& k)
{
    char buf[128];
    out << "t,kappa,kappa_prime\n";
    for (std::size_t i = 0; i < k.kappa.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", k.kappa.time(i), k.kappa.values()[i],
                      k.kappa_prime.values()[i]);
        out << buf;
    }
}

std::vector<double> excitation_thresholds(const std::function<double(double)>& r, double I, double span,
                                          double t_end, double offset)
{
    if (!(I > 0.0) || !(span > 0.0)) throw std::invalid_argument("excitation_thresholds: I and span must be positive");
    auto s = [&](double t) { return offset + I * t + r(t); };
    std::vector<double> out;
    double top = s(t_end);
    auto k = static_cast<long long>(std::ceil(s(0.0) / span));
    for (; static_cast<double>(k) * span <= top; ++k) {
        double level = static_cast<double>(k) * span;
        double lo = 0.0, hi = t_end;
        if (s(lo) >= level) {
            out.push_back(0.0);
            continue;
        }
        while (hi - lo > 1e-13 * std::max(1.0, hi)) {
            double mid = 0.5 * (lo + hi);
            if (s(mid) < level)
                lo = mid;
            else
                hi = mid;
        }
        out.push_back(0.5 * (lo + hi));
    }
    return out;
}

double hard_G0(const HardParams& p, double v)
{
    double sigma = p.sigma();
    double f = p.f0.pdf(v);
    return sigma * f + std::sqrt(sigma * sigma * f * f + 2.0 * sigma * p.I * f);
}

HardKappa::HardKappa(const HardParams& p) : p_(p)
{
    if (!(p.I > 0.0)) throw std::invalid_argument("HardKappa: I > 0 required");
    if (!(p.v_max > p.v_min)) throw std::invalid_argument("HardKappa: v_max > v_min required");
    const int cells = 256;
    nodes_.resize(cells + 1);
    for (int i = 0; i <= cells; ++i) nodes_[i] = p.v_min + (p.v_max - p.v_min) * i / cells;
    nodes_.back() = p.v_max;
    tail_.assign(cells + 1, 0.0);
    auto inv = [this](double v) { return 1.0 / (hard_G0(p_, v) + p_.I); };
    for (int i = cells - 1; i >= 0; --i) tail_[i] = tail_[i + 1] + integrate(inv, nodes_[i], nodes_[i + 1], 1e-12).value;
    a_ = tail_[0];
}

double HardKappa::phi0(double x) const
{
    if (x < p_.v_min || x > p_.v_max) throw std::out_of_range("phi0: x outside [v_min, v_max]");
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    if (it == nodes_.end()) return 0.0;
    auto i = static_cast<std::size_t>(it - nodes_.begin());
    auto inv = [this](double v) { return 1.0 / (hard_G0(p_, v) + p_.I); };
    return tail_[i] + integrate(inv, x, nodes_[i], 1e-12).value;
}

double HardKappa::phi0_inverse(double s, double tol) const
{
    if (s < -1e-15 || s > a_ * (1.0 + 1e-14)) throw std::out_of_range("phi0_inverse: s outside [0, a]");
    if (s <= 0.0) return p_.v_max;
    if (s >= a_) return p_.v_min;
    // tail_ is decreasing: locate the cell, then bisect inside it
    std::size_t hi_i = tail_.size() - 1, lo_i = 0;
    while (hi_i - lo_i > 1) {
        std::size_t mid = (lo_i + hi_i) / 2;
        if (tail_[mid] >= s)
            lo_i = mid;
        else
            hi_i = mid;
    }
    double lo = nodes_[lo_i], hi = nodes_[hi_i];
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (phi0(mid) >= s)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double HardKappa::kappa(double t) const
{
    if (t < 0.0) throw std::out_of_range("kappa: t < 0");
    double span = p_.v_max - p_.v_min;
    double k = std::floor(t / a_);
    double tau = std::clamp(t - k * a_, 0.0, a_);
    return std::max(0.0, k * span + p_.v_max - p_.I * t - phi0_inverse(tau));
}

double HardKappa::kappa_prime(double t) const
{
    if (t < 0.0) throw std::out_of_range("kappa_prime: t < 0");
    double k = std::floor(t / a_);
    double tau = std::clamp(t - k * a_, 0.0, a_);
    return hard_G0(p_, phi0_inverse(tau));
}

KappaPath hard_kappa_explicit(const HardParams& p, double t_end, std::size_t cells)
{
    HardKappa hk(p);
    auto path = KappaPath::tabulate([&](double t) { return hk.kappa(t); }, [&](double t) { return hk.kappa_prime(t); },
                                    t_end, cells);
    path.period = hk.period();
    path.thresholds =
        excitation_thresholds([&](double t) { return hk.kappa(t); }, p.I, p.v_max - p.v_min, t_end);
    return path;
}

namespace {

double hermite(double t0, double t1, double y0, double y1, double d0, double d1, double t)
{
    double h = t1 - t0;
    double s = (t - t0) / h;
    double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
}

}  // namespace

KappaPath hard_kappa_ode(const HardParams& p, double t_end, std::size_t cells, std::size_t steps)
{
    if (!(p.I > 0.0)) throw std::invalid_argument("hard_kappa_ode: I > 0 required");
    const double span = p.v_max - p.v_min;
    const double h = span / (p.I * static_cast<double>(steps));
    auto rhs = [&](double t, double y) {
        double arg = p.v_max - p.I * t - y;
        if (!std::isfinite(arg) || arg > p.v_max + 1e-12)
            throw std::runtime_error("hard_kappa_ode: solution left the admissible band");
        return hard_G0(p, std::clamp(arg, p.v_min, p.v_max));
    };

    std::vector<double> ts{0.0}, ys{0.0}, ds{rhs(0.0, 0.0)};
    double a = 0.0;
    for (std::size_t guard = 0;; ++guard) {
        if (guard > 4 * steps) throw std::runtime_error("hard_kappa_ode: no threshold crossing");
        double t = ts.back(), y = ys.back();
        double k1 = rhs(t, y);
        double k2 = rhs(t + h / 2, y + h / 2 * k1);
        double k3 = rhs(t + h / 2, y + h / 2 * k2);
        double k4 = rhs(t + h, y + h * k3);
        double y1 = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        double t1 = t + h;
        double d1 = rhs(t1, y1);
        if (y1 < y) throw std::runtime_error("hard_kappa_ode: kappa decreased");
        ts.push_back(t1);
        ys.push_back(y1);
        ds.push_back(d1);
        if (p.I * t1 + y1 >= span) {
            // first threshold: I s + kappa(s) = span, located on the Hermite interpolant
            double lo = t, hi = t1;
            for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                double mid = 0.5 * (lo + hi);
                if (p.I * mid + hermite(t, t1, y, y1, k1, d1, mid) < span)
                    lo = mid;
                else
                    hi = mid;
            }
            a = 0.5 * (lo + hi);
            break;
        }
    }

    auto within = [&](double tau, double& value, double& deriv) {
        auto it = std::upper_bound(ts.begin(), ts.end(), tau);
        std::size_t i = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
        i = std::min(i, ts.size() - 2);
        value = hermite(ts[i], ts[i + 1], ys[i], ys[i + 1], ds[i], ds[i + 1], tau);
        // derivative from the right-hand side evaluated on the interpolated solution
        deriv = hard_G0(p, std::clamp(p.v_max - p.I * tau - value, p.v_min, p.v_max));
    };
    auto kappa_at = [&](double t, double& value, double& deriv) {
        double k = std::floor(t / a);
        double tau = t - k * a;
        within(tau, value, deriv);
        value += k * (span - p.I * a);
    };

    KappaPath path;
    std::vector<double> kv(cells + 1), dv(cells + 1);
    double dt = t_end / static_cast<double>(cells);
    for (std::size_t i = 0; i <= cells; ++i) kappa_at(dt * static_cast<double>(i), kv[i], dv[i]);
    kv[0] = 0.0;
    for (auto& v : kv) v = std::max(0.0, v);
    path.kappa = RateCurve(0.0, dt, std::move(kv));
    path.kappa_prime = RateCurve(0.0, dt, std::move(dv));
    path.period = a;
    path.thresholds = excitation_thresholds(
        [&](double t) {
            double v = 0.0, d = 0.0;
            kappa_at(t, v, d);
            return v;
        },
        p.I, span, t_end);
    return path;
}

namespace {

void check_start(const HardParams& p, double V0)
{
    if (!(V0 >= p.v_min) || !(V0 < p.v_max)) throw std::invalid_argument("hard neuron: V0 must lie in [v_min, v_max)");
    if (!(p.I > 0.0)) throw std::invalid_argument("hard neuron: I > 0 required");
}

}  // namespace

HardNeuronPath single_neuron_hard(const HardParams& p, const std::function<double(double)>& r, double V0,
                                  const std::vector<double>& times)
{
    check_start(p, V0);
    const double span = p.v_max - p.v_min;
    HardNeuronPath out;
    out.times = times;
    for (double t : times) {
        double x = V0 + p.I * t + r(t) - p.v_min;
        double j = std::floor(x / span);
        double v = p.v_min + (x - j * span);
        // x / span within an ulp of an integer: keep V in [v_min, v_max)
        if (v >= p.v_max) {
            v -= span;
            j += 1;
        }
        out.V.push_back(v);
        out.J.push_back(static_cast<long long>(j));
    }
    return out;
}

HardNeuronPath single_neuron_hard_stepped(const HardParams& p, const std::function<double(double)>& r, double V0,
                                          const std::vector<double>& times)
{
    check_start(p, V0);
    const double span = p.v_max - p.v_min;
    HardNeuronPath out;
    out.times = times;
    double V = V0, t_prev = 0.0, r_prev = r(0.0);
    long long J = 0;
    for (double t : times) {
        if (t < t_prev) throw std::invalid_argument("single_neuron_hard_stepped: times must be nondecreasing");
        double r_now = r(t);
        V += p.I * (t - t_prev) + (r_now - r_prev);
        while (V >= p.v_max) {
            V -= span;
            ++J;
        }
        t_prev = t;
        r_prev = r_now;
        out.V.push_back(V);
        out.J.push_back(J);
    }
    return out;
}

std::vector<double> hard_spike_times(const HardParams& p, const std::function<double(double)>& r, double V0,
                                     double t_end)
{
    check_start(p, V0);
    auto th = excitation_thresholds(r, p.I, p.v_max - p.v_min, t_end, V0 - p.v_min);
    // level k = 0 is only met at t = 0 when V0 = v_min; that is not a spike
    if (!th.empty() && V0 - p.v_min + r(0.0) <= 0.0) th.erase(th.begin());
    return th;
}

double hard_gr_density(const HardParams& p, const KappaPath& r, double t)
{
    if (t < 0.0 || t > r.t_end()) throw std::out_of_range("hard_gr_density: t beyond the excitation grid");
    const double span = p.v_max - p.v_min;
    double s = p.I * t + r.value(t);
    double k = std::floor(s / span);
    return p.f0.pdf(k * span + p.v_max - s) * (p.I + r.derivative(t));
}

}  // namespace dendrite
