#include "dendrite/function_spec.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "dendrite/quadrature.hpp"

namespace dendrite {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

double sine_bump_value(const SineBump& s, double v)
{
    if (v < s.lo || v > s.hi) return 0.0;
    double w = s.hi - s.lo;
    return 1.0 / (2.0 * w) + std::numbers::pi / (4.0 * w) * std::sin(std::numbers::pi * (v - s.lo) / w);
}

double pwl_value(const PiecewiseLinear& f, double v)
{
    const auto& k = f.knots;
    if (v <= k.front().first) return k.front().second;
    if (v >= k.back().first) return k.back().second;
    auto it = std::upper_bound(k.begin(), k.end(), v,
                               [](double x, const std::pair<double, double>& kn) { return x < kn.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    double s = (v - lo.first) / (hi.first - lo.first);
    return lo.second + s * (hi.second - lo.second);
}

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_args(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    return out;
}

double to_double(const std::string& s, const std::string& ctx)
{
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number in " + ctx + ": '" + s + "'");
    }
    if (trim(s.substr(pos)).size() != 0) throw std::invalid_argument("trailing characters in " + ctx + ": '" + s + "'");
    return x;
}

int to_int(const std::string& s, const std::string& ctx)
{
    double x = to_double(s, ctx);
    if (x != std::floor(x)) throw std::invalid_argument("expected an integer in " + ctx + ": '" + s + "'");
    return static_cast<int>(x);
}

}  // namespace

FunctionSpec::FunctionSpec(Kind kind) : kind_(std::move(kind))
{
    std::visit(overloaded{
                   [](const ShiftedPower& f) {
                       if (f.p < 1) throw std::invalid_argument("shifted_power: p must be a positive integer");
                       if (!std::isfinite(f.alpha)) throw std::invalid_argument("shifted_power: alpha not finite");
                   },
                   [](const Power& f) {
                       if (f.p < 1) throw std::invalid_argument("power: p must be a positive integer");
                   },
                   [](const Affine& f) {
                       if (!std::isfinite(f.c0) || !std::isfinite(f.c1))
                           throw std::invalid_argument("affine: coefficients not finite");
                   },
                   [](const Constant& f) {
                       if (!std::isfinite(f.c)) throw std::invalid_argument("constant: value not finite");
                   },
                   [](const PiecewiseLinear& f) {
                       if (f.knots.empty()) throw std::invalid_argument("piecewise_linear: no knots");
                       for (std::size_t i = 1; i < f.knots.size(); ++i) {
                           if (!(f.knots[i].first > f.knots[i - 1].first)) {
                               throw std::invalid_argument("piecewise_linear: knot abscissae must be strictly increasing (knot " +
                                                           std::to_string(i) + ")");
                           }
                       }
                   },
                   [](const SineBump& f) {
                       if (!(f.hi > f.lo)) throw std::invalid_argument("sine_bump: need lo < hi");
                   },
               },
               kind_);
}

double FunctionSpec::operator()(double v) const
{
    return std::visit(overloaded{
                          [v](const ShiftedPower& f) { return v > f.alpha ? ipow(v - f.alpha, f.p) : 0.0; },
                          [v](const Power& f) { return v > 0.0 ? ipow(v, f.p) : 0.0; },
                          [v](const Affine& f) { return f.c0 + f.c1 * v; },
                          [](const Constant& f) { return f.c; },
                          [v](const PiecewiseLinear& f) { return pwl_value(f, v); },
                          [v](const SineBump& f) { return sine_bump_value(f, v); },
                      },
                      kind_);
}

std::vector<double> FunctionSpec::breakpoints() const
{
    return std::visit(overloaded{
                          [](const ShiftedPower& f) { return std::vector<double>{f.alpha}; },
                          [](const Power&) { return std::vector<double>{0.0}; },
                          [](const Affine&) { return std::vector<double>{}; },
                          [](const Constant&) { return std::vector<double>{}; },
                          [](const PiecewiseLinear& f) {
                              std::vector<double> out;
                              for (const auto& k : f.knots) out.push_back(k.first);
                              return out;
                          },
                          [](const SineBump& f) { return std::vector<double>{f.lo, f.hi}; },
                      },
                      kind_);
}

double FunctionSpec::sup_on(double lo, double hi) const
{
    if (hi < lo) std::swap(lo, hi);
    const auto& self = *this;
    std::vector<double> cand{lo, hi};
    if (const auto* s = std::get_if<SineBump>(&kind_)) {
        double mid = 0.5 * (s->lo + s->hi);
        if (mid > lo && mid < hi) cand.push_back(mid);
    }
    for (double b : breakpoints()) {
        if (b > lo && b < hi) cand.push_back(b);
    }
    double best = self(cand.front());
    for (double c : cand) best = std::max(best, self(c));
    // one-sided limits at the support edges of the bump
    if (const auto* s = std::get_if<SineBump>(&kind_)) {
        double w = s->hi - s->lo;
        if (s->lo >= lo && s->lo <= hi) best = std::max(best, 1.0 / (2.0 * w));
        if (s->hi >= lo && s->hi <= hi) best = std::max(best, 1.0 / (2.0 * w));
    }
    return best;
}

double FunctionSpec::inf_on(double lo, double hi) const
{
    if (hi < lo) std::swap(lo, hi);
    const auto& self = *this;
    std::vector<double> cand{lo, hi};
    for (double b : breakpoints()) {
        if (b > lo && b < hi) cand.push_back(b);
    }
    if (const auto* s = std::get_if<SineBump>(&kind_)) {
        // sin attains its minimum on the support at the edges; outside it is zero
        if (lo < s->lo || hi > s->hi) return 0.0;
    }
    double best = self(cand.front());
    for (double c : cand) best = std::min(best, self(c));
    return best;
}

bool FunctionSpec::affine_coefficients(double& c0, double& c1) const
{
    if (const auto* a = std::get_if<Affine>(&kind_)) {
        c0 = a->c0;
        c1 = a->c1;
        return true;
    }
    if (const auto* c = std::get_if<Constant>(&kind_)) {
        c0 = c->c;
        c1 = 0.0;
        return true;
    }
    return false;
}

int FunctionSpec::polynomial_degree() const
{
    return std::visit(overloaded{
                          [](const ShiftedPower& f) { return f.p; },
                          [](const Power& f) { return f.p; },
                          [](const Affine& f) { return f.c1 == 0.0 ? 0 : 1; },
                          [](const Constant&) { return 0; },
                          [](const PiecewiseLinear&) { return 1; },
                          [](const SineBump&) { return -1; },
                      },
                      kind_);
}

std::string FunctionSpec::to_string() const
{
    return std::visit(
        overloaded{
            [](const ShiftedPower& f) { return "shifted_power(alpha=" + fmt(f.alpha) + ", p=" + std::to_string(f.p) + ")"; },
            [](const Power& f) { return "power(p=" + std::to_string(f.p) + ")"; },
            [](const Affine& f) { return "affine(c0=" + fmt(f.c0) + ", c1=" + fmt(f.c1) + ")"; },
            [](const Constant& f) { return "constant(c=" + fmt(f.c) + ")"; },
            [](const PiecewiseLinear& f) {
                std::string s = "piecewise_linear(";
                for (std::size_t i = 0; i < f.knots.size(); ++i) {
                    if (i) s += ", ";
                    s += fmt(f.knots[i].first) + ":" + fmt(f.knots[i].second);
                }
                return s + ")";
            },
            [](const SineBump& f) { return "sine_bump(lo=" + fmt(f.lo) + ", hi=" + fmt(f.hi) + ")"; },
        },
        kind_);
}

namespace {

struct CallSyntax {
    std::string name;
    std::vector<std::string> args;
};

CallSyntax parse_call(const std::string& text)
{
    std::string t = trim(text);
    auto open = t.find('(');
    if (open == std::string::npos || t.back() != ')')
        throw std::invalid_argument("expected name(args...), got '" + text + "'");
    CallSyntax c;
    c.name = trim(t.substr(0, open));
    c.args = split_args(t.substr(open + 1, t.size() - open - 2));
    return c;
}

std::vector<std::pair<std::string, std::string>> named_args(const CallSyntax& c)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& a : c.args) {
        auto eq = a.find('=');
        if (eq == std::string::npos) throw std::invalid_argument(c.name + ": expected key=value, got '" + a + "'");
        out.emplace_back(trim(a.substr(0, eq)), trim(a.substr(eq + 1)));
    }
    return out;
}

std::string require(const std::vector<std::pair<std::string, std::string>>& args, const std::string& key,
                    const std::string& fn)
{
    for (const auto& [k, v] : args)
        if (k == key) return v;
    throw std::invalid_argument(fn + ": missing argument '" + key + "'");
}

std::vector<std::pair<double, double>> knot_pairs(const CallSyntax& c)
{
    std::vector<std::pair<double, double>> knots;
    for (const auto& a : c.args) {
        auto colon = a.find(':');
        if (colon == std::string::npos) throw std::invalid_argument(c.name + ": expected x:y, got '" + a + "'");
        knots.emplace_back(to_double(a.substr(0, colon), c.name), to_double(a.substr(colon + 1), c.name));
    }
    return knots;
}

}  // namespace

FunctionSpec parse_function_spec(const std::string& text)
{
    CallSyntax c = parse_call(text);
    if (c.name == "piecewise_linear") return FunctionSpec::piecewise_linear(knot_pairs(c));
    auto args = named_args(c);
    if (c.name == "shifted_power")
        return FunctionSpec::shifted_power(to_double(require(args, "alpha", c.name), c.name),
                                           to_int(require(args, "p", c.name), c.name));
    if (c.name == "power") return FunctionSpec::power(to_int(require(args, "p", c.name), c.name));
    if (c.name == "affine")
        return FunctionSpec::affine(to_double(require(args, "c0", c.name), c.name),
                                    to_double(require(args, "c1", c.name), c.name));
    if (c.name == "constant") return FunctionSpec::constant(to_double(require(args, "c", c.name), c.name));
    if (c.name == "sine_bump")
        return FunctionSpec::sine_bump(to_double(require(args, "lo", c.name), c.name),
                                       to_double(require(args, "hi", c.name), c.name));
    throw std::invalid_argument("unknown function kind '" + c.name + "'");
}

// ---------------------------------------------------------------------------

Law Law::density(FunctionSpec f, double lo, double hi)
{
    if (!(hi > lo)) throw std::invalid_argument("density support needs lo < hi");
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw std::invalid_argument("density support must be finite");
    Law l;
    l.law_ = Density{std::move(f), lo, hi};
    return l;
}

Law Law::atoms(std::vector<double> values, std::vector<double> weights)
{
    if (values.empty() || values.size() != weights.size())
        throw std::invalid_argument("atoms: need matching non-empty value/weight lists");
    for (double w : weights)
        if (!(w >= 0.0)) throw std::invalid_argument("atoms: negative weight");
    Law l;
    l.law_ = Atoms{std::move(values), std::move(weights)};
    return l;
}

double Law::pdf(double v) const
{
    if (const auto* d = std::get_if<Density>(&law_)) {
        if (v < d->lo || v > d->hi) return 0.0;
        return d->f(v);
    }
    return 0.0;
}

double Law::total_mass() const
{
    if (const auto* d = std::get_if<Density>(&law_)) {
        std::vector<double> cuts{d->lo};
        for (double b : d->f.breakpoints())
            if (b > d->lo && b < d->hi) cuts.push_back(b);
        cuts.push_back(d->hi);
        std::sort(cuts.begin(), cuts.end());
        double total = 0.0;
        for (std::size_t i = 1; i < cuts.size(); ++i)
            total += integrate([&](double v) { return d->f(v); }, cuts[i - 1], cuts[i], 1e-14).value;
        return total;
    }
    const auto& a = std::get<Atoms>(law_);
    double total = 0.0;
    for (double w : a.weights) total += w;
    return total;
}

double Law::support_lo() const
{
    if (const auto* d = std::get_if<Density>(&law_)) return d->lo;
    const auto& a = std::get<Atoms>(law_);
    return *std::min_element(a.values.begin(), a.values.end());
}

double Law::support_hi() const
{
    if (const auto* d = std::get_if<Density>(&law_)) return d->hi;
    const auto& a = std::get<Atoms>(law_);
    return *std::max_element(a.values.begin(), a.values.end());
}

double Law::mass_above(double v) const
{
    if (const auto* d = std::get_if<Density>(&law_)) {
        if (v >= d->hi) return 0.0;
        double lo = std::max(v, d->lo);
        return integrate([&](double x) { return d->f(x); }, lo, d->hi, 1e-12).value;
    }
    const auto& a = std::get<Atoms>(law_);
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (a.values[i] > v) m += a.weights[i];
    return m;
}

std::string Law::to_string() const
{
    if (const auto* d = std::get_if<Density>(&law_)) return d->f.to_string();
    const auto& a = std::get<Atoms>(law_);
    std::string s = "atoms(";
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (i) s += ", ";
        s += fmt(a.values[i]) + ":" + fmt(a.weights[i]);
    }
    return s + ")";
}

// ---------------------------------------------------------------------------

LawSampler::LawSampler(const Law& law, int cells)
{
    if (!law.is_density()) {
        atomic_ = true;
        const auto& a = law.as_atoms();
        double total = 0.0;
        for (double w : a.weights) total += w;
        double acc = 0.0;
        for (std::size_t i = 0; i < a.values.size(); ++i) {
            acc += a.weights[i] / total;
            cdf_.push_back(acc);
            atom_values_.push_back(a.values[i]);
        }
        cdf_.back() = 1.0;
        return;
    }
    const auto& d = law.as_density();
    nodes_.resize(cells + 1);
    dens_.resize(cells + 1);
    cdf_.assign(cells + 1, 0.0);
    double h = (d.hi - d.lo) / cells;
    for (int i = 0; i <= cells; ++i) {
        nodes_[i] = (i == cells) ? d.hi : d.lo + i * h;
        dens_[i] = std::max(0.0, d.f(nodes_[i]));
    }
    for (int i = 1; i <= cells; ++i)
        cdf_[i] = cdf_[i - 1] + 0.5 * (dens_[i - 1] + dens_[i]) * (nodes_[i] - nodes_[i - 1]);
    double total = cdf_.back();
    if (!(total > 0.0)) throw std::invalid_argument("density has zero mass");
    for (auto& c : cdf_) c /= total;
    for (auto& x : dens_) x /= total;
}

double LawSampler::operator()(double u) const
{
    if (atomic_) {
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) --it;
        return atom_values_[static_cast<std::size_t>(it - cdf_.begin())];
    }
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t i = (it == cdf_.begin()) ? 1 : static_cast<std::size_t>(it - cdf_.begin());
    if (i >= cdf_.size()) i = cdf_.size() - 1;
    // density linear on the cell: solve f0 s + (f1 - f0) s^2 / (2h) = target
    double h = nodes_[i] - nodes_[i - 1];
    double target = u - cdf_[i - 1];
    double f0 = dens_[i - 1];
    double f1 = dens_[i];
    double slope = (f1 - f0) / h;
    double disc = std::max(0.0, f0 * f0 + 2.0 * slope * target);
    double denom = f0 + std::sqrt(disc);
    double s = denom > 0.0 ? 2.0 * target / denom : 0.5 * h;
    s = std::clamp(s, 0.0, h);
    return nodes_[i - 1] + s;
}

}  // namespace dendrite
