#include "dendrite/cone_order.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace dendrite {

namespace {

std::string describe(std::size_t i, std::size_t j, const Impulse& a, const Impulse& b)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "impulses %zu (t=%.17g, x=%.17g) and %zu (t=%.17g, x=%.17g) violate general position",
                  i, a.t, a.x, j, b.t, b.x);
    return buf;
}

bool same_ray(const Impulse& a, const Impulse& b, double rho)
{
    return std::abs(a.x - b.x) == rho * std::abs(a.t - b.t);
}

bool by_time(const Impulse& a, const Impulse& b) { return a.t < b.t || (a.t == b.t && a.x < b.x); }

// Candidates for an exact tie share (up to rounding) a psi coordinate; scan
// each coordinate-sorted order over a small relative window.
bool scan_coordinate(const std::vector<Impulse>& pts, const std::vector<double>& key, double rho, std::size_t& i,
                     std::size_t& j)
{
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    for (std::size_t a = 0; a < order.size(); ++a) {
        double k = key[order[a]];
        double window = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(k));
        for (std::size_t b = a + 1; b < order.size() && key[order[b]] - k <= window; ++b) {
            if (same_ray(pts[order[a]], pts[order[b]], rho)) {
                i = std::min(order[a], order[b]);
                j = std::max(order[a], order[b]);
                return true;
            }
        }
    }
    return false;
}

std::vector<std::size_t> psi_order(const std::vector<TransformedPoint>& q)
{
    std::vector<std::size_t> order(q.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return q[a].u < q[b].u || (q[a].u == q[b].u && q[a].v < q[b].v);
    });
    return order;
}

std::size_t patience(const std::vector<TransformedPoint>& q)
{
    std::vector<double> tails;
    for (std::size_t idx : psi_order(q)) {
        double v = q[idx].v;
        auto it = std::upper_bound(tails.begin(), tails.end(), v);
        if (it == tails.end())
            tails.push_back(v);
        else
            *it = v;
    }
    return tails.size();
}

}  // namespace

GeneralPositionError::GeneralPositionError(std::size_t i, std::size_t j, const Impulse& a, const Impulse& b)
    : std::invalid_argument(describe(i, j, a, b)), first(i), second(j)
{
}

PointCloud::PointCloud(std::vector<Impulse> impulses, double rho, double L)
    : impulses_(std::move(impulses)), rho_(rho), L_(L)
{
    std::stable_sort(impulses_.begin(), impulses_.end(), by_time);
    check();
}

PointCloud PointCloud::from_sorted(std::vector<Impulse> impulses, double rho, double L)
{
    for (std::size_t k = 1; k < impulses.size(); ++k) {
        if (by_time(impulses[k], impulses[k - 1]))
            throw std::invalid_argument("impulses not sorted by (t, x) at row " + std::to_string(k));
    }
    return PointCloud(std::move(impulses), rho, L);
}

void PointCloud::check() const
{
    if (!(rho_ > 0.0)) throw std::invalid_argument("rho must be positive");
    for (std::size_t k = 0; k < impulses_.size(); ++k) {
        const auto& p = impulses_[k];
        if (!(p.t >= 0.0) || !(p.x >= 0.0) || !(p.x <= L_))
            throw std::invalid_argument("impulse " + std::to_string(k) + " outside [0,inf) x [0,L]");
    }
    std::size_t i = 0, j = 0;
    if (find_general_position_violation(impulses_, rho_, i, j)) throw GeneralPositionError(i, j, impulses_[i], impulses_[j]);
}

bool find_general_position_violation(const std::vector<Impulse>& impulses, double rho, std::size_t& i, std::size_t& j)
{
    std::vector<double> u(impulses.size()), v(impulses.size());
    for (std::size_t k = 0; k < impulses.size(); ++k) {
        auto q = psi(impulses[k], rho);
        u[k] = q.u;
        v[k] = q.v;
    }
    return scan_coordinate(impulses, u, rho, i, j) || scan_coordinate(impulses, v, rho, i, j);
}

std::size_t lis_count(const PointCloud& cloud)
{
    std::vector<TransformedPoint> q;
    q.reserve(cloud.size());
    for (const auto& p : cloud.impulses()) q.push_back(psi(p, cloud.rho()));
    return patience(q);
}

std::size_t lis_count_before(const PointCloud& cloud, double t)
{
    if (!(t >= 0.0)) throw std::invalid_argument("lis_count_before: t must be >= 0");
    // x <= rho (t - s), written as the soma arrival time of the positive front
    std::vector<TransformedPoint> q;
    for (const auto& p : cloud.impulses())
        if (soma_arrival(p, cloud.rho()) <= t) q.push_back(psi(p, cloud.rho()));
    return patience(q);
}

std::vector<std::size_t> lis_profile(const PointCloud& cloud, const std::vector<double>& t_grid)
{
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] > t_grid[k - 1])) throw std::invalid_argument("lis_profile: t_grid must be increasing");
    if (!t_grid.empty() && !(t_grid[0] >= 0.0)) throw std::invalid_argument("lis_profile: t_grid must be >= 0");

    const std::size_t n = cloud.size();
    const double rho = cloud.rho();
    std::vector<TransformedPoint> q(n);
    for (std::size_t k = 0; k < n; ++k) q[k] = psi(cloud[k], rho);

    // rank in (u, v) order
    std::vector<std::size_t> rank(n);
    {
        auto order = psi_order(q);
        for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;
    }
    // Points enter by arrival time. A newcomer has the largest v so far, so
    // chain lengths of earlier points never change: depth = 1 + prefix max.
    std::vector<std::size_t> by_arrival(n);
    std::iota(by_arrival.begin(), by_arrival.end(), 0);
    std::vector<double> arrival(n);
    for (std::size_t k = 0; k < n; ++k) arrival[k] = soma_arrival(cloud[k], rho);
    std::sort(by_arrival.begin(), by_arrival.end(), [&](std::size_t a, std::size_t b) {
        return arrival[a] < arrival[b] || (arrival[a] == arrival[b] && q[a].v < q[b].v);
    });

    std::vector<std::size_t> fenwick(n + 1, 0);
    auto prefix_max = [&](std::size_t r) {
        std::size_t best = 0;
        for (std::size_t k = r + 1; k > 0; k -= k & (~k + 1)) best = std::max(best, fenwick[k]);
        return best;
    };
    auto raise = [&](std::size_t r, std::size_t val) {
        for (std::size_t k = r + 1; k <= n; k += k & (~k + 1)) fenwick[k] = std::max(fenwick[k], val);
    };

    std::vector<std::size_t> out;
    out.reserve(t_grid.size());
    std::size_t next = 0;
    std::size_t best = 0;
    for (double t : t_grid) {
        while (next < n && arrival[by_arrival[next]] <= t) {
            std::size_t idx = by_arrival[next++];
            std::size_t depth = 1 + prefix_max(rank[idx]);
            raise(rank[idx], depth);
            best = std::max(best, depth);
        }
        out.push_back(best);
    }
    return out;
}

std::size_t lis_brute_force(const PointCloud& cloud, std::size_t max_n)
{
    const std::size_t n = cloud.size();
    if (n > max_n) throw std::length_error("lis_brute_force: " + std::to_string(n) + " points exceed the O(n^2) guard");
    std::vector<std::size_t> depth(n, 1);
    std::size_t best = 0;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < j; ++i)
            if (precedes(cloud[i], cloud[j], cloud.rho())) depth[j] = std::max(depth[j], depth[i] + 1);
        best = std::max(best, depth[j]);
    }
    return best;
}

std::vector<std::vector<std::size_t>> layer_decomposition(const PointCloud& cloud)
{
    std::vector<TransformedPoint> q(cloud.size());
    for (std::size_t k = 0; k < cloud.size(); ++k) q[k] = psi(cloud[k], cloud.rho());
    std::vector<std::size_t> remaining = psi_order(q);

    std::vector<std::vector<std::size_t>> layers;
    while (!remaining.empty()) {
        // minimal elements = strict running minima of v in (u, v) order
        std::vector<std::size_t> layer, rest;
        double low = std::numeric_limits<double>::infinity();
        for (std::size_t idx : remaining) {
            if (q[idx].v < low) {
                layer.push_back(idx);
                low = q[idx].v;
            } else {
                rest.push_back(idx);
            }
        }
        std::sort(layer.begin(), layer.end());
        layers.push_back(std::move(layer));
        remaining = std::move(rest);
    }
    return layers;
}

void write_cloud_csv(std::ostream& out, const PointCloud& cloud)
{
    char buf[96];
    out << "t,x\n";
    for (const auto& p : cloud.impulses()) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.t, p.x);
        out << buf;
    }
}

std::vector<Impulse> read_impulses_csv(std::istream& in)
{
    std::vector<Impulse> out;
    std::string line;
    std::size_t row = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (line == "t,x") continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("cloud csv row " + std::to_string(row) + ": expected t,x");
        try {
            out.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
        } catch (const std::exception&) {
            throw std::invalid_argument("cloud csv row " + std::to_string(row) + ": not numeric");
        }
    }
    return out;
}

}  // namespace dendrite
