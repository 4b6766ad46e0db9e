#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace dendrite {

/// A space-time impulse: time t >= 0, distance x from the soma.
struct Impulse {
    double t = 0.0;
    double x = 0.0;

    friend bool operator==(const Impulse&, const Impulse&) = default;
};

/// Image of an impulse under psi(t, x) = (rho t - x, rho t + x).
struct TransformedPoint {
    double u = 0.0;
    double v = 0.0;
};

inline TransformedPoint psi(const Impulse& p, double rho) { return {rho * p.t - p.x, rho * p.t + p.x}; }

/// Raised when two impulses lie on a common light ray (or coincide).
class GeneralPositionError : public std::invalid_argument {
public:
    GeneralPositionError(std::size_t i, std::size_t j, const Impulse& a, const Impulse& b);
    std::size_t first;
    std::size_t second;
};

/// Finite impulse set sorted by (t, x), in general position for the cone order of speed rho.
class PointCloud {
public:
    PointCloud() = default;
    /// Sorts the impulses, then checks range and general position.
    PointCloud(std::vector<Impulse> impulses, double rho, double L = 1.0);
    /// Like the constructor but rejects input that is not already sorted.
    static PointCloud from_sorted(std::vector<Impulse> impulses, double rho, double L = 1.0);

    const std::vector<Impulse>& impulses() const { return impulses_; }
    std::size_t size() const { return impulses_.size(); }
    bool empty() const { return impulses_.empty(); }
    const Impulse& operator[](std::size_t i) const { return impulses_[i]; }
    double rho() const { return rho_; }
    double L() const { return L_; }

private:
    void check() const;

    std::vector<Impulse> impulses_;
    double rho_ = 1.0;
    double L_ = 1.0;
};

/// (s,x) precedes (s',x') iff |x - x'| <= rho (s' - s).
inline bool precedes(const Impulse& p, const Impulse& q, double rho)
{
    double dx = p.x > q.x ? p.x - q.x : q.x - p.x;
    return dx <= rho * (q.t - p.t);
}

/// Index pair (i, j) with |x_j - x_i| == rho |t_j - t_i| exactly, if any. O(n log n).
bool find_general_position_violation(const std::vector<Impulse>& impulses, double rho, std::size_t& i,
                                     std::size_t& j);

/// Time at which the positive front born at p reaches the soma.
inline double soma_arrival(const Impulse& p, double rho) { return p.t + p.x / rho; }

/// Longest strict chain. Patience sorting in psi coordinates, O(n log n).
std::size_t lis_count(const PointCloud& cloud);

/// Longest chain inside the backward cone of (t, 0).
std::size_t lis_count_before(const PointCloud& cloud, double t);

/// lis_count_before on every point of an increasing grid, in one O(n log n) sweep.
std::vector<std::size_t> lis_profile(const PointCloud& cloud, const std::vector<double>& t_grid);

/// O(n^2) dynamic program on the cone test. Throws std::length_error above max_n points.
std::size_t lis_brute_force(const PointCloud& cloud, std::size_t max_n = 10000);

/// Successive sets of minimal elements, as indices into the cloud.
std::vector<std::vector<std::size_t>> layer_decomposition(const PointCloud& cloud);

/// CSV with header `t,x`.
void write_cloud_csv(std::ostream& out, const PointCloud& cloud);
/// Parses `t,x` rows; no ordering or general-position check.
std::vector<Impulse> read_impulses_csv(std::istream& in);

}  // namespace dendrite
