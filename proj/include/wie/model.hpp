#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "wie/errors.hpp"
#include "wie/forces.hpp"
#include "wie/vector.hpp"

namespace wie {

/// m y'' = f on t > 0 with y(0) = u0, y'(0) = v0.
struct CauchyProblem {
    double m = 1.0;
    Vector u0;
    Vector v0;
    Force force;

    CauchyProblem() = default;

    CauchyProblem(double mass, Vector position, Vector velocity, Force f)
        : m(mass), u0(std::move(position)), v0(std::move(velocity)), force(std::move(f)) {
        validate();
    }

    Eigen::Index dim() const noexcept { return u0.size(); }

    void validate() const {
        if (!(m > 0.0) || !std::isfinite(m)) throw InvalidArgument("mass must be positive and finite");
        if (u0.size() < 1) throw InvalidArgument("problem dimension must be at least 1");
        if (v0.size() != u0.size() || force.dim() != u0.size())
            throw InvalidArgument("u0, v0 and force must share one dimension");
    }
};

/// Uniform node set 0 = s_0 < s_1 < ... < s_{n-1}, s_i = i * ds.
class TimeGrid {
public:
    TimeGrid() = default;

    TimeGrid(double ds, std::size_t node_count) : ds_(ds), count_(node_count) {
        if (!(ds > 0.0) || !std::isfinite(ds)) throw InvalidArgument("grid spacing must be positive");
        if (node_count < 2) throw InvalidArgument("grid needs at least two nodes");
    }

    double ds() const noexcept { return ds_; }
    std::size_t size() const noexcept { return count_; }
    std::size_t elements() const noexcept { return count_ - 1; }
    double node(std::size_t i) const noexcept { return static_cast<double>(i) * ds_; }
    double s_max() const noexcept { return node(count_ - 1); }

    /// Element containing t; nodes belong to the element on their right except the last.
    std::size_t element_of(double t) const noexcept {
        const auto k = static_cast<std::size_t>(std::max(0.0, std::floor(t / ds_)));
        return std::min(k, count_ - 2);
    }

    bool contains(double t) const noexcept { return t >= 0.0 && t <= s_max() * (1.0 + 1e-14); }

    std::vector<double> nodes() const {
        std::vector<double> out(count_);
        for (std::size_t i = 0; i < count_; ++i) out[i] = node(i);
        return out;
    }

private:
    double ds_ = 1.0;
    std::size_t count_ = 2;
};

/// ceil(s_max / ds) + 1 nodes starting at 0; the last node is >= s_max.
inline TimeGrid make_uniform_grid(double s_max, double ds) {
    if (!(ds > 0.0) || !(s_max > 0.0)) throw InvalidArgument("make_uniform_grid: s_max and ds must be positive");
    if (ds > 1.0) throw InvalidArgument("make_uniform_grid: ds must not exceed 1");
    if (s_max < ds) throw InvalidArgument("make_uniform_grid: s_max must be at least ds");
    // absorb representation error so that e.g. 1.0 / 0.1 does not round up to 11 elements
    const auto elements = static_cast<std::size_t>(std::ceil(s_max / ds - 1e-9));
    return TimeGrid(ds, elements + 1);
}

/// C^1 piecewise cubic given by node values and slopes in R^N.
struct HermiteTrajectory {
    TimeGrid grid;
    std::vector<Vector> values;
    std::vector<Vector> slopes;

    HermiteTrajectory() = default;

    HermiteTrajectory(TimeGrid g, std::vector<Vector> v, std::vector<Vector> d)
        : grid(g), values(std::move(v)), slopes(std::move(d)) {
        if (values.size() != grid.size() || slopes.size() != grid.size())
            throw InvalidArgument("trajectory needs one value and one slope per node");
        for (std::size_t i = 0; i < values.size(); ++i)
            if (values[i].size() != values[0].size() || slopes[i].size() != values[0].size())
                throw InvalidArgument("trajectory node data has inconsistent dimension");
    }

    Eigen::Index dim() const noexcept { return values.empty() ? 0 : values.front().size(); }
};

struct TrajectoryPoint {
    Vector value;
    Vector slope;
    Vector curvature;  // second derivative
};

/// Cubic Hermite shape functions on an element of width d, local coordinate xi in [0, 1].
/// Order: value at left, slope at left, value at right, slope at right.
struct HermiteBasis {
    std::array<double, 4> n;    // shape values
    std::array<double, 4> dn;   // d/ds
    std::array<double, 4> d2n;  // d2/ds2

    static HermiteBasis at(double xi, double d) {
        const double x2 = xi * xi;
        const double x3 = x2 * xi;
        return HermiteBasis{
            {1.0 - 3.0 * x2 + 2.0 * x3, d * (xi - 2.0 * x2 + x3), 3.0 * x2 - 2.0 * x3, d * (x3 - x2)},
            {(6.0 * x2 - 6.0 * xi) / d, 1.0 - 4.0 * xi + 3.0 * x2, (6.0 * xi - 6.0 * x2) / d, 3.0 * x2 - 2.0 * xi},
            {(12.0 * xi - 6.0) / (d * d), (6.0 * xi - 4.0) / d, (6.0 - 12.0 * xi) / (d * d), (6.0 * xi - 2.0) / d}};
    }
};

/// Value, slope and second derivative of the trajectory at t. Inside element k
/// the second derivative is the one-sided limit from that element.
inline TrajectoryPoint eval_on_element(const HermiteTrajectory& traj, std::size_t k, double t) {
    const double d = traj.grid.ds();
    const double xi = (t - traj.grid.node(k)) / d;
    const auto b = HermiteBasis::at(xi, d);
    const Vector& u0 = traj.values[k];
    const Vector& d0 = traj.slopes[k];
    const Vector& u1 = traj.values[k + 1];
    const Vector& d1 = traj.slopes[k + 1];
    return TrajectoryPoint{b.n[0] * u0 + b.n[1] * d0 + b.n[2] * u1 + b.n[3] * d1,
                           b.dn[0] * u0 + b.dn[1] * d0 + b.dn[2] * u1 + b.dn[3] * d1,
                           b.d2n[0] * u0 + b.d2n[1] * d0 + b.d2n[2] * u1 + b.d2n[3] * d1};
}

inline TrajectoryPoint eval_trajectory(const HermiteTrajectory& traj, double t) {
    if (!traj.grid.contains(t))
        throw OutOfDomain("trajectory evaluated at t = " + std::to_string(t) + " outside [0, " +
                          std::to_string(traj.grid.s_max()) + "]");
    return eval_on_element(traj, traj.grid.element_of(t), t);
}

/// Discretization and tolerance settings of one minimization.
struct SolverConfig {
    double T_view = 2.0;    // fast-variable window of interest
    double s_tail = 40.0;   // slow-variable truncation tail beyond h * T_view
    double ds = 0.25;       // slow-variable element width
    int quad_order = 6;     // Gauss points per element
    double solve_tol = 1e-10;

    /// e^{-700} is close to the smallest normal double.
    static constexpr double max_weight_exponent = 700.0;

    double s_max(int h) const { return h * T_view + s_tail; }

    void validate(int h) const {
        if (h < 1) throw InvalidArgument("h must be a positive integer");
        if (!(T_view > 0.0) || !(s_tail > 0.0)) throw InvalidArgument("T_view and s_tail must be positive");
        if (!(ds > 0.0) || ds > 1.0) throw InvalidArgument("ds must lie in (0, 1]");
        if (quad_order < 4) throw InvalidArgument("quad_order must be at least 4");
        if (!(solve_tol > 0.0)) throw InvalidArgument("solve_tol must be positive");
        if (s_max(h) > max_weight_exponent)
            throw ConfigurationError("h * T_view + s_tail = " + std::to_string(s_max(h)) +
                                     " exceeds 700; the weight e^{-s} would underflow");
    }
};

}  // namespace wie
