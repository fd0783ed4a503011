#pragma once

// Reference values that do not go through the finite element pipeline:
// the classical solution of m y'' = f, the convolution form of the
// stationarity condition, and checkers for the weighted inequalities the
// minimizers must satisfy.
//
// Letting psi vanish with its slope at 0 in m int u'' psi'' e^{-s} = int g psi e^{-s}
// (g(s) = h^{-2} f(s/h)) and integrating by parts twice with decay at infinity gives
// m u''(s) e^{-s} = int_s^inf (r - s) g(r) e^{-r} dr, i.e. in the fast variable
//
//   y_h''(t) = (h^2 / m) int_0^inf sigma e^{-h sigma} f(t + sigma) d sigma.
//
// The kernel h^2 sigma e^{-h sigma} is a probability density, and truncating
// it at sigma = s_tail / h loses a mass of (1 + s_tail) e^{-s_tail}.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <variant>
#include <vector>

#include "wie/forces.hpp"
#include "wie/model.hpp"
#include "wie/quadrature.hpp"
#include "wie/vector.hpp"

namespace wie {

/// Outcome of checking lhs <= rhs (or lhs == rhs for identities).
struct LemmaReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // rhs - lhs for inequalities, -|rhs - lhs| for identities
    double tolerance = 0.0;
    bool passed = true;

    static LemmaReport inequality(double lhs, double rhs, double tolerance) {
        return {lhs, rhs, rhs - lhs, tolerance, rhs - lhs >= -tolerance};
    }

    static LemmaReport identity(double lhs, double rhs, double tolerance) {
        const double slack = -std::abs(rhs - lhs);
        return {lhs, rhs, slack, tolerance, slack >= -tolerance};
    }
};

namespace detail {

/// Adaptive Gauss-Kronrod on [a, b], split at the given interior points and
/// into panels of width at most 1. The depth cap bounds the work when the
/// tolerance sits at the roundoff floor of a panel.
template <class F>
double adaptive_integral(F&& g, double a, double b, const std::vector<double>& cuts, double tol = 1e-13) {
    using boost::math::quadrature::gauss_kronrod;
    double total = 0.0;
    double lo = a;
    auto piece = [&](double x0, double x1) {
        if (!(x1 > x0)) return;
        const auto panels = static_cast<int>(std::ceil(x1 - x0));
        for (int k = 0; k < panels; ++k)
            total += gauss_kronrod<double, 31>::integrate(g, x0 + (x1 - x0) * k / panels,
                                                          x0 + (x1 - x0) * (k + 1) / panels, 10, tol);
    };
    for (double c : cuts) {
        if (c <= lo || c >= b) continue;
        piece(lo, c);
        lo = c;
    }
    piece(lo, b);
    return total;
}

/// (int_0^t (t - s) f, int_0^t f) for one term, closed form when available.
struct DoubleIntegral {
    Vector position;
    Vector velocity;
};

inline DoubleIntegral double_integral(const ConstantTerm& c, double t) { return {0.5 * t * t * c.value, t * c.value}; }

inline DoubleIntegral double_integral(const PolynomialTerm& p, double t) {
    auto upto = [&p](double x) {
        Vector pos = Vector::Zero(p.coefficients.front().size());
        Vector vel = pos;
        double power = x;  // x^{k+1}
        for (std::size_t k = 0; k < p.coefficients.size(); ++k) {
            const double kk = static_cast<double>(k);
            vel += p.coefficients[k] * (power / (kk + 1.0));
            pos += p.coefficients[k] * (power * x / ((kk + 1.0) * (kk + 2.0)));
            power *= x;
        }
        return DoubleIntegral{pos, vel};
    };
    if (t <= p.hold_after) return upto(t);
    auto at_hold = upto(p.hold_after);
    const Vector held = eval_term(p, p.hold_after);
    const double dt = t - p.hold_after;
    return {at_hold.position + dt * at_hold.velocity + 0.5 * dt * dt * held, at_hold.velocity + dt * held};
}

inline DoubleIntegral double_integral(const SinusoidTerm& s, double t) {
    if (s.omega == 0.0) return {0.5 * t * t * std::sin(s.phase) * s.amplitude, t * std::sin(s.phase) * s.amplitude};
    const double w = s.omega;
    const double pos = (std::sin(s.phase) - std::sin(w * t + s.phase)) / (w * w) + t * std::cos(s.phase) / w;
    const double vel = (std::cos(s.phase) - std::cos(w * t + s.phase)) / w;
    return {pos * s.amplitude, vel * s.amplitude};
}

template <class Term>
DoubleIntegral double_integral_by_quadrature(const Term& term, double t) {
    const Force f = Force::from_term(term);
    const auto cuts = f.breakpoints(0.0, t);
    Vector pos(f.dim());
    Vector vel(f.dim());
    for (Eigen::Index c = 0; c < f.dim(); ++c) {
        pos[c] = adaptive_integral([&](double s) { return (t - s) * eval_term(term, s)[c]; }, 0.0, t, cuts);
        vel[c] = adaptive_integral([&](double s) { return eval_term(term, s)[c]; }, 0.0, t, cuts);
    }
    return {pos, vel};
}

inline DoubleIntegral double_integral(const PiecewiseConstantTerm& p, double t) {
    return double_integral_by_quadrature(p, t);
}

inline DoubleIntegral double_integral(const SampledTerm& s, double t) { return double_integral_by_quadrature(s, t); }

}  // namespace detail

/// y(t), y'(t), y''(t) of m y'' = f, y(0) = u0, y'(0) = v0.
inline TrajectoryPoint classical_solution(const CauchyProblem& problem, double t) {
    if (!(t >= 0.0)) throw OutOfDomain("classical_solution: negative time");
    Vector pos = problem.u0 + t * problem.v0;
    Vector vel = problem.v0;
    if (t > 0.0) {
        for (const auto& term : problem.force.terms()) {
            const auto di = std::visit([t](const auto& x) { return detail::double_integral(x, t); }, term);
            pos += di.position / problem.m;
            vel += di.velocity / problem.m;
        }
    }
    return {pos, vel, problem.force(t) / problem.m};
}

/// (h^2 / m) int_0^{s_tail / h} sigma e^{-h sigma} f(t + sigma) d sigma by adaptive quadrature.
inline Vector el_second_derivative_quadrature(const Force& f, int h, double m, double t, double s_tail = 40.0) {
    const double hh = static_cast<double>(h);
    // r = h sigma
    std::vector<double> cuts;
    for (double tau : f.breakpoints(t, t + s_tail / hh)) cuts.push_back(hh * (tau - t));
    Vector out(f.dim());
    for (Eigen::Index c = 0; c < f.dim(); ++c)
        out[c] = detail::adaptive_integral([&](double r) { return r * std::exp(-r) * f(t + r / hh)[c]; }, 0.0, s_tail,
                                           cuts, 1e-14) /
                 m;
    return out;
}

/// Second derivative of the rescaled exact minimizer at t, from the convolution
/// identity. Constant and sinusoidal terms use closed forms; the rest fall back
/// to quadrature.
inline Vector el_second_derivative(const Force& f, int h, double m, double t) {
    Vector out = Vector::Zero(f.dim());
    const double hh = static_cast<double>(h);
    std::vector<ForceTerm> rest;
    for (const auto& term : f.terms()) {
        if (const auto* c = std::get_if<ConstantTerm>(&term)) {
            out += c->value / m;
        } else if (const auto* s = std::get_if<SinusoidTerm>(&term)) {
            const std::complex<double> denom(hh, -s->omega);
            const double im = std::imag(std::polar(1.0, s->omega * t + s->phase) / (denom * denom));
            out += (hh * hh / m * im) * s->amplitude;
        } else {
            rest.push_back(term);
        }
    }
    for (const auto& term : rest) out += el_second_derivative_quadrature(Force::from_term(term), h, m, t);
    return out;
}

/// int_0^{s_tail / h} h^2 sigma e^{-h sigma} d sigma, numerically.
inline double kernel_mass(int h, double s_tail = 40.0) {
    const double hh = static_cast<double>(h);
    double total = 0.0;
    for (double r = 0.0; r < s_tail; r += 1.0)
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [hh](double sigma) { return hh * hh * sigma * std::exp(-hh * sigma); }, r / hh, std::min(r + 1.0, s_tail) / hh,
            10, 1e-14);
    return total;
}

/// Weighted integrals int |u|^2 e^{-s}, int |u'|^2 e^{-s}, int |u''|^2 e^{-s} over the grid.
struct WeightedMoments {
    double value = 0.0;
    double slope = 0.0;
    double curvature = 0.0;
};

inline WeightedMoments weighted_moments(const HermiteTrajectory& u, int quad_order = 8) {
    WeightedMoments out;
    for (std::size_t k = 0; k < u.grid.elements(); ++k) {
        const auto rule = element_weighted_integrals(u.grid.node(k), u.grid.node(k + 1), quad_order);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto p = eval_on_element(u, k, rule.points[q]);
            out.value += rule.weights[q] * p.value.squaredNorm();
            out.slope += rule.weights[q] * p.slope.squaredNorm();
            out.curvature += rule.weights[q] * p.curvature.squaredNorm();
        }
    }
    return out;
}

/// Constants of the two weighted estimates
///   int |u'|^2 e^{-t} <= a1 |u'(0)|^2 + a2 int |u''|^2 e^{-t}
///   int |u|^2 e^{-t}  <= b0 |u(0)|^2 + b1 |u'(0)|^2 + b2 int |u''|^2 e^{-t}
struct Lemma21Constants {
    double a1 = 2.0;
    double a2 = 4.0;
    double b0 = 2.0;
    double b1 = 8.0;
    double b2 = 16.0;
};

struct Lemma21Reports {
    LemmaReport first;
    LemmaReport second;
};

inline Lemma21Reports check_lemma21(const HermiteTrajectory& u, double rel_tol = 1e-10,
                                    const Lemma21Constants& k = {}) {
    const auto mom = weighted_moments(u);
    const double u0 = u.values.front().squaredNorm();
    const double d0 = u.slopes.front().squaredNorm();
    const double rhs1 = k.a1 * d0 + k.a2 * mom.curvature;
    const double rhs2 = k.b0 * u0 + k.b1 * d0 + k.b2 * mom.curvature;
    return {LemmaReport::inequality(mom.slope, rhs1, rel_tol * (1.0 + std::abs(rhs1))),
            LemmaReport::inequality(mom.value, rhs2, rel_tol * (1.0 + std::abs(rhs2)))};
}

/// Uniform bounds on [0, T] for a rescaled minimizer:
///   |y''| <= F / m,  |y'| <= |v0| + T F / m,  |y| <= |u0| + T |v0| + T^2 F / (2m)
/// where F bounds |f_h|, each relaxed by the discretization allowance 10 ds^2 F / m
/// (integrated once or twice for the velocity and position bounds).
struct SupnormReports {
    LemmaReport acceleration;
    LemmaReport velocity;
    LemmaReport position;

    bool passed() const { return acceleration.passed && velocity.passed && position.passed; }
};

/// Evaluates fn(point) at every node and Gauss point of the elements meeting [0, T].
template <class Fn>
void for_window_points(const HermiteTrajectory& y, double T, int order, Fn&& fn) {
    const auto unit = gauss_legendre(order);
    for (std::size_t k = 0; k < y.grid.elements(); ++k) {
        const double a = y.grid.node(k);
        if (a >= T) break;
        const double b = std::min(y.grid.node(k + 1), T);
        fn(eval_on_element(y, k, a), a);
        for (double xi : unit.points) {
            const double t = a + (b - a) * xi;
            fn(eval_on_element(y, k, t), t);
        }
        fn(eval_on_element(y, k, b), b);
    }
}

inline SupnormReports check_supnorm_bound(const HermiteTrajectory& y, const CauchyProblem& problem, double f_h_sup,
                                          double T, double ds) {
    double max_acc = 0.0;
    double max_vel = 0.0;
    double max_pos = 0.0;
    for_window_points(y, T, 6, [&](const TrajectoryPoint& p, double) {
        max_acc = std::max(max_acc, p.curvature.norm());
        max_vel = std::max(max_vel, p.slope.norm());
        max_pos = std::max(max_pos, p.value.norm());
    });
    const double core = f_h_sup / problem.m;
    const double allowance = 10.0 * ds * ds * core;
    const double acc_rhs = core + allowance;
    const double vel_rhs = problem.v0.norm() + T * acc_rhs;
    const double pos_rhs = problem.u0.norm() + T * problem.v0.norm() + 0.5 * T * T * acc_rhs;
    constexpr double roundoff = 1e-9;
    return {LemmaReport::inequality(max_acc, acc_rhs, roundoff * (1.0 + acc_rhs)),
            LemmaReport::inequality(max_vel, vel_rhs, roundoff * (1.0 + vel_rhs)),
            LemmaReport::inequality(max_pos, pos_rhs, roundoff * (1.0 + pos_rhs))};
}

namespace detail {

/// int over [a, b] of g(t) with a rule of `order` points, split where the force jumps.
template <class G>
void for_split_points(const Force& f, double scale, double a, double b, const QuadratureRule& unit, G&& g) {
    std::vector<double> cuts{a};
    for (double tau : f.breakpoints(a / scale, b / scale)) cuts.push_back(tau * scale);
    cuts.push_back(b);
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        if (!(cuts[p + 1] > cuts[p])) continue;
        const auto rule = map_rule(unit, cuts[p], cuts[p + 1]);
        for (std::size_t q = 0; q < rule.points.size(); ++q) g(rule.points[q], rule.weights[q]);
    }
}

}  // namespace detail

/// J_h(u) = m/2 int |u''|^2 e^{-s} - h^{-2} int f_h(s/h) . u e^{-s}, slow variable.
inline double slow_energy(const HermiteTrajectory& u, double m, int h, const Force& f_h, int quad_order = 8) {
    const auto unit = gauss_legendre(quad_order);
    const double hh = static_cast<double>(h);
    double inertia = 0.0;
    double work = 0.0;
    for (std::size_t k = 0; k < u.grid.elements(); ++k) {
        detail::for_split_points(f_h, hh, u.grid.node(k), u.grid.node(k + 1), unit, [&](double s, double w) {
            const auto p = eval_on_element(u, k, s);
            const double weight = w * std::exp(-s);
            inertia += weight * p.curvature.squaredNorm();
            work += weight * f_h(s / hh).dot(p.value);
        });
    }
    return 0.5 * m * inertia - work / (hh * hh);
}

/// F_h(y) = m/(2h^2) int |y''|^2 e^{-ht} - int f_h(t) . y e^{-ht}, fast variable.
inline double fast_energy(const HermiteTrajectory& y, double m, int h, const Force& f_h, int quad_order = 8) {
    const auto unit = gauss_legendre(quad_order);
    const double hh = static_cast<double>(h);
    double inertia = 0.0;
    double work = 0.0;
    for (std::size_t k = 0; k < y.grid.elements(); ++k) {
        detail::for_split_points(f_h, 1.0, y.grid.node(k), y.grid.node(k + 1), unit, [&](double t, double w) {
            const auto p = eval_on_element(y, k, t);
            const double weight = w * std::exp(-hh * t);
            inertia += weight * p.curvature.squaredNorm();
            work += weight * f_h(t).dot(p.value);
        });
    }
    return 0.5 * m / (hh * hh) * inertia - work;
}

/// J_h(u) against h^{-1} F_h(y) for y(t) = u(h t).
inline LemmaReport check_scaling_identity(const HermiteTrajectory& u, const HermiteTrajectory& y,
                                          const CauchyProblem& problem, int h, const Force& f_h,
                                          int quad_order = 8) {
    const double lhs = slow_energy(u, problem.m, h, f_h, quad_order);
    const double rhs = fast_energy(y, problem.m, h, f_h, quad_order) / h;
    return LemmaReport::identity(lhs, rhs, 1e-8 * (1.0 + std::abs(lhs)));
}

}  // namespace wie
