#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "wie/errors.hpp"

namespace wie {

/// Points and weights of a quadrature rule. Weights already include any
/// interval length and weight-function factor, so sum_q w_q g(x_q) ~ integral.
struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;

    template <class F>
    auto integrate(F&& g) const {
        auto acc = weights[0] * g(points[0]);
        for (std::size_t q = 1; q < points.size(); ++q) acc += weights[q] * g(points[q]);
        return acc;
    }
};

/// n-point Gauss-Legendre rule on [0, 1]; Newton iteration on P_n.
inline QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw InvalidArgument("gauss_legendre: order must be positive, got " + std::to_string(n));
    // (P_n(x), P_n'(x)) by the three-term recurrence
    auto legendre = [n](double x) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        const double dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        return std::pair{p1, dp};
    };
    QuadratureRule rule;
    rule.points.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre(x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(x).second;
        const double w = 1.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        rule.points[lo] = 0.5 * (1.0 - x);
        rule.points[hi] = 0.5 * (1.0 + x);
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    return rule;
}

/// Maps a rule on [0, 1] onto [a, b], multiplying by the length.
inline QuadratureRule map_rule(const QuadratureRule& unit, double a, double b) {
    QuadratureRule out = unit;
    for (std::size_t q = 0; q < out.points.size(); ++q) {
        out.points[q] = a + (b - a) * unit.points[q];
        out.weights[q] = (b - a) * unit.weights[q];
    }
    return out;
}

/// Gauss-Legendre rule on [a, b] with each weight multiplied by e^{-x_q}, so
/// sum_q w_q g(x_q) approximates the integral of g(s) e^{-s} over [a, b].
inline QuadratureRule element_weighted_integrals(double a, double b, int quad_order) {
    if (!(b > a)) throw InvalidArgument("element_weighted_integrals: need b > a");
    if (a < 0.0) throw InvalidArgument("element_weighted_integrals: need a >= 0");
    QuadratureRule out = map_rule(gauss_legendre(quad_order), a, b);
    for (std::size_t q = 0; q < out.points.size(); ++q) out.weights[q] *= std::exp(-out.points[q]);
    return out;
}

}  // namespace wie
