#pragma once

// Experiment driver: minimize for a sequence of h, rescale, and compare with
// the classical solution driven by the weak-* limit force.

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "wie/forces.hpp"
#include "wie/model.hpp"
#include "wie/oracles.hpp"
#include "wie/weighted_fem.hpp"

namespace wie {

struct ErrorMetrics {
    double sup_err_y = 0.0;
    double sup_err_dy = 0.0;
    double weakstar_gap_ypp = 0.0;
    double el_residual = 0.0;
};

/// Everything one (scenario, h) run produces.
struct RunResult {
    int h = 1;
    HermiteTrajectory trajectory;  // fast variable
    ErrorMetrics metrics;
    std::vector<double> gaps;      // per test function, same order as test_basket()
    double energy = 0.0;
    double condition_estimate = 1.0;
    double initial_deviation = 0.0;  // max(|y(0) - u0|, |y'(0) - v0|)
    double half_range = 0.0;         // max over components of (max y - min y) / 2 on the window
    SupnormReports supnorm;
    LemmaReport scaling;
};

/// Smooth bump supported in (0, T).
inline double bump(double t, double T) {
    const double x = 2.0 * t / T - 1.0;
    if (std::abs(x) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

/// (t/T)^k for k = 0..3, then the bump.
inline std::vector<TestFunction> test_basket(double T) {
    std::vector<TestFunction> out;
    for (int k = 0; k <= 3; ++k) out.push_back({[k, T](double t) { return std::pow(t / T, k); }, T});
    out.push_back({[T](double t) { return bump(t, T); }, T});
    return out;
}

/// |int_0^T (y'' - f/m) xi dt| for each test function xi.
inline std::vector<double> acceleration_gaps(const HermiteTrajectory& y, const Force& limit, double m, double T,
                                             int order) {
    const auto basket = test_basket(T);
    std::vector<Vector> acc(basket.size(), Vector::Zero(y.dim()));
    const auto unit = gauss_legendre(order);
    for (std::size_t k = 0; k < y.grid.elements(); ++k) {
        const double a = y.grid.node(k);
        if (a >= T) break;
        const double b = std::min(y.grid.node(k + 1), T);
        detail::for_split_points(limit, 1.0, a, b, unit, [&](double t, double w) {
            const Vector diff = eval_on_element(y, k, t).curvature - limit(t) / m;
            for (std::size_t j = 0; j < basket.size(); ++j) acc[j] += (w * basket[j].fn(t)) * diff;
        });
    }
    std::vector<double> out;
    for (const auto& v : acc) out.push_back(v.norm());
    return out;
}

/// Minimize J_h for f_h = sequence.at(h), rescale, and measure against the
/// classical solution with the limit force.
inline RunResult run_single(const CauchyProblem& problem, const ForceSequence& sequence, int h,
                            const SolverConfig& config) {
    const Force f_h = sequence.at(h);
    const auto minimizer = minimize_jh(problem, h, config, f_h);
    CauchyProblem limit_problem = problem;
    limit_problem.force = sequence.weak_star_limit;

    RunResult out;
    out.h = h;
    out.trajectory = rescale_to_fast(minimizer.trajectory, h, config.T_view);
    out.energy = minimizer.energy;
    out.condition_estimate = minimizer.condition_estimate;
    out.metrics.el_residual = minimizer.el_residual;

    const Eigen::Index n = problem.dim();
    Vector lo = Vector::Constant(n, std::numeric_limits<double>::infinity());
    Vector hi = -lo;
    for_window_points(out.trajectory, config.T_view, 4, [&](const TrajectoryPoint& p, double t) {
        const auto exact = classical_solution(limit_problem, t);
        out.metrics.sup_err_y = std::max(out.metrics.sup_err_y, (p.value - exact.value).norm());
        out.metrics.sup_err_dy = std::max(out.metrics.sup_err_dy, (p.slope - exact.slope).norm());
        lo = lo.cwiseMin(p.value);
        hi = hi.cwiseMax(p.value);
    });
    out.half_range = 0.5 * (hi - lo).maxCoeff();

    out.gaps = acceleration_gaps(out.trajectory, limit_problem.force, problem.m, config.T_view, config.quad_order + 2);
    out.metrics.weakstar_gap_ypp = *std::max_element(out.gaps.begin(), out.gaps.end());

    out.initial_deviation = std::max((out.trajectory.values.front() - problem.u0).lpNorm<Eigen::Infinity>(),
                                     (out.trajectory.slopes.front() - problem.v0).lpNorm<Eigen::Infinity>());
    out.supnorm = check_supnorm_bound(out.trajectory, problem, f_h.sup_bound(), config.T_view, config.ds);
    out.scaling = check_scaling_identity(minimizer.trajectory, out.trajectory, problem, h, f_h, config.quad_order + 2);
    return out;
}

struct SweepReport {
    std::vector<int> h_values;
    std::vector<RunResult> runs;
    std::optional<double> empirical_rate;  // -slope of log sup_err_y against log h
    SolverConfig config;
};

/// Least-squares slope of log(err) against log(h), negated, over entries with
/// err >= floor. Empty when fewer than two entries qualify.
inline std::optional<double> fit_rate(const std::vector<int>& h_values, const std::vector<double>& errors,
                                      double floor) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < h_values.size(); ++i) {
        if (!(errors[i] >= floor)) continue;
        xs.push_back(std::log(static_cast<double>(h_values[i])));
        ys.push_back(std::log(errors[i]));
    }
    if (xs.size() < 2) return std::nullopt;
    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / n;
        my += ys[i] / n;
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return -sxy / sxx;
}

/// Runs every h as an independent job; results are gathered in h order.
inline SweepReport run_sweep(const CauchyProblem& problem, const ForceSequence& sequence,
                             const std::vector<int>& h_values, const SolverConfig& config) {
    if (h_values.empty()) throw InvalidArgument("run_sweep: empty h list");
    for (std::size_t i = 1; i < h_values.size(); ++i)
        if (h_values[i] <= h_values[i - 1]) throw InvalidArgument("run_sweep: h values must be strictly increasing");
    for (int h : h_values) config.validate(h);

    std::vector<std::future<RunResult>> jobs;
    for (int h : h_values)
        jobs.push_back(std::async(std::launch::async, [&, h] { return run_single(problem, sequence, h, config); }));
    SweepReport report;
    report.h_values = h_values;
    report.config = config;
    for (auto& job : jobs) report.runs.push_back(job.get());

    std::vector<double> errors;
    for (const auto& r : report.runs) errors.push_back(r.metrics.sup_err_y);
    report.empirical_rate = fit_rate(h_values, errors, 100.0 * config.solve_tol);
    return report;
}

struct MeshRefinementRow {
    double ds = 0.0;
    double deviation = 0.0;  // max |y'' - convolution oracle| on the window
};

/// Separates discretization error from the h-limit: at fixed h, compare the
/// discrete y'' with the convolution oracle for decreasing element widths.
inline std::vector<MeshRefinementRow> mesh_refinement_study(const CauchyProblem& problem, const Force& f_h, int h,
                                                            const std::vector<double>& ds_values,
                                                            const SolverConfig& base) {
    if (ds_values.empty()) throw InvalidArgument("mesh_refinement_study: no element widths given");
    for (std::size_t i = 0; i < ds_values.size(); ++i) {
        if (!(ds_values[i] > 0.0) || ds_values[i] > 1.0)
            throw InvalidArgument("mesh_refinement_study: element widths must lie in (0, 1]");
        if (i > 0 && !(ds_values[i] < ds_values[i - 1]))
            throw InvalidArgument("mesh_refinement_study: element widths must be decreasing");
    }
    std::vector<MeshRefinementRow> rows;
    const auto unit = gauss_legendre(base.quad_order);
    for (double ds : ds_values) {
        SolverConfig config = base;
        config.ds = ds;
        const auto minimizer = minimize_jh(problem, h, config, f_h);
        const auto y = rescale_to_fast(minimizer.trajectory, h, config.T_view);
        double deviation = 0.0;
        for (std::size_t k = 0; k < y.grid.elements() && y.grid.node(k) < config.T_view; ++k) {
            const double a = y.grid.node(k);
            const double b = std::min(y.grid.node(k + 1), config.T_view);
            for (double xi : unit.points) {
                const double t = a + (b - a) * xi;
                const Vector diff = eval_on_element(y, k, t).curvature - el_second_derivative(f_h, h, problem.m, t);
                deviation = std::max(deviation, diff.norm());
            }
        }
        rows.push_back({ds, deviation});
    }
    return rows;
}

/// Random Hermite data with node values and slopes uniform in [-range, range].
template <class Rng>
HermiteTrajectory random_trajectory(Rng& rng, const TimeGrid& grid, Eigen::Index dim, double range = 10.0) {
    std::uniform_real_distribution<double> dist(-range, range);
    std::vector<Vector> values(grid.size(), Vector(dim));
    std::vector<Vector> slopes(grid.size(), Vector(dim));
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (Eigen::Index c = 0; c < dim; ++c) {
            values[i][c] = dist(rng);
            slopes[i][c] = dist(rng);
        }
    return HermiteTrajectory(grid, std::move(values), std::move(slopes));
}

}  // namespace wie
