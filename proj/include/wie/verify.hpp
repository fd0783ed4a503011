#pragma once

// The self-check suite behind `wie verify`: randomized weighted inequalities,
// oracle self-consistency, and invariants of a few reference minimizations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wie/lab.hpp"
#include "wie/oracles.hpp"
#include "wie/report.hpp"

namespace wie {

/// Deliberate defects the suite must catch (used to test the suite itself).
struct FaultInjection {
    bool lemma21_first_sign = false;  // flips the sign of the curvature constant in the first estimate
};

namespace detail {

inline Vector scalar_vector(double x) {
    Vector v(1);
    v[0] = x;
    return v;
}

/// Worst case (smallest relative slack) over a list of reports.
inline CheckRecord worst_of(const std::string& name, const std::vector<LemmaReport>& reports) {
    CheckRecord out{name, true, 0.0, 0.0};
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : reports) {
        out.passed = out.passed && r.passed;
        const double rel = r.slack / (1.0 + std::abs(r.rhs));
        if (rel < worst) {
            worst = rel;
            out.lhs = r.lhs;
            out.rhs = r.rhs;
        }
    }
    return out;
}

/// Affine or monomial trajectory t^p sampled as Hermite data on `grid`.
inline HermiteTrajectory monomial_trajectory(const TimeGrid& grid, int power) {
    std::vector<Vector> values;
    std::vector<Vector> slopes;
    for (double s : grid.nodes()) {
        values.push_back(scalar_vector(std::pow(s, power)));
        slopes.push_back(scalar_vector(power * std::pow(s, power - 1)));
    }
    return HermiteTrajectory(grid, std::move(values), std::move(slopes));
}

}  // namespace detail

inline std::vector<CheckRecord> run_verify(std::uint64_t seed, const FaultInjection& fault = {}) {
    using detail::scalar_vector;
    std::mt19937_64 rng(seed);
    std::vector<CheckRecord> checks;

    // weighted estimates on random and analytic trajectories
    {
        Lemma21Constants constants;
        if (fault.lemma21_first_sign) constants.a2 = -constants.a2;
        const TimeGrid grid = make_uniform_grid(40.0, 0.5);
        std::vector<LemmaReport> first;
        std::vector<LemmaReport> second;
        for (int i = 0; i < 1000; ++i) {
            const auto r = check_lemma21(random_trajectory(rng, grid, 1 + i % 3), 1e-10, constants);
            first.push_back(r.first);
            second.push_back(r.second);
        }
        for (int power : {1, 2}) {
            const auto r = check_lemma21(detail::monomial_trajectory(grid, power), 1e-10, constants);
            first.push_back(r.first);
            second.push_back(r.second);
        }
        checks.push_back(detail::worst_of("lemma21-first", first));
        checks.push_back(detail::worst_of("lemma21-second", second));
    }

    // kernel h^2 sigma e^{-h sigma} has unit mass up to the truncated tail
    {
        double worst = 0.0;
        for (int h = 1; h <= 128; ++h) worst = std::max(worst, std::abs(kernel_mass(h) - 1.0));
        checks.push_back({"kernel-normalization", worst <= 1e-12, worst, 1e-12});
    }

    // closed-form convolution oracle against brute-force quadrature
    {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<int> pick_h(1, 128);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const int h = pick_h(rng);
            const double t = 5.0 * unit(rng);
            const double m = 0.5 + 2.0 * unit(rng);
            Force f;
            switch (i % 3) {
                case 0: f = Force::constant(scalar_vector(4.0 * unit(rng) - 2.0)); break;
                case 1: f = Force::sinusoid(scalar_vector(2.0 * unit(rng)), 5.0 * unit(rng), 6.0 * unit(rng)); break;
                default:
                    f = oscillatory_family(Force::sinusoid(scalar_vector(1.0), 1.0), scalar_vector(unit(rng))).at(h);
            }
            const double diff =
                (el_second_derivative(f, h, m, t) - el_second_derivative_quadrature(f, h, m, t)).norm();
            worst = std::max(worst, diff);
        }
        checks.push_back({"el-closed-form-vs-quadrature", worst <= 1e-10, worst, 1e-10});
    }

    // classical solution satisfies m y'' = f (central differences)
    {
        const Force forces[] = {
            Force::sinusoid(scalar_vector(1.5), 2.0, 0.3),
            Force::polynomial({scalar_vector(1.0), scalar_vector(-0.5), scalar_vector(0.25)}, 3.0),
            Force::sampled({0.0, 1.0, 2.0, 3.0}, {scalar_vector(0.0), scalar_vector(2.0), scalar_vector(-1.0),
                                                 scalar_vector(0.5)},
                           Interpolation::linear),
        };
        constexpr double step = 1e-3;
        double worst = 0.0;
        for (const auto& f : forces) {
            const CauchyProblem p(2.0, scalar_vector(1.0), scalar_vector(-0.5), f);
            for (double t : {0.4, 1.3, 2.6, 4.5}) {
                const double fd = (classical_solution(p, t + step).value[0] - 2.0 * classical_solution(p, t).value[0] +
                                   classical_solution(p, t - step).value[0]) /
                                  (step * step);
                worst = std::max(worst, std::abs(fd - f(t)[0] / p.m));
            }
        }
        checks.push_back({"classical-solution-ode", worst <= 1e-5, worst, 1e-5});
    }

    // J_h(u) = h^{-1} F_h(y) for random trajectories
    {
        std::uniform_int_distribution<int> pick_h(1, 8);
        std::vector<LemmaReport> reports;
        for (int i = 0; i < 100; ++i) {
            const int h = pick_h(rng);
            const TimeGrid grid = make_uniform_grid(2.0 * h + 40.0, 0.5);
            const auto u = random_trajectory(rng, grid, 1);
            const CauchyProblem p(1.0, u.values[0], u.slopes[0] * h, Force::sinusoid(scalar_vector(1.0), 1.0));
            reports.push_back(check_scaling_identity(u, rescale_to_fast(u, h, 2.0), p, h, p.force));
        }
        checks.push_back(detail::worst_of("scaling-identity", reports));
    }

    // reference minimizations: exactness, bounds, stationarity
    {
        SolverConfig config;
        double exact_err = 0.0;
        for (int h : {1, 8, 64}) {
            const CauchyProblem zero(2.0, scalar_vector(1.0), scalar_vector(3.0), Force::zero(1));
            const CauchyProblem constant(2.0, scalar_vector(1.0), scalar_vector(3.0), Force::constant(scalar_vector(2.0)));
            exact_err = std::max(exact_err, run_single(zero, ForceSequence::fixed(zero.force), h, config).metrics.sup_err_y);
            exact_err = std::max(exact_err,
                                 run_single(constant, ForceSequence::fixed(constant.force), h, config).metrics.sup_err_y);
        }
        checks.push_back({"exactness", exact_err <= 1e-9, exact_err, 1e-9});

        const CauchyProblem sin_fixed(1.0, scalar_vector(1.0), scalar_vector(0.0), Force::sinusoid(scalar_vector(1.0), 1.0));
        const CauchyProblem rest(1.0, scalar_vector(0.0), scalar_vector(0.0), Force::zero(1));
        struct Case {
            const CauchyProblem* problem;
            ForceSequence sequence;
        };
        const Case cases[] = {{&sin_fixed, ForceSequence::fixed(sin_fixed.force)},
                              {&rest, oscillatory_family(rest.force, scalar_vector(1.0))},
                              {&rest, square_wave_family(rest.force, scalar_vector(1.0))}};
        std::vector<LemmaReport> bounds;
        double residual = 0.0;
        for (const auto& c : cases)
            for (int h : {4, 16}) {
                const auto run = run_single(*c.problem, c.sequence, h, config);
                bounds.push_back(run.supnorm.acceleration);
                bounds.push_back(run.supnorm.velocity);
                bounds.push_back(run.supnorm.position);
                residual = std::max(residual, run.metrics.el_residual);
            }
        checks.push_back(detail::worst_of("supnorm-bound", bounds));
        checks.push_back({"first-order-relation", residual <= 10.0 * config.solve_tol, residual, 10.0 * config.solve_tol});

        const auto rows = mesh_refinement_study(sin_fixed, sin_fixed.force, 8, {0.5, 0.25, 0.125}, config);
        double worst_ratio = 4.0;
        bool ok = true;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double ratio = rows[i - 1].deviation / rows[i].deviation;
            ok = ok && ratio >= 3.0 && ratio <= 5.0;
            if (std::abs(ratio - 4.0) >= std::abs(worst_ratio - 4.0)) worst_ratio = ratio;
        }
        checks.push_back({"mesh-refinement-order", ok, worst_ratio, 4.0});
    }

    // weak-* proxy for the oscillatory family: integrating by parts,
    // |int_0^T xi sin(ht)| <= (|xi(0)| + |xi(T)| + TV(xi)) / h = 2 / h for xi = (t/T)^k
    {
        const auto family = oscillatory_family(Force::zero(1), scalar_vector(1.0));
        std::vector<TestFunction> tests;
        for (int k = 0; k <= 3; ++k) tests.push_back({[k](double t) { return std::pow(t / 5.0, k); }, 5.0});
        double worst = 0.0;
        for (int h : {4, 8, 16, 32, 64})
            worst = std::max(worst, weakstar_gap(family.at(h), family.weak_star_limit, tests) * h);
        checks.push_back({"weakstar-gap-decay", worst <= 2.0 * (1.0 + 1e-9), worst, 2.0});
    }
    return checks;
}

}  // namespace wie
