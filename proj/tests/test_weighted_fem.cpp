#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "wie/oracles.hpp"
#include "wie/weighted_fem.hpp"

namespace wie {
namespace {

Vector vec(double x) {
    Vector v(1);
    v[0] = x;
    return v;
}

Vector vec(double x, double y) {
    Vector v(2);
    v << x, y;
    return v;
}

template <class F, class DF>
HermiteTrajectory interpolate(const TimeGrid& grid, F f, DF df) {
    std::vector<Vector> values, slopes;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        values.push_back(vec(f(grid.node(i))));
        slopes.push_back(vec(df(grid.node(i))));
    }
    return HermiteTrajectory(grid, values, slopes);
}

CauchyProblem scalar_problem(double m, double u0, double v0, Force f) {
    return CauchyProblem(m, vec(u0), vec(v0), std::move(f));
}

TEST(BandMatrix, MatchesDense) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const std::size_t n = 12, kd = 3;
    SymmetricBandMatrix band(n, kd);
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = j; i <= std::min(n - 1, j + kd); ++i) {
            const double v = dist(rng);
            band.add_lower(i, j, v);
            dense(i, j) = dense(j, i) = v;
        }
    Eigen::VectorXd x(n);
    for (auto& v : x) v = dist(rng);
    EXPECT_LE((band.multiply(x) - dense * x).norm(), 1e-14);
    EXPECT_LE((band.abs_multiply(x) - dense.cwiseAbs() * x.cwiseAbs()).norm(), 1e-14);
    const auto tail = band.trailing(4);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(tail(i, j), dense(i + 4, j + 4));
}

TEST(Assemble, DofLayoutAndConstraints) {
    const auto grid = make_uniform_grid(4.0, 0.5);
    const CauchyProblem p(1.0, vec(1, 2), vec(3, 4), Force::zero(2));
    const auto form = assemble(p, grid, 2, p.force);
    EXPECT_EQ(form.dim, grid.size() * 4);
    EXPECT_EQ(form.band.half_bandwidth(), 7u);
    ASSERT_EQ(form.constrained_dofs.size(), 4u);
    EXPECT_EQ(form.constrained_dofs[0], std::make_pair(std::size_t{0}, 1.0));
    EXPECT_EQ(form.constrained_dofs[1], std::make_pair(std::size_t{1}, 1.5));
    EXPECT_EQ(form.constrained_dofs[2], std::make_pair(std::size_t{2}, 2.0));
    EXPECT_EQ(form.constrained_dofs[3], std::make_pair(std::size_t{3}, 2.0));
}

TEST(Assemble, StiffnessAndLoadOnPolynomials) {
    const double S = 12.0;
    const auto grid = make_uniform_grid(S, 0.25);
    const double m = 1.5;
    const int h = 3;
    const auto p = scalar_problem(m, 0, 0, Force::constant(vec(2.0)));
    const auto form = assemble(p, grid, h, p.force);

    // affine functions have no curvature
    const auto affine = to_coefficients(interpolate(grid, [](double s) { return 2 - s; }, [](double) { return -1.0; }));
    EXPECT_LE(std::abs(form.quadratic(affine)), 1e-11);

    // (m/2) int_0^S |2|^2 e^{-s} = 2 m (1 - e^{-S})
    const auto square = to_coefficients(interpolate(grid, [](double s) { return s * s; }, [](double s) { return 2 * s; }));
    EXPECT_NEAR(form.quadratic(square), 2 * m * (1 - std::exp(-S)), 1e-10);

    // h^{-2} int_0^S 2 * s e^{-s}
    const auto ramp = to_coefficients(interpolate(grid, [](double s) { return s; }, [](double) { return 1.0; }));
    EXPECT_NEAR(form.linear.dot(ramp), 2.0 / (h * h) * (1 - (1 + S) * std::exp(-S)), 1e-14);
}

TEST(Assemble, ElementOrderDoesNotMatter) {
    const auto grid = make_uniform_grid(10.0, 0.5);
    const auto p = scalar_problem(1.0, 0.5, -1, Force::sinusoid(vec(1), 1.3) + Force::constant(vec(0.2)));
    const auto natural = assemble(p, grid, 4, p.force);
    std::vector<std::size_t> order(grid.elements());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(11);
    std::shuffle(order.begin(), order.end(), rng);
    const auto shuffled = assemble(p, grid, 4, p.force, 6, order);
    for (std::size_t k = 0; k < natural.band.storage().size(); ++k)
        EXPECT_NEAR(natural.band.storage()[k], shuffled.band.storage()[k], 1e-14 * (1 + std::abs(natural.band.storage()[k])));
    EXPECT_LE((natural.linear - shuffled.linear).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(Assemble, RejectsBadInput) {
    const auto p = scalar_problem(1.0, 0, 0, Force::zero(1));
    EXPECT_THROW(assemble(p, make_uniform_grid(4, 0.5), 0, p.force), InvalidArgument);
    EXPECT_THROW(assemble(p, make_uniform_grid(4, 0.5), 1, Force::zero(2)), InvalidArgument);
    EXPECT_THROW(assemble(p, make_uniform_grid(800, 1.0), 1, p.force), ConfigurationError);
}

TEST(SolveConstrained, RequiresLeadingBlock) {
    const auto p = scalar_problem(1.0, 0, 0, Force::zero(1));
    auto form = assemble(p, make_uniform_grid(4, 0.5), 1, p.force);
    form.constrained_dofs[1].first = 5;
    EXPECT_THROW(solve_constrained(form, 1e-10), InvalidArgument);
}

TEST(MinimizeJh, ZeroForceGivesAffineMotion) {
    const auto p = scalar_problem(2.0, 1.0, -0.5, Force::zero(1));
    SolverConfig cfg;
    for (int h : {1, 4, 16, 64}) {
        const auto out = minimize_jh(p, h, cfg);
        for (std::size_t i = 0; i < out.trajectory.grid.size(); ++i) {
            const double s = out.trajectory.grid.node(i);
            ASSERT_NEAR(out.trajectory.values[i][0], 1.0 - 0.5 * s / h, 1e-12) << "h=" << h;
            ASSERT_NEAR(out.trajectory.slopes[i][0], -0.5 / h, 1e-14);
        }
        EXPECT_LE(out.el_residual, cfg.solve_tol);
    }
}

TEST(MinimizeJh, ConstantForceMatchesClassicalMotion) {
    const CauchyProblem p(2.0, vec(0.5, 0), vec(1, -1), Force::constant(vec(1, -3)));
    SolverConfig cfg;
    for (int h : {2, 8, 32}) {
        const auto y = rescale_to_fast(minimize_jh(p, h, cfg).trajectory, h, cfg.T_view);
        for (double t = 0; t <= cfg.T_view; t += 0.125) {
            const auto got = eval_trajectory(y, t);
            const auto want = classical_solution(p, t);
            EXPECT_LE((got.value - want.value).norm(), 1e-9) << "h=" << h << " t=" << t;
            EXPECT_LE((got.curvature - want.curvature).norm(), 1e-8);
        }
    }
}

TEST(MinimizeJh, ComponentsDecouple) {
    const auto fx = Force::sinusoid(vec(1), 2.0);
    const auto fy = Force::constant(vec(-1)) + Force::sinusoid(vec(0.5), 0.7, 1.0);
    const auto fxy = Force::sinusoid(vec(1, 0), 2.0) + Force::constant(vec(0, -1)) + Force::sinusoid(vec(0, 0.5), 0.7, 1.0);
    const CauchyProblem both(1.5, vec(1, 2), vec(-1, 0.5), fxy);
    const SolverConfig cfg;
    const int h = 8;
    const auto u = minimize_jh(both, h, cfg).trajectory;
    const auto ux = minimize_jh(scalar_problem(1.5, 1, -1, fx), h, cfg).trajectory;
    const auto uy = minimize_jh(scalar_problem(1.5, 2, 0.5, fy), h, cfg).trajectory;
    for (std::size_t i = 0; i < u.grid.size(); ++i) {
        ASSERT_NEAR(u.values[i][0], ux.values[i][0], 1e-10);
        ASSERT_NEAR(u.values[i][1], uy.values[i][0], 1e-10);
    }
}

TEST(MinimizeJh, ConfigurationErrors) {
    const auto p = scalar_problem(1.0, 0, 0, Force::zero(1));
    SolverConfig cfg;
    EXPECT_THROW(minimize_jh(p, 400, cfg), ConfigurationError);
    cfg.ds = 0;
    EXPECT_THROW(minimize_jh(p, 4, cfg), InvalidArgument);
    cfg = SolverConfig{};
    EXPECT_THROW(minimize_jh(p, 0, cfg), InvalidArgument);
}

TEST(MinimizeJhProperty, PerturbationsRaiseTheEnergy) {
    const auto p = scalar_problem(1.0, 0.3, 0.7, Force::sinusoid(vec(1), 1.0) + Force::constant(vec(0.4)));
    SolverConfig cfg;
    cfg.s_tail = 20;
    const int h = 4;
    const auto out = minimize_jh(p, h, cfg);
    const auto form = assemble(p, out.trajectory.grid, h, p.force, cfg.quad_order);
    const auto x = to_coefficients(out.trajectory);
    EXPECT_NEAR(form.value(x), out.energy, 1e-14);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd dir(x.size());
        for (auto& v : dir) v = dist(rng);
        dir.head(2).setZero();
        const double eps = 1e-3;
        ASSERT_GE(form.value(x + eps * dir), form.value(x) - 1e-15);
        // quadratic: the gain equals the quadratic form of the perturbation
        EXPECT_NEAR(form.value(x + eps * dir) - form.value(x), form.quadratic(eps * dir), 1e-12);
    }
}

TEST(Rescale, FastTrajectoryIsTheSlowOneReparametrised) {
    const auto grid = make_uniform_grid(20.0, 0.25);
    auto u = interpolate(grid, [](double s) { return std::sin(0.3 * s); }, [](double s) { return 0.3 * std::cos(0.3 * s); });
    const int h = 5;
    const auto y = rescale_to_fast(u, h, 4.0);
    EXPECT_DOUBLE_EQ(y.grid.ds(), 0.05);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> t_dist(0.0, 4.0);
    for (int i = 0; i < 1000; ++i) {
        const double t = t_dist(rng);
        const auto fast = eval_trajectory(y, t);
        const auto slow = eval_trajectory(u, h * t);
        ASSERT_NEAR(fast.value[0], slow.value[0], 1e-13);
        ASSERT_NEAR(fast.slope[0], h * slow.slope[0], 1e-12);
        ASSERT_NEAR(fast.curvature[0], h * h * slow.curvature[0], 1e-10);
    }
    EXPECT_THROW(rescale_to_fast(u, h, 5.0), OutOfDomain);
}

}  // namespace
}  // namespace wie
