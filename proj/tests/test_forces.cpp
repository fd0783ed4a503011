#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "wie/forces.hpp"

namespace wie {
namespace {

using std::numbers::pi;

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

TEST(EvalForce, Examples) {
    const auto c = Force::constant(vec(2, -1));
    EXPECT_EQ(eval_force(c, 0.0), vec(2, -1));
    EXPECT_EQ(eval_force(c, 17.3), vec(2, -1));

    const auto s = Force::sinusoid(vec(1), 2.0);
    EXPECT_NEAR(eval_force(s, pi / 4)[0], 1.0, 1e-15);

    const auto sampled = Force::sampled({0, 1}, {vec(1), vec(3)}, Interpolation::linear);
    EXPECT_EQ(eval_force(sampled, 2.0)[0], 3.0);
    EXPECT_EQ(eval_force(sampled, 0.5)[0], 2.0);
}

TEST(EvalForce, NegativeTimeIsOutOfDomain) {
    EXPECT_THROW(eval_force(Force::zero(1), -0.1), OutOfDomain);
}

TEST(EvalForce, PolynomialHeldAfterHorizon) {
    const auto p = Force::polynomial({vec(1), vec(-1), vec(0.25)}, 2.0);
    EXPECT_DOUBLE_EQ(p(1.0)[0], 0.25);
    EXPECT_DOUBLE_EQ(p(2.0)[0], 0.0);
    EXPECT_DOUBLE_EQ(p(50.0)[0], 0.0);
    EXPECT_EQ(p.kind(), ForceKind::polynomial);
}

TEST(EvalForce, PeriodicPiecewiseConstant) {
    const auto sq = Force::piecewise_constant({0.0, 1.0}, {vec(1), vec(-1)}, 2.0);
    EXPECT_EQ(sq(0.5)[0], 1.0);
    EXPECT_EQ(sq(1.5)[0], -1.0);
    EXPECT_EQ(sq(10.25)[0], 1.0);
    EXPECT_EQ(sq(11.75)[0], -1.0);
    const auto bp = sq.breakpoints(0.5, 4.5);
    EXPECT_EQ(bp, (std::vector<double>{1.0, 2.0, 3.0, 4.0}));
}

TEST(EvalForce, CompositeKindAndBound) {
    const auto f = Force::constant(vec(1)) + Force::sinusoid(vec(2), 3.0);
    EXPECT_EQ(f.kind(), ForceKind::composite);
    EXPECT_DOUBLE_EQ(f.sup_bound(), 3.0);
    EXPECT_EQ(Force::zero(2).kind(), ForceKind::zero);
    EXPECT_THROW(Force::zero(1) + Force::zero(2), InvalidArgument);
}

TEST(ForceProperty, SupBoundHoldsForEveryKind) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> t_dist(0.0, 100.0);
    const std::vector<Force> forces{
        Force::zero(2),
        Force::constant(vec(2, -1)),
        Force::polynomial({vec(1, 0), vec(-1, 2), vec(0.25, -0.5)}, 3.0),
        Force::sinusoid(vec(1.5, -0.5), 7.0, 0.3),
        Force::piecewise_constant({0.0, 0.3, 1.0}, {vec(1, 1), vec(-2, 0), vec(0.5, 3)}, 1.7),
        Force::sampled({0, 1, 2.5}, {vec(0, 0), vec(3, -4), vec(1, 1)}, Interpolation::linear),
        Force::sampled({0, 1, 2.5}, {vec(0, 0), vec(3, -4), vec(1, 1)}, Interpolation::hold),
        Force::constant(vec(1, 1)) + Force::sinusoid(vec(0, 2), 40.0),
    };
    for (const auto& f : forces)
        for (int i = 0; i < 10000; ++i) {
            const double t = t_dist(rng);
            ASSERT_LE(f(t).norm(), f.sup_bound() * (1 + 1e-15)) << to_string(f.kind()) << " t=" << t;
        }
}

TEST(OscillatoryFamily, Construction) {
    const auto fam = oscillatory_family(Force::zero(1), vec(1));
    const auto f3 = fam.at(3);
    for (double t : {0.0, 0.4, 2.0, 7.7}) EXPECT_DOUBLE_EQ(f3(t)[0], std::sin(3 * t));
    EXPECT_EQ(fam.weak_star_limit.kind(), ForceKind::zero);
    EXPECT_DOUBLE_EQ(fam.uniform_bound, 1.0);

    const auto base = Force::sinusoid(vec(1), 1.0);
    const auto same = oscillatory_family(base, vec(0));
    for (int h : {1, 5, 50}) {
        EXPECT_DOUBLE_EQ(same.at(h)(1.3)[0], std::sin(1.3));
        EXPECT_DOUBLE_EQ(same.at(h).sup_bound(), 1.0);
    }
}

TEST(OscillatoryFamily, UniformBoundIsPreserved) {
    const auto base = Force::constant(vec(0.5, -1.0));
    const Vector amp = vec(0.3, 0.4);
    const auto fam = oscillatory_family(base, amp);
    EXPECT_DOUBLE_EQ(fam.uniform_bound, base.sup_bound() + amp.norm());
    for (int h = 1; h <= 128; h *= 2) EXPECT_DOUBLE_EQ(fam.at(h).sup_bound(), fam.uniform_bound);
}

TEST(SquareWaveFamily, SignOfSine) {
    const auto fam = square_wave_family(Force::zero(1), vec(2));
    const auto f = fam.at(4);
    for (double t : {0.1, 0.7, 1.0, 2.2, 5.3}) EXPECT_EQ(f(t)[0], std::sin(4 * t) > 0 ? 2.0 : -2.0) << t;
    EXPECT_DOUBLE_EQ(fam.uniform_bound, 2.0);
}

std::vector<TestFunction> constant_test(double T) { return {{[](double) { return 1.0; }, T}}; }

TEST(WeakstarGap, Examples) {
    const auto base = Force::sinusoid(vec(1), 1.0);
    EXPECT_LE(weakstar_gap(base, base, constant_test(5.0)), 1e-12);

    const auto fam = oscillatory_family(Force::zero(1), vec(1));
    for (int h : {1, 2, 3, 7, 10, 33}) {
        const double closed = std::abs((1 - std::cos(h * pi)) / h);
        const double gap = weakstar_gap(fam.at(h), fam.weak_star_limit, constant_test(pi));
        EXPECT_NEAR(gap, closed, 1e-12) << h;
        EXPECT_LE(gap, 2.0 / h + 1e-12);
    }
    EXPECT_NEAR(weakstar_gap(fam.at(4), fam.weak_star_limit, constant_test(pi / 2)), 0.0, 1e-12);
}

TEST(WeakstarGap, ResolutionError) {
    const auto fam = oscillatory_family(Force::zero(1), vec(1));
    // period 2 pi / 100 with 8 points on panels of width 0.5: far fewer than 10 per period
    EXPECT_THROW(weakstar_gap(fam.at(100), fam.weak_star_limit, constant_test(1.0), 0.5), ResolutionError);
    EXPECT_NO_THROW(weakstar_gap(fam.at(100), fam.weak_star_limit, constant_test(1.0), 0.05));
}

TEST(WeakstarGapProperty, DecaysLikeOneOverH) {
    // integration by parts: |int_0^T xi sin(ht)| <= (|xi(0)| + |xi(T)| + TV(xi)) / h = 2 / h
    const auto fam = oscillatory_family(Force::zero(1), vec(1));
    std::vector<TestFunction> tests;
    for (int k = 0; k <= 3; ++k) tests.push_back({[k](double t) { return std::pow(t / 5.0, k); }, 5.0});
    for (int h : {4, 8, 16, 32, 64}) EXPECT_LE(weakstar_gap(fam.at(h), fam.weak_star_limit, tests) * h, 2.0 + 1e-9);
}

TEST(LoadSamples, Examples) {
    std::istringstream constant("t,f_1\n0,1\n1,1\n");
    const auto c = load_samples(constant, Interpolation::linear);
    for (double t : {0.0, 0.3, 1.0, 9.0}) EXPECT_EQ(c(t)[0], 1.0);
    EXPECT_EQ(c.sup_bound(), 1.0);

    std::istringstream ramp("# comment\nt,f_1\n\n0,0\n1,2\n");
    const auto r = load_samples(ramp, Interpolation::linear);
    EXPECT_DOUBLE_EQ(r(0.5)[0], 1.0);
    std::istringstream ramp_hold("t,f_1\n0,0\n1,2\n");
    EXPECT_DOUBLE_EQ(load_samples(ramp_hold, Interpolation::hold)(0.5)[0], 0.0);

    std::istringstream two("t,f_1,f_2\n0,1,-1\n0.5,3,4\n");
    const auto v = load_samples(two, Interpolation::linear);
    EXPECT_EQ(v.dim(), 2);
    EXPECT_DOUBLE_EQ(v.sup_bound(), 5.0);
}

std::size_t parse_error_line(const std::string& text) {
    std::istringstream in(text);
    try {
        load_samples(in, Interpolation::linear);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

TEST(LoadSamples, Errors) {
    EXPECT_EQ(parse_error_line("t,f_1\n0,0\n2,1\n1,3\n"), 4u);   // decreasing t
    EXPECT_EQ(parse_error_line("t,f_1\n0,0\n1,1\n1,3\n"), 4u);   // repeated t
    EXPECT_EQ(parse_error_line("t,f_1\n0.5,0\n1,1\n"), 2u);      // t0 != 0
    EXPECT_EQ(parse_error_line("t,f_1\n0,0\n1,abc\n"), 3u);      // malformed value
    EXPECT_EQ(parse_error_line("t,f_1\n0,0\n1,1,2\n"), 3u);      // wrong field count
    EXPECT_EQ(parse_error_line("time,force\n0,0\n"), 1u);        // bad header
    EXPECT_NE(parse_error_line("t,f_1\n"), 0u);                  // no samples
    EXPECT_THROW(load_samples("/nonexistent/force.csv", Interpolation::hold), ParseError);
}

}  // namespace
}  // namespace wie
