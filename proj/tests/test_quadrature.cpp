#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "idyn/grid.hpp"
#include "idyn/quadrature.hpp"

using namespace idyn;

TEST(Grid, UniformEndpointsAndSpacing) {
    const Grid g = Grid::uniform({-3.0, 3.0}, 6);
    ASSERT_EQ(g.nodes().size(), 7u);
    EXPECT_EQ(g.a(), -3.0);
    EXPECT_EQ(g.b(), 3.0);
    EXPECT_DOUBLE_EQ(g.h_max(), 1.0);
    EXPECT_DOUBLE_EQ(g.h_min(), 1.0);
    EXPECT_TRUE(g.is_uniform());
}

TEST(Grid, RejectsUnsortedOrShortNodeLists) {
    EXPECT_THROW(Grid({0.0}), InputError);
    EXPECT_THROW(Grid({0.0, 1.0, 1.0}), InputError);
    EXPECT_THROW(Grid({0.0, 2.0, 1.0}), InputError);
    EXPECT_THROW(Grid::uniform({1.0, 0.0}, 4), InputError);
    EXPECT_THROW(Grid::uniform({0.0, 1.0}, 0), InputError);
}

TEST(Grid, IntervalLookup) {
    const Grid g({0.0, 0.25, 1.0});
    EXPECT_EQ(g.interval_of(0.0), 0u);
    EXPECT_EQ(g.interval_of(0.2), 0u);
    EXPECT_EQ(g.interval_of(0.25), 1u);
    EXPECT_EQ(g.interval_of(1.0), 1u);
    EXPECT_DOUBLE_EQ(g.h_max(), 0.75);
    EXPECT_DOUBLE_EQ(g.h_min(), 0.25);
    EXPECT_FALSE(g.is_uniform());
}

TEST(Trapezoid, UniformThreeNodes) {
    const auto r = trapezoid_rule(Grid({0.0, 0.5, 1.0}));
    ASSERT_EQ(r.size(), 3u);
    EXPECT_DOUBLE_EQ(r.weights[0], 0.25);
    EXPECT_DOUBLE_EQ(r.weights[1], 0.5);
    EXPECT_DOUBLE_EQ(r.weights[2], 0.25);
}

TEST(Trapezoid, SingleInterval) {
    const auto r = trapezoid_rule(Grid({0.0, 1.0}));
    EXPECT_DOUBLE_EQ(r.weights[0], 0.5);
    EXPECT_DOUBLE_EQ(r.weights[1], 0.5);
}

TEST(Trapezoid, NonuniformHalfWidths) {
    // halves of the interval lengths 0.25 and 0.75
    const auto r = trapezoid_rule(Grid({0.0, 0.25, 1.0}));
    EXPECT_DOUBLE_EQ(r.weights[0], 0.25 / 2);
    EXPECT_DOUBLE_EQ(r.weights[1], 0.25 / 2 + 0.75 / 2);
    EXPECT_DOUBLE_EQ(r.weights[2], 0.75 / 2);
}

TEST(Trapezoid, SmallExamples) {
    const auto r = trapezoid_rule(Grid({0.0, 0.5, 1.0}));
    EXPECT_DOUBLE_EQ(integrate(std::vector<double>{1, 1, 1}, r), 1.0);
    EXPECT_DOUBLE_EQ(integrate(std::vector<double>{0, 0.5, 1}, r), 0.5);
    EXPECT_DOUBLE_EQ(integrate(std::vector<double>{0, 0.25, 1}, r), 0.25 * 0 + 0.5 * 0.25 + 0.25 * 1);
    EXPECT_DOUBLE_EQ(integrate([](double x) { return x * x; }, r), 0.375);
}

TEST(Trapezoid, LengthMismatchThrows) {
    const auto r = trapezoid_rule(Grid({0.0, 0.5, 1.0}));
    EXPECT_THROW((void)integrate(std::vector<double>{1, 1}, r), InputError);
}

TEST(Trapezoid, ExactOnAffineForRandomGrids) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> nodes(2 + trial % 17);
        for (auto& x : nodes) x = u(rng);
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        if (nodes.size() < 2) continue;
        const double c0 = u(rng), c1 = u(rng), a = nodes.front(), b = nodes.back();
        const double exact = c0 * (b - a) + c1 * (b * b - a * a) / 2;
        const double got = integrate([&](double x) { return c0 + c1 * x; }, trapezoid_rule(Grid(nodes)));
        EXPECT_NEAR(got, exact, 1e-12 * (1 + std::abs(exact)));
    }
}

TEST(Trapezoid, SecondOrderConvergence) {
    const double exact = std::sin(3.0) - std::sin(-3.0);
    auto err = [&](std::size_t n) {
        return std::abs(integrate([](double x) { return std::cos(x); }, trapezoid_rule(Grid::uniform({-3, 3}, n))) -
                        exact);
    };
    for (std::size_t n = 64; n <= 1024; n *= 2) {
        const double ratio = err(n) / err(2 * n);
        EXPECT_GE(ratio, 3.6) << n;
        EXPECT_LE(ratio, 4.4) << n;
    }
}

TEST(Trapezoid, Linearity) {
    const auto r = trapezoid_rule(Grid::uniform({0, 2}, 37));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<double> u(r.size()), v(r.size()), w(r.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = g(rng);
        v[i] = g(rng);
        w[i] = u[i] + v[i];
    }
    EXPECT_NEAR(integrate(w, r), integrate(u, r) + integrate(v, r), 1e-13);
}
