#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csde/error.hpp"
#include "csde/inequalities.hpp"

using namespace csde;

TEST(Gradient, ExactForQuadraticsIncludingFaces) {
  const Grid g = box_grid(2, -1.0, 2.0, 13);
  const auto u = GridFunction::sample(g, [](double, std::span<const double> x) {
    return 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[0] + 3.0 * x[0] * x[1] - x[1] * x[1];
  });
  const auto du = gradient(u);
  ASSERT_EQ(du.components(), 2u);
  std::vector<double> x(2);
  for (std::size_t k = 0; k < g.spatial_size(); ++k) {
    g.position(k, x);
    EXPECT_NEAR(du.at(0, k, 0), 2.0 + x[0] + 3.0 * x[1], 1e-11);
    EXPECT_NEAR(du.at(0, k, 1), -1.0 + 3.0 * x[0] - 2.0 * x[1], 1e-11);
  }
}

TEST(Gradient, WrapsOnPeriodicGrids) {
  const Grid g = box_grid(1, 0.0, 1.0, 129, Boundary::periodic);
  const auto u = GridFunction::sample(g, [](double, std::span<const double> x) { return std::sin(2 * M_PI * x[0]); });
  const auto du = gradient(u);
  const double h = g.h(0);
  // central difference of a sine mode: exact symbol sin(2 pi h) / h
  const double symbol = std::sin(2 * M_PI * h) / h;
  std::vector<double> x(1);
  for (std::size_t k = 0; k < g.spatial_size(); ++k) {
    g.position(k, x);
    EXPECT_NEAR(du.at(0, k), symbol * std::cos(2 * M_PI * x[0]), 1e-10);
  }
}

TEST(Hessian, FrobeniusNormOfQuadratic) {
  const Grid g = box_grid(2, -1.0, 1.0, 11);
  const auto u = GridFunction::sample(g, [](double, std::span<const double> x) { return x[0] * x[0] + x[0] * x[1]; });
  const auto h = hessian_norm(u);
  // [[2, 1], [1, 0]]
  for (std::size_t k = 0; k < g.spatial_size(); ++k) EXPECT_NEAR(h.at(0, k), std::sqrt(6.0), 1e-9);
}

TEST(Embedding, IndicatorHasClosedFormSides) {
  const Grid g = box_grid(1, 0.0, 1.0, 101);
  const auto f = GridFunction::sample(g, [](double, std::span<const double>) { return 2.0; });
  const auto r = weak_embedding_check(f, 2.0, 3.0);
  EXPECT_NEAR(r.measure, 1.0, 1e-14);
  EXPECT_NEAR(r.lhs, 2.0, 1e-14);
  EXPECT_NEAR(r.weak, 2.0, 1e-14);
  EXPECT_NEAR(r.constant, std::sqrt(2.0) * std::cbrt(2.0), 1e-14);
  EXPECT_TRUE(r.holds);
}

TEST(Embedding, HoldsOnRandomPiecewiseConstantFields) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> val(-5.0, 5.0), pexp(1.05, 4.0), gap(0.05, 6.0);
  std::uniform_int_distribution<int> pieces(1, 8);
  for (int trial = 0; trial < 60; ++trial) {
    const Grid g = box_grid(1 + trial % 2, 0.0, 1.0 + 0.5 * (trial % 3), 21);
    const int m = pieces(rng);
    std::vector<double> levels(m);
    for (double& v : levels) v = val(rng);
    const auto f = GridFunction::sample(g, [&](double, std::span<const double> x) {
      const int cell = std::min(m - 1, int(x[0] / g.hi[0] * m));
      return levels[cell];
    });
    const double p = pexp(rng), r = p + gap(rng);
    const auto res = weak_embedding_check(f, p, r);
    EXPECT_TRUE(res.holds) << "p=" << p << " r=" << r << " lhs=" << res.lhs << " rhs=" << res.rhs;
    EXPECT_LE(res.lhs, res.rhs * (1 + 1e-12));
  }
}

TEST(Embedding, RejectsBadExponents) {
  const auto f = GridFunction::sample(box_grid(1, 0.0, 1.0, 5), [](double, std::span<const double>) { return 1.0; });
  EXPECT_THROW(weak_embedding_check(f, 3.0, 2.0), ValidationError);
  EXPECT_THROW(weak_embedding_check(f, 1.0, 2.0), ValidationError);
}

TEST(Isoperimetric, LinearRampSatisfiesTheBound) {
  const Grid g = box_grid(2, -1.0, 1.0, 41);
  const auto u = GridFunction::sample(g, [](double, std::span<const double> x) { return x[0]; });
  const auto r = isoperimetric_check(u);
  EXPECT_GT(r.measure_a, 0.0);
  EXPECT_GT(r.measure_b, 0.0);
  EXPECT_GT(r.measure_d, 0.0);
  EXPECT_TRUE(r.holds);
}

TEST(Isoperimetric, JumpWithEmptyTransitionHasInfiniteRightSide) {
  const Grid g = box_grid(2, -1.0, 1.0, 40);
  const auto u = GridFunction::sample(g, [](double, std::span<const double> x) { return x[0] > 0 ? 1.0 : -1.0; });
  const auto r = isoperimetric_check(u);
  EXPECT_EQ(r.measure_d, 0.0);
  EXPECT_TRUE(r.rhs_infinite);
}

TEST(Nirenberg, RequiresAdmissibleExponents) {
  const auto u = GridFunction::sample(box_grid(2, -1.0, 1.0, 9), [](double, std::span<const double> x) { return x[0]; });
  EXPECT_THROW(nirenberg_ratio(u, 1, 2, 2.0, 3.0), ValidationError);
  EXPECT_THROW(nirenberg_ratio(u, 1, 3, 2.0, 6.0), ValidationError);
}

TEST(Nirenberg, ExponentsFollowFromPAndQ) {
  const Grid g = box_grid(2, -3.0, 3.0, 41);
  const auto u = GridFunction::sample(g, [](double, std::span<const double> x) {
    return std::exp(-(x[0] * x[0] + x[1] * x[1]));
  });
  const auto r = nirenberg_ratio(u, 1, 2, 2.0, 6.0);
  EXPECT_DOUBLE_EQ(r.alpha, 0.5);
  EXPECT_DOUBLE_EQ(r.theta, 1.0 / 3.0);
  EXPECT_GT(r.ratio, 0.0);
  EXPECT_NEAR(r.rhs, std::pow(r.hess_p, r.theta) * std::pow(r.holder, 1 - r.theta), 1e-12 * r.rhs);
}
