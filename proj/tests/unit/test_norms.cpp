#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csde/error.hpp"
#include "csde/norms.hpp"

using namespace csde;

namespace {

const Exponent kInf = Exponent::infinity();

// Trapezoid weights on a Dirichlet box, written out directly.
double weight(const Grid& g, std::size_t node) {
  std::vector<std::size_t> idx(g.dim);
  g.unflat(node, idx);
  double w = 1.0;
  for (int a = 0; a < g.dim; ++a) w *= (idx[a] == 0 || idx[a] + 1 == g.nx[a]) ? 0.5 * g.h(a) : g.h(a);
  return w;
}

// O(N^2) weak norm: every sample magnitude is tried as the level.
double brute_weak(const GridFunction& f, double p) {
  const Grid& g = f.grid();
  double best = 0.0;
  for (std::size_t i = 0; i < g.spatial_size(); ++i) {
    const double v = std::abs(f.at(0, i));
    double m = 0.0;
    for (std::size_t j = 0; j < g.spatial_size(); ++j)
      if (std::abs(f.at(0, j)) >= v) m += weight(g, j);
    best = std::max(best, v * std::pow(m, 1.0 / p));
  }
  return best;
}

}  // namespace

TEST(Exponents, LpsIndexAndClassification) {
  EXPECT_DOUBLE_EQ(lps_index({3.0, kInf}, 3), 1.0);
  EXPECT_EQ(lps_classify({3.0, kInf}, 3), Criticality::critical);
  EXPECT_EQ(lps_classify({6.0, 4.0}, 3), Criticality::critical);
  EXPECT_EQ(lps_classify({8.0, 8.0}, 3), Criticality::subcritical);
  EXPECT_EQ(lps_classify({2.0, 2.0}, 3), Criticality::supercritical);
  EXPECT_EQ(lps_classify({kInf, kInf}, 2), Criticality::subcritical);
}

TEST(Exponents, RejectsValuesBelowOne) {
  EXPECT_THROW(Exponent(0.5).validate("p"), ValidationError);
  EXPECT_THROW(Exponent(std::nan("")).validate("p"), ValidationError);
  EXPECT_NO_THROW(Exponent(1.0).validate("p"));
  EXPECT_NO_THROW(kInf.validate("p"));
}

TEST(MixedNorm, ConstantOnUnitCube) {
  Grid g = box_grid(2, 0.0, 1.0, 9).with_time(8, 0.0, 1.0);
  const auto f = GridFunction::sample(g, [](double, std::span<const double>) { return 3.0; });
  EXPECT_NEAR(mixed_norm(f, {2.0, 2.0}), 3.0, 1e-14);
  EXPECT_NEAR(mixed_norm(f, {1.0, kInf}), 3.0, 1e-14);
  EXPECT_NEAR(mixed_norm(f, {kInf, kInf}), 3.0, 0.0);
}

TEST(MixedNorm, SineModeOnTorus) {
  // trapezoid is exact for trigonometric polynomials of low degree on a period
  const auto f = GridFunction::sample(box_grid(1, 0.0, 1.0, 65, Boundary::periodic),
                                      [](double, std::span<const double> x) { return std::sin(2 * M_PI * x[0]); });
  EXPECT_NEAR(lp_norm(f, 2.0), std::sqrt(0.5), 1e-14);
  EXPECT_NEAR(lp_norm(f, 4.0), std::pow(3.0 / 8.0, 0.25), 1e-14);
}

TEST(MixedNorm, TimeInfinityIsMaxOfLevels) {
  Grid g = box_grid(1, 0.0, 1.0, 17).with_time(10, 0.0, 1.0);
  const auto f = GridFunction::sample(g, [](double t, std::span<const double> x) { return (1 + t) * x[0]; });
  double best = 0.0;
  for (std::size_t j = 0; j < g.levels(); ++j) best = std::max(best, lp_norm(f, 2.0, {}, j));
  EXPECT_DOUBLE_EQ(mixed_norm(f, {2.0, kInf}), best);
}

TEST(MixedNorm, RegionRestrictsSupport) {
  const Grid g = box_grid(2, -2.0, 2.0, 41);
  const auto f = GridFunction::sample(g, [](double, std::span<const double> x) {
    return std::hypot(x[0], x[1]) > 1.5 ? 100.0 : 1.0;
  });
  EXPECT_DOUBLE_EQ(mixed_norm(f, {kInf, kInf}, Region::in_ball({{0.0, 0.0}, 1.0})), 1.0);
}

TEST(MixedNorm, MonotoneInExponentOnProbabilitySpace) {
  // on a unit-measure box, ||f||_p is nondecreasing in p
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Grid g = box_grid(2, 0.0, 1.0, 12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(g.node_count());
    for (double& x : v) x = u(rng);
    const GridFunction f(g, 1, v);
    double last = 0.0;
    for (double p : {1.0, 1.5, 2.0, 3.0, 7.0}) {
      const double n = lp_norm(f, p);
      EXPECT_GE(n, last * (1 - 1e-13));
      last = n;
    }
    EXPECT_GE(lp_norm(f, kInf), last * (1 - 1e-13));
  }
}

TEST(WeakNorm, MatchesBruteForceDistributionFunction) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_int_distribution<int> pick(0, 5);
  for (int trial = 0; trial < 40; ++trial) {
    const Grid g = box_grid(1 + trial % 2, 0.0, 1.0 + trial % 3, 5 + trial % 4);
    std::vector<double> v(g.node_count());
    // repeated values exercise ties in the distribution function
    for (double& x : v) x = pick(rng) == 0 ? 1.0 : u(rng);
    const GridFunction f(g, 1, v);
    for (double p : {1.0, 2.0, 3.0, 5.5}) EXPECT_NEAR(weak_lp_norm(f, p), brute_weak(f, p), 1e-12);
  }
}

TEST(WeakNorm, IndicatorOfABox) {
  const Grid g = box_grid(1, 0.0, 4.0, 401);
  const auto f = GridFunction::sample(g, [](double, std::span<const double> x) { return x[0] <= 1.0 ? 2.0 : 0.0; });
  // level 2 on a set of measure 1 + h/2 (the node at x = 1 carries half weight on each side)
  EXPECT_NEAR(weak_lp_norm(f, 3.0), 2.0 * std::cbrt(1.0 + 0.005), 1e-12);
}

TEST(WeakNorm, BelowStrongNorm) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Grid g = box_grid(2, 0.0, 1.5, 10);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> v(g.node_count());
    for (double& x : v) x = u(rng);
    const GridFunction f(g, 1, v);
    for (double p : {1.0, 2.0, 4.0}) EXPECT_LE(weak_lp_norm(f, p), lp_norm(f, p) * (1 + 1e-13));
  }
}

TEST(WeakNorm, MinimumLevelMeasureDropsSmallSets) {
  const Grid g = box_grid(1, 0.0, 1.0, 101);
  const auto f = GridFunction::sample(g, [](double, std::span<const double> x) { return x[0] < 0.015 ? 1e6 : 1.0; });
  WeakNormOptions opts;
  opts.min_level_measure = 0.1;
  EXPECT_GT(weak_lp_norm(f, 2.0), 1e4);
  EXPECT_NEAR(weak_lp_norm(f, 2.0, {}, 0, opts), 1.0, 1e-12);
}

TEST(Cutoff, SmoothstepShape) {
  EXPECT_EQ(smoothstep(0.0), 0.0);
  EXPECT_EQ(smoothstep(1.0), 1.0);
  EXPECT_EQ(smoothstep(-1.0), 0.0);
  EXPECT_EQ(smoothstep(2.0), 1.0);
  EXPECT_NEAR(smoothstep(0.5), 0.5, 1e-15);
  for (int i = 1; i < 100; ++i) {
    const double t = i / 100.0;
    EXPECT_NEAR(smoothstep(t) + smoothstep(1 - t), 1.0, 1e-14);
    EXPECT_GE(smoothstep(t), smoothstep(t - 0.01));
    const double h = 1e-6;
    EXPECT_NEAR(smoothstep_derivative(t), (smoothstep(t + h) - smoothstep(t - h)) / (2 * h), 1e-6);
    EXPECT_LE(smoothstep_derivative(t), 2.0);
  }
}

TEST(Cutoff, ProfileAndFamily) {
  EXPECT_EQ(cutoff_profile(0.3), 1.0);
  EXPECT_EQ(cutoff_profile(1.0), 1.0);
  EXPECT_EQ(cutoff_profile(2.0), 0.0);
  const CutoffFamily chi{{1.0, 1.0}, 0.5};
  const std::vector<double> in = {1.2, 1.2}, out = {2.1, 1.0};
  EXPECT_EQ(chi(in), 1.0);
  EXPECT_EQ(chi(out), 0.0);
  EXPECT_DOUBLE_EQ(chi.gradient_bound(), 4.0);
}

TEST(Localized, NeverExceedsGlobalNorm) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Grid g = box_grid(2, -2.0, 2.0, 17).with_time(4, 0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> v(g.node_count());
    for (double& x : v) x = u(rng);
    const GridFunction f(g, 1, v);
    const auto centers = center_lattice(g.lo, g.hi, 0.5);
    const ExponentPair e{3.0, 4.0};
    EXPECT_LE(localized_norm(f, e, false, centers, 0.5), mixed_norm(f, e) * (1 + 1e-13));
    EXPECT_LE(localized_norm(f, e, true, centers, 0.5), weak_mixed_norm(f, 3.0, 4.0) * (1 + 1e-13));
  }
}

TEST(Localized, SeesTheBumpFromTheNearestCenter) {
  const Grid g = box_grid(1, -4.0, 4.0, 161);
  const auto f = GridFunction::sample(g, [](double, std::span<const double> x) { return std::abs(x[0] - 2.0) < 0.2 ? 1.0 : 0.0; });
  const auto centers = support_lattice(f, 0.25);
  ASSERT_FALSE(centers.empty());
  // a window of radius 1 centered near 2 contains the bump where chi = 1
  EXPECT_NEAR(localized_norm(f, {kInf, kInf}, false, centers, 1.0), 1.0, 1e-14);
}

TEST(Holder, LinearFunctionHasItsSlope) {
  const Grid g = box_grid(1, 0.0, 1.0, 33);
  const auto f = GridFunction::sample(g, [](double, std::span<const double> x) { return -2.5 * x[0]; });
  EXPECT_NEAR(holder_seminorm(f, 1.0), 2.5, 1e-12);
}

TEST(Holder, DominatesEveryNeighbourPair) {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Grid g = box_grid(2, 0.0, 1.0, 9).with_time(4, 0.0, 0.25);
  std::vector<double> v(g.node_count());
  for (double& x : v) x = u(rng);
  const GridFunction f(g, 1, v);
  const double alpha = 0.5, s = holder_seminorm(f, alpha);
  std::vector<double> x(2), y(2);
  for (std::size_t j = 0; j < g.levels(); ++j)
    for (std::size_t k = 0; k < g.spatial_size(); ++k)
      for (std::size_t k2 = 0; k2 < g.spatial_size(); ++k2) {
        g.position(k, x);
        g.position(k2, y);
        const double rho = std::hypot(x[0] - y[0], x[1] - y[1]);
        if (rho == 0.0 || rho > 2.0 * g.h(0) * std::sqrt(2.0) + 1e-12) continue;
        EXPECT_LE(std::abs(f.at(j, k) - f.at(j, k2)) / std::pow(rho, alpha), s * (1 + 1e-12));
      }
}
