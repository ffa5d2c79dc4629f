#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "csde/error.hpp"
#include "csde/mollifier.hpp"

using namespace csde;

namespace {

// |S^{d-1}| int_0^1 profile(r) r^{d-1} dr by composite Simpson.
double ball_integral(const Mollifier& rho, int d) {
  const double area = 2.0 * std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0);
  const int n = 200000;
  const double h = 1.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * rho.profile(r) * std::pow(r, d - 1);
  }
  return area * s * h / 3.0;
}

}  // namespace

TEST(Mollifier, NormalizationGivesUnitMass) {
  const auto rho = Mollifier::standard_bump();
  for (int d = 1; d <= 4; ++d) EXPECT_NEAR(rho.normalization(d) * ball_integral(rho, d), 1.0, 1e-10) << "d=" << d;
}

TEST(Mollifier, SupportedInTheUnitBall) {
  const auto rho = Mollifier::standard_bump();
  EXPECT_EQ(rho.profile(1.0), 0.0);
  EXPECT_EQ(rho.profile(1.5), 0.0);
  EXPECT_NEAR(rho.profile(0.0), std::exp(-1.0), 1e-15);
  EXPECT_GT(rho.density(0.99, 3), 0.0);
}

TEST(Mollify, ReproducesConstants) {
  for (auto b : {Boundary::dirichlet, Boundary::periodic}) {
    const auto f = GridFunction::sample(box_grid(2, 0.0, 1.0, 33, b), [](double, std::span<const double>) { return 4.25; });
    const auto m = mollify(f, 8);
    for (double v : m.values()) EXPECT_NEAR(v, 4.25, 1e-13);
  }
}

TEST(Mollify, PreservesMassOnTheTorus) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Grid g = box_grid(2, 0.0, 1.0, 33, Boundary::periodic);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> v(g.node_count());
    for (double& x : v) x = u(rng);
    // make the duplicated faces consistent with periodicity
    GridFunction f(g, 1, v);
    std::vector<std::size_t> idx(2);
    for (std::size_t k = 0; k < g.spatial_size(); ++k) {
      g.unflat(k, idx);
      if (idx[0] == 32 || idx[1] == 32) {
        auto src = idx;
        for (auto& i : src) i %= 32;
        f.at(0, k) = f.at(0, g.flat(src));
      }
    }
    auto interior_sum = [&](const GridFunction& h) {
      double s = 0.0;
      for (std::size_t k = 0; k < g.spatial_size(); ++k) {
        g.unflat(k, idx);
        if (idx[0] < 32 && idx[1] < 32) s += h.at(0, k);
      }
      return s;
    };
    EXPECT_NEAR(interior_sum(mollify(f, 6)), interior_sum(f), 1e-11);
  }
}

TEST(Mollify, KeepsAffineFunctionsAwayFromTheBoundary) {
  const Grid g = box_grid(1, -1.0, 1.0, 201);
  const auto f = GridFunction::sample(g, [](double, std::span<const double> x) { return 3.0 * x[0] - 1.0; });
  const auto m = mollify(f, 10);
  std::vector<double> x(1);
  for (std::size_t k = 0; k < g.spatial_size(); ++k) {
    g.position(k, x);
    if (std::abs(x[0]) < 0.85) EXPECT_NEAR(m.at(0, k), f.at(0, k), 1e-12);
  }
}

TEST(Mollify, ShrinksTheSupremum) {
  const Grid g = box_grid(1, 0.0, 1.0, 257, Boundary::periodic);
  const auto f = GridFunction::sample(g, [](double, std::span<const double> x) { return x[0] < 0.5 ? 1.0 : -1.0; });
  const auto m = mollify(f, 16);
  for (double v : m.values()) EXPECT_LE(std::abs(v), 1.0 + 1e-14);
}

TEST(Mollify, RejectsKernelsWiderThanTheBox) {
  const auto f = GridFunction::sample(box_grid(1, 0.0, 0.5, 9), [](double, std::span<const double>) { return 1.0; });
  EXPECT_THROW(mollify(f, 1), ValidationError);
}
