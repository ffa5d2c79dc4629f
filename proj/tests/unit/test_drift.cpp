#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csde/drift.hpp"
#include "csde/error.hpp"

using namespace csde;
using namespace csde::drift;

namespace {

// (b * rho_n)(x) for b = -x/|x|^2 in d = 3 by midpoint quadrature in
// spherical coordinates about the singularity, where the r^2 Jacobian
// cancels the 1/|z| blow-up.
std::array<double, 3> spherical_oracle(std::span<const double> x, int n) {
  const auto rho = Mollifier::standard_bump();
  const double R = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) + 1.0 / n;
  const int NR = 160, NT = 90, NP = 90;
  std::array<double, 3> acc{0, 0, 0};
  for (int i = 0; i < NR; ++i) {
    const double s = (i + 0.5) * R / NR;
    for (int j = 0; j < NT; ++j) {
      const double th = (j + 0.5) * M_PI / NT;
      for (int k = 0; k < NP; ++k) {
        const double ph = (k + 0.5) * 2 * M_PI / NP;
        const double z[3] = {s * std::sin(th) * std::cos(ph), s * std::sin(th) * std::sin(ph), s * std::cos(th)};
        double d2 = 0;
        for (int c = 0; c < 3; ++c) d2 += (x[c] - z[c]) * (x[c] - z[c]);
        const double u = std::sqrt(d2) * n;
        if (u >= 1) continue;
        const double w = rho.density(u, 3) * n * n * n * std::sin(th) * (R / NR) * (M_PI / NT) * (2 * M_PI / NP);
        for (int c = 0; c < 3; ++c) acc[c] += w * (-z[c]);
      }
    }
  }
  return acc;
}

}  // namespace

TEST(Catalog, InverseRadialValuesAndHomogeneity) {
  const auto b = inverse_radial(3, 0.7);
  const std::vector<double> x = {1.0, 2.0, -2.0};
  const auto v = b(0.0, x);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(v[c], -0.7 * x[c] / 9.0, 1e-15);
  ASSERT_TRUE(b.homogeneity.has_value());
  EXPECT_EQ(*b.homogeneity, -1.0);
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-2.0, 2.0), scale(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> y = {u(rng), u(rng), u(rng)}, cy(3);
    const double c = scale(rng);
    for (int a = 0; a < 3; ++a) cy[a] = c * y[a];
    const auto by = b(0.0, y), bcy = b(0.0, cy);
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(bcy[a], by[a] / c, 1e-12 * std::abs(by[a] / c) + 1e-300);
  }
}

TEST(Catalog, SwirlIsDivergenceFreeOffTheAxis) {
  const auto b = swirl_drift(1.0);
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int tested = 0;
  while (tested < 50) {
    std::vector<double> x = {u(rng), u(rng), u(rng)};
    if (std::hypot(x[0], x[1]) < 0.2) continue;
    EXPECT_LT(std::abs(fd_divergence(b, 0.0, x, 1e-4)), 1e-5);
    ++tested;
  }
}

TEST(Catalog, SmoothFieldsHaveTheirClosedFormDivergence) {
  const auto lin = linear_drift(3, 2.0);
  const auto vort = gaussian_vortex(2, 1.5, 0.5);
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x3 = {u(rng), u(rng), u(rng)}, x2 = {u(rng), u(rng)};
    EXPECT_NEAR(fd_divergence(lin, 0.0, x3, 1e-3), -6.0, 1e-8);
    EXPECT_NEAR(fd_divergence(vort, 0.0, x2, 1e-3), 0.0, 1e-5);
  }
}

TEST(Catalog, MakeDriftParsesAndRejects) {
  EXPECT_EQ(make_drift({{"kind", "inverse_radial"}, {"d", 3}, {"lambda", 0.2}}).kind, "inverse_radial");
  EXPECT_EQ(make_drift({{"kind", "constant"}, {"c", {1.0, 0.0}}}).dim, 2);
  EXPECT_THROW(make_drift({{"kind", "mystery"}}), ValidationError);
  EXPECT_THROW(make_drift({{"lambda", 1.0}}), ValidationError);
}

TEST(Truncation, CapsTheMagnitude) {
  const auto b = truncate_drift(inverse_radial(3, 1.0), 5.0);
  std::mt19937_64 rng(54);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x = {u(rng), u(rng), u(rng)};
    const auto v = b(0.0, x);
    const double m = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    EXPECT_LE(m, 5.0);
    // b 1{|b| <= N}: zero inside the ball of radius 1/5
    if (std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) < 0.2) EXPECT_EQ(m, 0.0);
  }
}

TEST(Approx, SingularFieldsNeedARegularization) {
  EXPECT_THROW(ApproxDrift(inverse_radial(3, 1.0), ApproxSpec::none()), ValidationError);
  EXPECT_NO_THROW(ApproxDrift(inverse_radial(3, 1.0), ApproxSpec::truncated(10.0)));
}

TEST(Approx, MollifiedInverseRadialMatchesSphericalQuadrature) {
  const int n = 4;
  const ApproxDrift a(inverse_radial(3, 1.0), ApproxSpec::mollified(n));
  for (double r : {0.3 / n, 0.9 / n, 1.5 / n}) {
    const std::vector<double> x = {0.6 * r, 0.0, 0.8 * r};
    const auto ref = spherical_oracle(x, n);
    const auto got = a(0.0, x);
    const double scale = std::sqrt(ref[0] * ref[0] + ref[2] * ref[2]);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(got[c], ref[c], 2e-3 * scale) << "r=" << r << " c=" << c;
  }
}

TEST(Approx, MollificationIsBoundedByTheKernelScale) {
  // |b * rho_n| = O(n) for a field of homogeneity -1
  const ApproxDrift a(inverse_radial(3, 1.0), ApproxSpec::mollified(8));
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x = {u(rng), u(rng), u(rng)};
    const auto v = a(0.0, x);
    EXPECT_LT(std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]), 3.0 * 8);
  }
}

TEST(Approx, MollifyingAConstantDriftIsTheIdentity) {
  const ApproxDrift a(constant_drift({0.5, -1.0}), ApproxSpec::mollified(3));
  const std::vector<double> x = {0.1, 0.7};
  const auto v = a(0.0, x);
  EXPECT_NEAR(v[0], 0.5, 1e-12);
  EXPECT_NEAR(v[1], -1.0, 1e-12);
}

TEST(Split, PartsAddUpToTheSampledField) {
  const Grid g = box_grid(3, -1.0, 1.0, 17);
  const auto b = inverse_radial(3, 1.0);
  SplitOptions opts;
  opts.ladder = {5.0};
  const auto s = split_critical(b, 10.0, g, opts);
  EXPECT_EQ(s.N, 5.0);
  const auto full = sample_drift(b, g);
  for (std::size_t i = 0; i < full.values().size(); ++i)
    EXPECT_EQ(s.b0.values()[i] + s.b1.values()[i], full.values()[i]);
  EXPECT_LE(s.b1_sup, 5.0);
  EXPECT_LE(s.b0_weak, 10.0);
}

TEST(Split, BoundedFieldsHaveNoSmallPart) {
  const Grid g = box_grid(2, -1.0, 1.0, 9);
  const auto s = split_critical(gaussian_vortex(2, 1.0, 0.5), 1e-3, g);
  EXPECT_EQ(s.b0_weak, 0.0);
  for (double v : s.b0.values()) EXPECT_EQ(v, 0.0);
}

TEST(Split, CriticalFieldAboveEpsilonCannotBeSplit) {
  // the weak-L^3 norm of lambda/|x| is the same on every ball about 0
  const Grid g = box_grid(3, -1.0, 1.0, 17);
  EXPECT_THROW(split_critical(inverse_radial(3, 1.0), 0.05, g), NumericalError);
}
