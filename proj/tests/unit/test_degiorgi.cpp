#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csde/degiorgi.hpp"
#include "csde/error.hpp"
#include "csde/forcing.hpp"

using namespace csde;
using namespace csde::degiorgi;

namespace {

const Exponent kInf = Exponent::infinity();

// Vortex-driven solution on the lab frame with a Gaussian source.
const pde::PdeSolution& lab_solution() {
  static const pde::PdeSolution sol = [] {
    const Grid g = lab_grid(2, 25, 48);
    const auto f = make_scalar_field({{"kind", "gaussian"}, {"center", {0.2, -0.1}}, {"width", 0.6}, {"amplitude", 3.0}}, 2);
    return pde::solve({g, drift::ApproxDrift(drift::gaussian_vortex(2, 2.0, 0.7), drift::ApproxSpec::none()),
                       f.sample(g.spatial_only()), std::nullopt, pde::Direction::forward, pde::SchemeOptions::monotone()});
  }();
  return sol;
}

}  // namespace

TEST(Levels, TruncationIsThePositivePartAboveK) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Grid g = box_grid(2, 0.0, 1.0, 7).with_time(3, 0.0, 1.0);
  std::vector<double> v(g.node_count());
  for (double& x : v) x = u(rng);
  const GridFunction f(g, 1, v);
  for (double k : {-1.0, 0.0, 0.7}) {
    const auto t = level_truncate(f, k);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(t.values()[i], std::max(v[i] - k, 0.0));
  }
}

TEST(Levels, MeasureOfAFullLevelSetIsTheCylinderVolume) {
  const Grid g = box_grid(2, -1.0, 1.0, 21).with_time(10, -1.0, 0.0);
  const auto f = GridFunction::sample(g, [](double, std::span<const double>) { return 1.0; });
  EXPECT_NEAR(level_set_measure(f, 0.0), 4.0, 1e-12);
  EXPECT_NEAR(level_set_measure(f, 1.0), 0.0, 0.0);
  const Region half{-0.5, 0.0, std::nullopt};
  EXPECT_NEAR(level_set_measure(f, 0.0, half), 2.0, 1e-12);
}

TEST(Exponents, StarSatisfiesTheConjugacy) {
  for (double p : {1.5, 2.0, 4.0, 10.0}) {
    const Exponent s = star(Exponent(p));
    EXPECT_NEAR(1.0 / p + 2.0 / s.value(), 1.0, 1e-15);
  }
  EXPECT_EQ(star(kInf).value(), 2.0);
  EXPECT_THROW(star(Exponent(1.0)), ValidationError);
}

TEST(Exponents, InterpolationEpsilonFormula) {
  // p = q = 4: p* = 8/3, so (d 3/8 + 3/4 - d/2)/(d + 2)
  for (int d : {1, 2, 3}) {
    const double expect = (d * 3.0 / 8.0 + 0.75 - d / 2.0) / (d + 2.0);
    EXPECT_NEAR(interpolation_epsilon(d, {4.0, 4.0}, {4.0, 4.0}), expect, 1e-15);
  }
  // the smaller of the two pairs wins
  EXPECT_NEAR(interpolation_epsilon(2, {kInf, kInf}, {4.0, 4.0}), interpolation_epsilon(2, {4.0, 4.0}, {4.0, 4.0}),
              1e-15);
}

TEST(LabFrame, ScalingOfFieldsAndCoordinates) {
  const Grid src = box_grid(2, -2.0, 2.0, 41).with_time(40, -2.0, 2.0);
  const auto u = GridFunction::sample(src, [](double t, std::span<const double> x) { return 1.0 + 2.0 * x[0] - x[1] + 0.5 * t; });
  const GridFunction b = GridFunction::sample_vector(src.spatial_only(), 2, [](double, std::span<const double>, std::span<double> o) {
    o[0] = 3.0;
    o[1] = -1.0;
  });
  const auto f = GridFunction::sample(src.spatial_only(), [](double, std::span<const double>) { return 8.0; });
  const Cylinder q{1.0, {0.2, -0.3}, 0.5};
  const auto lab = to_lab_frame(u, b, f, q, lab_grid(2, 9, 8));
  std::vector<double> y(2);
  const Grid& lg = lab.u.grid();
  for (std::size_t j = 0; j < lg.levels(); ++j)
    for (std::size_t k = 0; k < lg.spatial_size(); ++k) {
      lg.position(k, y);
      const double s = lg.time(j);
      const double t = 1.0 + 0.25 * s, x0 = 0.2 + 0.5 * y[0], x1 = -0.3 + 0.5 * y[1];
      EXPECT_NEAR(lab.u.at(j, k), 1.0 + 2.0 * x0 - x1 + 0.5 * t, 1e-12);
    }
  for (std::size_t k = 0; k < lab.b.grid().spatial_size(); ++k) {
    EXPECT_NEAR(lab.b.at(0, k, 0), 1.5, 1e-12);
    EXPECT_NEAR(lab.b.at(0, k, 1), -0.5, 1e-12);
    EXPECT_NEAR(lab.f.at(0, k), 2.0, 1e-12);
  }
  EXPECT_THROW(to_lab_frame(u, b, f, Cylinder{1.0, {0.0, 0.0}, 1.5}, lab_grid(2, 9, 8)), ValidationError);
}

TEST(Certification, AcceptsSolverOutputAndRejectsTampering) {
  auto sol = lab_solution();
  EXPECT_TRUE(certify_subsolution(sol).ok);
  sol.u.at(10, sol.u.grid().spatial_size() / 2) += 1.0;
  EXPECT_FALSE(certify_subsolution(sol).ok);
  EXPECT_THROW(require_subsolution(sol), ValidationError);
}

TEST(Energy, HoldsForASolverSubsolution) {
  EnergyParams p;
  const auto r = energy_inequality_report(lab_solution(), p);
  EXPECT_GT(r.lhs, 0.0);
  EXPECT_NEAR(r.lhs, r.mass_t - r.mass_s + r.gradient, 1e-12 * std::abs(r.lhs));
  EXPECT_NEAR(r.rhs, r.l2_term + r.drift_term + r.forcing_u_term + r.forcing_term, 1e-12 * r.rhs);
  EXPECT_TRUE(r.holds);
  EXPECT_LE(r.observed_C, p.C);
}

TEST(Energy, ObservedConstantIsScaleFree) {
  // the inequality is linear in C, so observed_C separates holds from fails
  EnergyParams p;
  const auto r = energy_inequality_report(lab_solution(), p);
  p.C = r.observed_C * 0.5;
  if (r.observed_C > 0) EXPECT_FALSE(energy_inequality_report(lab_solution(), p).holds);
  p.C = r.observed_C * 2.0 + 1e-300;
  EXPECT_TRUE(energy_inequality_report(lab_solution(), p).holds);
}

TEST(LocalMax, IterationConvergesAndBoundsTheHalfCylinder) {
  const auto& sol = lab_solution();
  const auto r = local_max_iterate(sol.u, sol.drift, sol.forcing);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.levels_used, 40u);
  EXPECT_TRUE(r.grid_check);
  EXPECT_LE(r.sup_half, 2.0 * r.M);
  EXPECT_NEAR(r.epsilon, interpolation_epsilon(2, {4.0, 4.0}, {4.0, 4.0}), 1e-15);
  ASSERT_FALSE(r.records.empty());
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    EXPECT_GE(r.records[i].M_k, r.records[i - 1].M_k);
    EXPECT_LE(r.records[i].radius_k, r.records[i - 1].radius_k);
  }
}

TEST(LocalMax, ExplicitLevelOverridesTheRecipe) {
  const auto& sol = lab_solution();
  LocalMaxParams p;
  p.M0 = 1e6;
  const auto r = local_max_iterate(sol.u, sol.drift, sol.forcing, p);
  EXPECT_EQ(r.M, 1e6);
  EXPECT_TRUE(r.converged);
}

TEST(Measure, VacuousWithoutABottomSet) {
  const Grid g = lab_grid(2, 17, 16);
  const auto u = GridFunction::sample(g, [](double, std::span<const double>) { return 1.0; });
  const GridFunction b(g.spatial_only(), 2), f(g.spatial_only());
  const auto r = measure_lemma_check(u, b, f);
  EXPECT_FALSE(r.premise);
  EXPECT_TRUE(r.implication);
  EXPECT_NEAR(r.b, 0.0, 0.0);
}

TEST(Measure, JumpWithoutTransitionViolatesTheConclusion) {
  // not a subsolution: the lemma's hypothesis fails and so does its conclusion
  const Grid g = lab_grid(2, 17, 16);
  const auto u = GridFunction::sample(g, [](double t, std::span<const double>) { return t > -1.0 ? 1.0 : -1.0; });
  const GridFunction b(g.spatial_only(), 2), f(g.spatial_only());
  const auto r = measure_lemma_check(u, b, f);
  EXPECT_TRUE(r.premise);
  EXPECT_EQ(r.d, 0.0);
  EXPECT_FALSE(r.implication);
}

TEST(Measure, ClipsAtOne) {
  const Grid g = lab_grid(2, 17, 16);
  const auto u = GridFunction::sample(g, [](double, std::span<const double> x) { return 3.0 * x[0]; });
  const GridFunction b(g.spatial_only(), 2), f(g.spatial_only());
  const auto r = measure_lemma_check(u, b, f);
  EXPECT_GT(r.clipped_nodes, 0u);
  EXPECT_NEAR(r.clipped_max, 6.0, 1e-12);
}

TEST(Decrease, ThresholdSeedFollowsTheExtremalSequence) {
  const double N = 3.0, C = 1.7, eps = 0.6;
  const double thr = decrease_threshold(N, C, eps);
  EXPECT_NEAR(std::log(thr), -std::log(N) / eps - std::log(C) / (eps * eps), 1e-12);
  const auto r = decrease_lemma(thr, N, C, eps, 200);
  ASSERT_GE(r.y.size(), 5u);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(r.y[j], thr * std::pow(C, -double(j) / eps), 1e-9 * r.y[j]);
  // the recursion itself
  for (std::size_t j = 0; j + 1 < 5; ++j)
    EXPECT_NEAR(r.y[j + 1], N * std::pow(C, double(j)) * std::pow(r.y[j], 1 + eps), 1e-9 * r.y[j + 1]);
  EXPECT_TRUE(r.converged);
}

TEST(Decrease, BelowThresholdConvergesAboveDiverges) {
  std::mt19937_64 rng(72);
  std::uniform_real_distribution<double> un(1.0, 4.0), uc(2.0, 4.0), ue(0.3, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    const double N = un(rng), C = uc(rng), eps = ue(rng);
    const double thr = decrease_threshold(N, C, eps);
    EXPECT_TRUE(decrease_lemma(0.5 * thr, N, C, eps, 1000).converged);
    const auto up = decrease_lemma(10.0 * thr, N, C, eps, 50);
    EXPECT_FALSE(up.converged);
  }
}

TEST(Decrease, RejectsBadParameters) {
  EXPECT_THROW(decrease_threshold(0.5, 2.0, 1.0), ValidationError);
  EXPECT_THROW(decrease_lemma(-1.0, 1.0, 2.0, 1.0, 10), ValidationError);
  EXPECT_TRUE(decrease_lemma(0.0, 1.0, 2.0, 1.0, 10).converged);
}
