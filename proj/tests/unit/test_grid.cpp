#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "csde/error.hpp"
#include "csde/field_io.hpp"
#include "csde/grid.hpp"

using namespace csde;

namespace {

Grid random_grid(std::mt19937_64& rng, Boundary b = Boundary::dirichlet) {
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_int_distribution<std::size_t> n(3, 7);
  std::uniform_real_distribution<double> lo(-2.0, 0.0), len(0.5, 3.0);
  Grid g;
  g.dim = dim(rng);
  for (int a = 0; a < g.dim; ++a) {
    g.lo.push_back(lo(rng));
    g.hi.push_back(g.lo.back() + len(rng));
    g.nx.push_back(n(rng));
  }
  g.nt = n(rng) - 3;
  g.t0 = lo(rng);
  g.t1 = g.t0 + len(rng);
  g.boundary = b;
  return g;
}

}  // namespace

TEST(Grid, FlatUnflatRoundTrip) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Grid g = random_grid(rng);
    std::vector<std::size_t> idx(g.dim);
    for (std::size_t k = 0; k < g.spatial_size(); ++k) {
      g.unflat(k, idx);
      EXPECT_EQ(g.flat(idx), k);
    }
  }
}

TEST(Grid, AxisZeroVariesFastest) {
  const Grid g = box_grid(2, 0.0, 1.0, 3);
  std::vector<std::size_t> idx(2);
  g.unflat(1, idx);
  EXPECT_EQ(idx[0], 1u);
  EXPECT_EQ(idx[1], 0u);
}

TEST(Grid, ValidateRejectsBadBoxes) {
  Grid g = box_grid(2, 0.0, 1.0, 5);
  g.hi[1] = -1.0;
  EXPECT_THROW(g.validate(), ValidationError);
  EXPECT_THROW(box_grid(1, 0.0, 1.0, 1), ValidationError);
}

TEST(Grid, InterpolationReproducesMultilinearFunctions) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0), c(-2.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Grid g = random_grid(rng);
    // product of affine factors per axis, affine in time: exactly multilinear
    std::vector<double> a(g.dim), b(g.dim);
    for (int k = 0; k < g.dim; ++k) a[k] = c(rng), b[k] = c(rng);
    const double at = c(rng), bt = c(rng);
    auto fn = [&](double t, std::span<const double> x) {
      double v = at + bt * t;
      for (int k = 0; k < g.dim; ++k) v *= a[k] + b[k] * x[k];
      return v;
    };
    const auto f = GridFunction::sample(g, fn);
    for (int s = 0; s < 20; ++s) {
      std::vector<double> x(g.dim);
      for (int k = 0; k < g.dim; ++k) x[k] = g.lo[k] + u(rng) * (g.hi[k] - g.lo[k]);
      const double t = g.nt == 0 ? g.t0 : g.t0 + u(rng) * (g.t1 - g.t0);
      const double expect = g.nt == 0 ? fn(g.t0, x) : fn(t, x);
      EXPECT_NEAR(interpolate(f, t, x), expect, 1e-11 * (1.0 + std::abs(expect)));
    }
  }
}

TEST(Grid, InterpolationIsExactAtNodes) {
  const Grid g = box_grid(2, -1.0, 1.0, 9);
  auto f = GridFunction::sample(g, [](double, std::span<const double> x) { return std::exp(x[0]) * std::cos(x[1]); });
  std::vector<double> x(2);
  for (std::size_t k = 0; k < g.spatial_size(); ++k) {
    g.position(k, x);
    EXPECT_EQ(interpolate(f, 0.0, x), f.at(0, k));
  }
}

TEST(Grid, OutsideIsZeroOnDirichletAndWrapsOnPeriodic) {
  auto fn = [](double, std::span<const double> x) { return std::sin(2 * M_PI * x[0]) + 2.0; };
  const auto d = GridFunction::sample(box_grid(1, 0.0, 1.0, 33), fn);
  const auto p = GridFunction::sample(box_grid(1, 0.0, 1.0, 33, Boundary::periodic), fn);
  const std::vector<double> out = {1.25}, in = {0.25};
  EXPECT_EQ(interpolate(d, 0.0, out), 0.0);
  EXPECT_NEAR(interpolate(p, 0.0, out), interpolate(p, 0.0, in), 1e-14);
}

TEST(FieldIo, BinaryRoundTripIsBitwise) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 10; ++trial) {
    const Grid g = random_grid(rng, trial % 2 ? Boundary::periodic : Boundary::dirichlet);
    const std::size_t comps = trial % 3 == 0 ? std::size_t(g.dim) : 1;
    std::vector<double> v(g.node_count() * comps);
    for (double& x : v) x = z(rng) * 1e3;
    const GridFunction f(g, comps, v);
    std::stringstream ss;
    write_binary(f, ss, "{\"tag\":7}");
    const auto back = read_binary(ss);
    EXPECT_EQ(back.field.grid(), g);
    EXPECT_EQ(back.field.components(), comps);
    EXPECT_EQ(back.metadata, "{\"tag\":7}");
    ASSERT_EQ(back.field.values().size(), v.size());
    EXPECT_EQ(std::memcmp(back.field.values().data(), v.data(), v.size() * sizeof(double)), 0);
  }
}

TEST(FieldIo, CsvRoundTripIsExact) {
  Grid g = box_grid(2, 0.0, 1.0, 4);
  g = g.with_time(2, 0.0, 0.5);
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(g.node_count());
  for (double& x : v) x = u(rng) / 3.0;
  const GridFunction f(g, 1, v);
  std::stringstream ss;
  write_csv(f, ss, "comment line");
  const auto back = read_csv(ss);
  ASSERT_EQ(back.values().size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(back.values()[i], v[i]);
}

TEST(FieldIo, RejectsCorruptHeader) {
  std::stringstream ss("NOPE and more bytes");
  EXPECT_THROW(read_binary(ss), ValidationError);
}
