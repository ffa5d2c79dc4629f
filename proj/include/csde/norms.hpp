#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "csde/grid.hpp"

namespace csde {

// Integrability exponent in [1, inf]. Infinity is a separate state, never a
// large float.
class Exponent {
 public:
  constexpr Exponent(double v) : value_(v) {}  // NOLINT: implicit from finite values
  static constexpr Exponent infinity() {
    Exponent e(1.0);
    e.infinite_ = true;
    return e;
  }

  constexpr bool is_infinite() const { return infinite_; }
  double value() const;
  constexpr double reciprocal() const { return infinite_ ? 0.0 : 1.0 / value_; }
  void validate(const char* what) const;

  bool operator==(const Exponent&) const = default;

 private:
  double value_ = 1.0;
  bool infinite_ = false;
};

struct ExponentPair {
  Exponent p = 2.0;
  Exponent q = 2.0;
};

enum class Criticality { subcritical, critical, supercritical };

// d/p + 2/q
double lps_index(const ExponentPair& e, int d);
// sign of d/p + 2/q - 1; |index - 1| <= 1e-12 counts as critical
Criticality lps_classify(const ExponentPair& e, int d);
const char* to_string(Criticality c);

// Iterated norm || ||f(t)||_{L^p(ball)} ||_{L^q(time window)} by trapezoid
// quadrature over the nodes inside the region.
double mixed_norm(const GridFunction& f, const ExponentPair& e, const Region& region = {});
double mixed_norm(const GridFunction& f, const ExponentPair& e, const Cylinder& cyl);

// Spatial L^p norm of time level `level`.
double lp_norm(const GridFunction& f, Exponent p, const Region& region = {}, std::size_t level = 0);

// Spatial measure of the region (trapezoid weights of the contained nodes).
double region_measure(const Grid& g, const Region& region = {});

struct WeakNormOptions {
  // Level sets resolved by fewer nodes than this are ignored when taking the
  // supremum; 1 keeps every level.
  std::size_t min_level_nodes = 1;
  // Same idea in physical units: level sets of smaller measure are ignored.
  double min_level_measure = 0.0;
};

// sup_v v |{|f| >= v}|^{1/p} over the discrete distribution function, which
// is exact for the node-weight measure: the supremum over levels is attained
// at one of the sample magnitudes.
double weak_lp_norm(const GridFunction& f, double p, const Region& region = {}, std::size_t level = 0,
                    const WeakNormOptions& opts = {});

// || ||f(t)||_{L^{p,inf}} ||_{L^q(time)}
double weak_mixed_norm(const GridFunction& f, double p, Exponent q, const Region& region = {},
                       const WeakNormOptions& opts = {});

// chi^y_r: 1 on B_r(y), 0 outside B_{2r}(y), smooth in between.
struct CutoffFamily {
  std::vector<double> center;
  double radius = 1.0;

  double operator()(std::span<const double> x) const;
  // |grad chi| bound: 2 / radius for the smoothstep profile.
  double gradient_bound() const { return 2.0 / radius; }
};

// Smoothstep s(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)}) on [0,1], 0 below, 1 above.
double smoothstep(double t);
double smoothstep_derivative(double t);
// 1 for s <= 1, 0 for s >= 2.
double cutoff_profile(double s);

// max over centers y of the (weak) mixed norm of f * chi^y_radius. Periodic
// grids are treated as periodic functions on R^d, so windows see every image.
double localized_norm(const GridFunction& f, const ExponentPair& e, bool weak,
                      std::span<const std::vector<double>> centers, double radius = 1.0,
                      const WeakNormOptions& opts = {});

// Center lattice with the given spacing covering [lo, hi].
std::vector<std::vector<double>> center_lattice(std::span<const double> lo, std::span<const double> hi,
                                                double spacing);
// Lattice over the bounding box of supp f (one period cell on periodic grids).
std::vector<std::vector<double>> support_lattice(const GridFunction& f, double spacing);

struct HolderOptions {
  int local_budget = 2;  // all pairs within this many nodes per axis
  std::size_t random_pairs = 10000;
  std::uint64_t seed = 0x5eedf00dULL;
  std::size_t refine_starts = 16;  // best random pairs improved by coordinate ascent
};

// max |f(z) - f(z')| / rho(z,z')^alpha, rho = |x - x'| + |t - t'|^{1/2}.
double holder_seminorm(const GridFunction& f, double alpha, const HolderOptions& opts = {});

}  // namespace csde
