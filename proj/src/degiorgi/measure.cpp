#include <algorithm>
#include <cmath>

#include "csde/degiorgi.hpp"
#include "csde/error.hpp"

namespace csde::degiorgi {

namespace {

// Space-time measure of nodes inside region with pred(value) true.
template <class Pred>
double measure_where(const GridFunction& u, const Region& region, Pred pred) {
  GridFunction ind(u.grid(), 1);
  auto src = u.values();
  auto dst = ind.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = pred(src[i]) ? 1.0 : 0.0;
  return level_set_measure(ind, 0.5, region);
}

}  // namespace

MeasureReport measure_lemma_check(const GridFunction& u, const GridFunction& b, const GridFunction& f,
                                  const MeasureParams& params) {
  u.require_scalar("measure_lemma_check");
  f.require_scalar("measure_lemma_check");
  u.require_finite("measure_lemma_check");
  b.require_finite("measure_lemma_check");
  require(params.delta > 0 && params.delta < 1, "measure_lemma_check: delta must lie in (0, 1)");
  require(params.beta > 0, "measure_lemma_check: beta must be positive");
  const Grid& g = u.grid();
  require(!g.is_static(), "measure_lemma_check: u must carry time levels");
  const double eps_t = 1e-9 * g.dt();
  if (g.t0 > -2.0 + eps_t || g.t1 < -eps_t)
    throw ValidationError("measure_lemma_check: grid does not contain (-2, 0) x B_2");
  if (g.boundary != Boundary::periodic)
    for (int a = 0; a < g.dim; ++a)
      if (g.lo[a] > -2.0 + 1e-9 || g.hi[a] < 2.0 - 1e-9)
        throw ValidationError("measure_lemma_check: grid does not contain (-2, 0) x B_2");

  MeasureReport rep;
  rep.beta = params.beta;
  GridFunction v = u;
  rep.clipped_max = -1e300;
  for (double& x : v.values()) {
    rep.clipped_max = std::max(rep.clipped_max, x);
    if (x > 1.0) {
      x = 1.0;
      ++rep.clipped_nodes;
    }
  }
  const std::vector<double> origin(g.dim, 0.0);
  const Region q1{-1.0, 0.0, Ball{origin, 1.0}};
  const Region q1p{-2.0, -1.0, Ball{origin, 1.0}};
  const Region q2{-4.0 < g.t0 ? g.t0 : -4.0, 0.0, Ball{origin, 2.0}};
  rep.a = measure_where(v, q1, [](double x) { return x >= 0.5; });
  rep.b = measure_where(v, q1p, [](double x) { return x <= 0.0; });
  auto mid = [](double x) { return x > 0.0 && x < 0.5; };
  rep.d = measure_where(v, q1, mid) + measure_where(v, q1p, mid);
  rep.forcing_norm = mixed_norm(f, params.e3, q2);
  rep.premise = rep.a >= params.delta && rep.b >= params.delta;
  rep.implication = !rep.premise || rep.d >= params.beta;
  return rep;
}

}  // namespace csde::degiorgi
