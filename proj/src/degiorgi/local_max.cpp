#include <algorithm>
#include <cmath>

#include "../function_spaces/quadrature.hpp"
#include "csde/degiorgi.hpp"
#include "csde/error.hpp"
#include "csde/inequalities.hpp"

namespace csde::degiorgi {

namespace {

double squared(double v) { return v * v; }

double radius_at(long k) { return 0.5 * (1.0 + std::ldexp(1.0, int(-k))); }

// sup_t int (w eta)^2 + int int |grad (w eta)|^2 over [t_lo, 0]
double caccioppoli_energy(const GridFunction& w0, double inner, double outer, double t_lo) {
  const Grid& g = w0.grid();
  GridFunction w = w0;
  std::vector<double> x(g.dim);
  std::vector<double> eta(g.spatial_size());
  for (std::size_t i = 0; i < g.spatial_size(); ++i) {
    g.position(i, x);
    double r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) r2 += x[a] * x[a];
    eta[i] = 1.0 - smoothstep((std::sqrt(r2) - inner) / (outer - inner));
  }
  for (std::size_t j = 0; j < g.levels(); ++j) {
    auto v = w.level(j);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= eta[i];
  }
  const Region window{t_lo, 0.0, std::nullopt};
  const auto tq = detail::time_quadrature(g, window);
  double mass = 0.0;
  for (const auto& lw : tq.levels) mass = std::max(mass, squared(lp_norm(w, Exponent(2.0), {}, lw.node)));
  const GridFunction grad = gradient(w).magnitude();
  return mass + squared(mixed_norm(grad, {Exponent(2.0), Exponent(2.0)}, window));
}

double level_energy(const GridFunction& uk, const Region& q, const ExponentPair& s2, const ExponentPair& s3) {
  return squared(mixed_norm(uk, {Exponent(2.0), Exponent(2.0)}, q)) + squared(mixed_norm(uk, s2, q)) +
         squared(mixed_norm(uk, s3, q));
}

}  // namespace

double interpolation_epsilon(int d, const ExponentPair& e2, const ExponentPair& e3) {
  auto margin = [d](const ExponentPair& e) {
    const ExponentPair s = star(e);
    return double(d) * s.p.reciprocal() + 2.0 * s.q.reciprocal() - 0.5 * double(d);
  };
  const double m = std::min(margin(e2), margin(e3));
  if (!(m > 0.0)) throw ValidationError("local max: exponent pairs need d/p + 2/q < 2");
  return m / double(d + 2);
}

LocalMaxResult local_max_iterate(const GridFunction& u, const GridFunction& b, const GridFunction& f,
                                 const LocalMaxParams& params) {
  u.require_scalar("local_max_iterate");
  f.require_scalar("local_max_iterate");
  u.require_finite("local_max_iterate");
  f.require_finite("local_max_iterate");
  b.require_finite("local_max_iterate");
  const Grid& g = u.grid();
  require(!g.is_static(), "local_max_iterate: u must carry time levels");
  const double eps_t = 1e-9 * g.dt();
  if (g.t0 > -1.0 + eps_t || g.t1 < -eps_t) throw ValidationError("local_max_iterate: grid must cover t in [-1, 0]");
  if (g.boundary != Boundary::periodic)
    for (int a = 0; a < g.dim; ++a)
      if (g.lo[a] > -1.5 || g.hi[a] < 1.5) throw ValidationError("local_max_iterate: grid must cover B_3/2");
  require(params.C_U > 1.0, "local_max_iterate: C_U must exceed 1");

  LocalMaxResult res;
  const std::vector<double> origin(g.dim, 0.0);
  const Region q1{-1.0, 0.0, Ball{origin, 1.0}};
  const ExponentPair s2 = star(params.e2), s3 = star(params.e3);
  res.epsilon = interpolation_epsilon(g.dim, params.e2, params.e3);
  const GridFunction upos = level_truncate(u, 0.0);
  res.forcing_norm = mixed_norm(f, params.e3, q1);
  res.energy = mixed_norm(upos, {Exponent(2.0), Exponent(2.0)}, q1) + mixed_norm(upos, s2, q1) +
               mixed_norm(upos, s3, q1);
  res.b_norm = mixed_norm(b.magnitude(), params.e2, q1);
  if (params.M0) {
    require(*params.M0 >= 0.0, "local_max_iterate: M0 must be nonnegative");
    res.M = *params.M0;
  } else {
    const double log_factor = std::log(params.C_U) / (2.0 * res.epsilon * res.epsilon);
    const double scaled = res.energy > 0.0 ? std::exp(log_factor + std::log(res.energy)) : 0.0;
    res.M = params.C_U * res.forcing_norm + scaled;
    if (!std::isfinite(res.M)) throw NumericalError("local_max_iterate: the M recipe overflows");
  }

  for (std::size_t k = 0; k <= params.max_levels; ++k) {
    LevelIterationRecord rec;
    rec.k = k;
    rec.M_k = res.M * (2.0 - std::ldexp(1.0, -int(k)));
    rec.radius_k = radius_at(long(k));
    rec.t_k = -rec.radius_k;
    const Region qk{rec.t_k, 0.0, Ball{origin, rec.radius_k}};
    const GridFunction uk = level_truncate(u, rec.M_k);
    rec.U_k = level_energy(uk, qk, s2, s3);
    rec.measure = level_set_measure(u, rec.M_k, qk);
    rec.E_k = caccioppoli_energy(uk, rec.radius_k, radius_at(long(k) - 1), rec.t_k);
    res.records.push_back(rec);
    res.levels_used = k;
    if (rec.U_k < params.tol) {
      res.converged = true;
      break;
    }
  }

  res.sup_half = mixed_norm(upos, {Exponent::infinity(), Exponent::infinity()},
                            Region{-0.25, 0.0, Ball{origin, 0.5}});
  res.grid_check = res.sup_half <= 2.0 * res.M * (1.0 + 1e-12);
  return res;
}

}  // namespace csde::degiorgi
