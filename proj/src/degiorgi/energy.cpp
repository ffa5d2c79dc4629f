#include <algorithm>
#include <cmath>
#include <limits>

#include "../function_spaces/quadrature.hpp"
#include "csde/degiorgi.hpp"
#include "csde/error.hpp"
#include "csde/inequalities.hpp"

namespace csde::degiorgi {

namespace {

std::size_t snap_level(const Grid& g, double t) {
  const double s = std::clamp((t - g.t0) / g.dt(), 0.0, double(g.nt));
  return static_cast<std::size_t>(std::lround(s));
}

GridFunction component(const GridFunction& b, std::size_t c) {
  GridFunction out(b.grid(), 1);
  const std::size_t n = b.grid().node_count();
  for (std::size_t i = 0; i < n; ++i) out.values()[i] = b.values()[i * b.components() + c];
  return out;
}

GridFunction indicator_above(const GridFunction& u, double k) {
  GridFunction out(u.grid(), 1);
  auto src = u.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > k ? 1.0 : 0.0;
  return out;
}

double squared(double v) { return v * v; }

}  // namespace

GridFunction fd_divergence_field(const GridFunction& b) {
  const Grid& g = b.grid();
  require(int(b.components()) == g.dim, "divergence: needs a vector field");
  GridFunction out(g, 1);
  for (int a = 0; a < g.dim; ++a) {
    const GridFunction grad = gradient(component(b, a));
    for (std::size_t i = 0; i < g.node_count(); ++i) out.values()[i] += grad.values()[i * g.dim + a];
  }
  return out;
}

EnergyReport energy_inequality_report(const GridFunction& u, const GridFunction& b, const GridFunction& f,
                                      const EnergyParams& params) {
  u.require_scalar("energy_inequality_report");
  f.require_scalar("energy_inequality_report");
  u.require_finite("energy_inequality_report");
  const Grid& g = u.grid();
  require(!g.is_static(), "energy_inequality_report: u must carry time levels");
  require(params.rho > 0 && params.rho < params.R && params.R <= 1.0,
          "energy_inequality_report: need 0 < rho < R <= 1");
  require(params.s < params.t, "energy_inequality_report: need s < t");
  require(params.C > 0, "energy_inequality_report: C must be positive");
  std::vector<double> c = params.center.empty() ? std::vector<double>(g.dim, 0.0) : params.center;
  require(int(c.size()) == g.dim, "energy_inequality_report: center dimension mismatch");
  const double eps = 1e-9;
  if (params.s < g.t0 - eps * g.dt() || params.t > g.t1 + eps * g.dt())
    throw ValidationError("energy_inequality_report: time window leaves the grid");
  if (g.boundary != Boundary::periodic)
    for (int a = 0; a < g.dim; ++a)
      if (c[a] - params.R < g.lo[a] - eps || c[a] + params.R > g.hi[a] + eps)
        throw ValidationError("energy_inequality_report: ball leaves the grid");

  EnergyReport rep;
  rep.k = params.k;
  rep.rho = params.rho;
  rep.R = params.R;
  const std::size_t js = snap_level(g, params.s), jt = snap_level(g, params.t);
  require(js < jt, "energy_inequality_report: s and t snap to the same level");
  rep.s = g.time(js);
  rep.t = g.time(jt);

  const GridFunction uk = level_truncate(u, params.k);
  GridFunction w = uk;
  const double width = params.R - params.rho;
  std::vector<double> x(g.dim);
  std::vector<double> eta(g.spatial_size());
  for (std::size_t i = 0; i < g.spatial_size(); ++i) {
    g.position(i, x);
    double r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) r2 += squared(detail::axis_delta(g, a, x[a], c[a]));
    eta[i] = 1.0 - smoothstep((std::sqrt(r2) - params.rho) / width);
  }
  for (std::size_t j = 0; j < g.levels(); ++j) {
    auto v = w.level(j);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= eta[i];
  }

  rep.mass_t = squared(lp_norm(w, Exponent(2.0), {}, jt));
  rep.mass_s = squared(lp_norm(w, Exponent(2.0), {}, js));
  const GridFunction grad = gradient(w).magnitude();
  Region window{rep.s, rep.t, std::nullopt};
  rep.gradient = squared(mixed_norm(grad, {Exponent(2.0), Exponent(2.0)}, window));
  rep.lhs = rep.mass_t - rep.mass_s + rep.gradient;

  const Region q{rep.s, rep.t, Ball{c, params.R}};
  const double fac = params.C / squared(width);
  const double x_l2 = squared(mixed_norm(uk, {Exponent(2.0), Exponent(2.0)}, q));
  const double x_2 = squared(mixed_norm(uk, star(params.e2), q));
  const double x_3 = squared(mixed_norm(uk, star(params.e3), q));
  const double x_f = squared(mixed_norm(f, params.e3, q)) *
                     squared(mixed_norm(indicator_above(u, params.k), star(params.e3), q));
  rep.l2_term = fac * x_l2;
  rep.drift_term = fac * x_2;
  rep.forcing_u_term = fac * x_3;
  rep.forcing_term = params.C * x_f;
  rep.rhs = rep.l2_term + rep.drift_term + rep.forcing_u_term + rep.forcing_term;

  rep.b_norm = mixed_norm(b.magnitude(), params.e2, q);
  rep.div_norm = mixed_norm(fd_divergence_field(b).magnitude(), params.e2, q);

  const double base = rep.rhs / params.C;
  if (rep.lhs <= 0.0) rep.observed_C = 0.0;
  else rep.observed_C = base > 0.0 ? rep.lhs / base : std::numeric_limits<double>::infinity();
  const double slack = 1e-13 * (rep.mass_t + rep.mass_s + rep.gradient);
  rep.holds = rep.lhs <= rep.rhs + slack;
  return rep;
}

EnergyReport energy_inequality_report(const pde::PdeSolution& sol, const EnergyParams& params) {
  require_subsolution(sol);
  return energy_inequality_report(sol.u, sol.drift, sol.forcing, params);
}

}  // namespace csde::degiorgi
