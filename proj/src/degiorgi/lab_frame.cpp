#include <algorithm>
#include <cmath>

#include "../function_spaces/quadrature.hpp"
#include "csde/degiorgi.hpp"
#include "csde/error.hpp"

namespace csde::degiorgi {

GridFunction level_truncate(const GridFunction& u, double k) {
  u.require_scalar("level_truncate");
  GridFunction out(u.grid(), 1);
  auto src = u.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::max(src[i] - k, 0.0);
  return out;
}

double level_set_measure(const GridFunction& u, double k, const Region& region) {
  u.require_scalar("level_set_measure");
  const Grid& g = u.grid();
  const auto nodes = detail::spatial_nodes(g, region);
  const auto tq = detail::time_quadrature(g, region);
  double total = 0.0;
  for (const auto& lw : tq.levels) {
    auto v = u.level(lw.node);
    double w = 0.0;
    for (const auto& nw : nodes)
      if (v[nw.node] > k) w += nw.w;
    total += (tq.spatial_only ? 1.0 : lw.w) * w;
  }
  return total;
}

Exponent star(const Exponent& p) {
  if (p.is_infinite()) return Exponent(2.0);
  require(p.value() > 1.0, "star: exponent must exceed 1");
  return Exponent(2.0 * p.value() / (p.value() - 1.0));
}

ExponentPair star(const ExponentPair& e) { return {star(e.p), star(e.q)}; }

Grid lab_grid(int dim, std::size_t nx, std::size_t nt) {
  require(nt >= 4, "lab_grid: need at least 4 time steps");
  Grid g = box_grid(dim, -2.0, 2.0, nx);
  g.nt = nt;
  g.t0 = -4.0;
  g.t1 = 0.0;
  g.validate();
  return g;
}

namespace {

void require_inside(const Grid& g, const Cylinder& q) {
  const double r2 = 2.0 * q.r;
  const double eps = 1e-9;
  if (!g.is_static()) {
    if (q.t - r2 * r2 < g.t0 - eps * (1.0 + g.dt()) || q.t > g.t1 + eps)
      throw ValidationError("lab frame: Q_2r leaves the source time range");
  }
  if (g.boundary == Boundary::periodic) return;
  for (int a = 0; a < g.dim; ++a)
    if (q.x[a] - r2 < g.lo[a] - eps || q.x[a] + r2 > g.hi[a] + eps)
      throw ValidationError("lab frame: Q_2r leaves the source box");
}

GridFunction pull_back(const GridFunction& src, const Grid& lab, const Cylinder& q, double factor) {
  const Grid& g = src.grid();
  require(g.dim == lab.dim, "lab frame: dimension mismatch");
  require_inside(g, q);
  const Grid out_grid = g.is_static() ? lab.with_time(0, lab.t0, lab.t1) : lab;
  const std::size_t comps = src.components();
  GridFunction out(out_grid, comps);
  std::vector<double> y(lab.dim), x(lab.dim);
  for (std::size_t j = 0; j < out_grid.levels(); ++j) {
    const double t = out_grid.is_static() ? 0.0 : q.t + q.r * q.r * out_grid.time(j);
    for (std::size_t i = 0; i < out_grid.spatial_size(); ++i) {
      out_grid.position(i, y);
      for (int a = 0; a < lab.dim; ++a) x[a] = q.x[a] + q.r * y[a];
      for (std::size_t c = 0; c < comps; ++c) out.at(j, i, c) = factor * interpolate(src, t, x, c);
    }
  }
  return out;
}

}  // namespace

LabFields to_lab_frame(const GridFunction& u, const GridFunction& b, const GridFunction& f, const Cylinder& q,
                       const Grid& lab) {
  require(q.r > 0, "lab frame: radius must be positive");
  require(int(q.x.size()) == lab.dim, "lab frame: center dimension mismatch");
  u.require_scalar("lab frame");
  f.require_scalar("lab frame");
  require(int(b.components()) == lab.dim, "lab frame: drift must be a vector field");
  return {pull_back(u, lab, q, 1.0), pull_back(b, lab, q, q.r), pull_back(f, lab, q, q.r * q.r), q};
}

Certification certify_subsolution(const pde::PdeSolution& sol, double rel_tol) {
  const auto cert = pde::step_residual(sol, sol.u);
  Certification c;
  c.max_residual = cert.max_residual;
  c.scale = cert.scale;
  c.tol = rel_tol * std::max(cert.scale, 1e-300);
  c.ok = cert.max_residual <= c.tol;
  return c;
}

void require_subsolution(const pde::PdeSolution& sol, double rel_tol) {
  const auto c = certify_subsolution(sol, rel_tol);
  if (!c.ok)
    throw ValidationError("field is not a certified subsolution: residual " + std::to_string(c.max_residual) +
                          " exceeds " + std::to_string(c.tol));
}

}  // namespace csde::degiorgi
