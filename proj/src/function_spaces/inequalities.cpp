#include "csde/inequalities.hpp"

#include <cmath>
#include <limits>

#include "csde/error.hpp"

namespace csde {

namespace {

// d/dx_a of a scalar level, written into out (stride 1).
void derivative(const Grid& g, std::span<const double> u, int a, std::span<double> out) {
  const auto strides = g.strides();
  const std::size_t n = g.nx[a], s = strides[a], ns = g.spatial_size();
  const double h = g.h(a);
  for (std::size_t i = 0; i < ns; ++i) {
    const std::size_t k = (i / s) % n;
    if (g.boundary == Boundary::periodic) {
      const std::size_t period = n - 1;
      const std::size_t base = i - k * s;
      const std::size_t kp = (k + 1) % period, km = (k + period - 1) % period;
      out[i] = (u[base + kp * s] - u[base + km * s]) / (2.0 * h);
    } else if (k == 0) {
      out[i] = n >= 3 ? (-3.0 * u[i] + 4.0 * u[i + s] - u[i + 2 * s]) / (2.0 * h) : (u[i + s] - u[i]) / h;
    } else if (k + 1 == n) {
      out[i] = n >= 3 ? (3.0 * u[i] - 4.0 * u[i - s] + u[i - 2 * s]) / (2.0 * h) : (u[i] - u[i - s]) / h;
    } else {
      out[i] = (u[i + s] - u[i - s]) / (2.0 * h);
    }
  }
}

void second_derivative(const Grid& g, std::span<const double> u, int a, std::span<double> out) {
  const auto strides = g.strides();
  const std::size_t n = g.nx[a], s = strides[a], ns = g.spatial_size();
  const double h2 = g.h(a) * g.h(a);
  for (std::size_t i = 0; i < ns; ++i) {
    const std::size_t k = (i / s) % n;
    if (g.boundary == Boundary::periodic) {
      const std::size_t period = n - 1;
      const std::size_t base = i - k * s;
      const std::size_t kp = (k + 1) % period, km = (k + period - 1) % period;
      out[i] = (u[base + kp * s] - 2.0 * u[i] + u[base + km * s]) / h2;
    } else if (n < 4 && (k == 0 || k + 1 == n)) {
      // too few nodes for the one-sided stencil: reuse the single centered difference
      const std::size_t c = i - k * s + s;
      out[i] = n == 3 ? (u[c + s] - 2.0 * u[c] + u[c - s]) / h2 : 0.0;
    } else if (k == 0) {
      out[i] = (2.0 * u[i] - 5.0 * u[i + s] + 4.0 * u[i + 2 * s] - u[i + 3 * s]) / h2;
    } else if (k + 1 == n) {
      out[i] = (2.0 * u[i] - 5.0 * u[i - s] + 4.0 * u[i - 2 * s] - u[i - 3 * s]) / h2;
    } else {
      out[i] = (u[i + s] - 2.0 * u[i] + u[i - s]) / h2;
    }
  }
}

}  // namespace

GridFunction gradient(const GridFunction& u) {
  u.require_scalar("gradient");
  const Grid& g = u.grid();
  const std::size_t ns = g.spatial_size();
  GridFunction out(g, std::size_t(g.dim));
  std::vector<double> tmp(ns);
  for (std::size_t j = 0; j < g.levels(); ++j) {
    auto src = u.level(j);
    auto dst = out.level(j);
    for (int a = 0; a < g.dim; ++a) {
      derivative(g, src, a, tmp);
      for (std::size_t i = 0; i < ns; ++i) dst[i * g.dim + a] = tmp[i];
    }
  }
  return out;
}

GridFunction hessian_norm(const GridFunction& u) {
  u.require_scalar("hessian_norm");
  const Grid& g = u.grid();
  for (int a = 0; a < g.dim; ++a)
    require(g.boundary == Boundary::periodic || g.nx[a] >= 4, "hessian_norm: at least 4 nodes per axis");
  const std::size_t ns = g.spatial_size();
  GridFunction out(g, 1);
  std::vector<double> da(ns), dab(ns), acc(ns);
  for (std::size_t j = 0; j < g.levels(); ++j) {
    auto src = u.level(j);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int a = 0; a < g.dim; ++a) {
      second_derivative(g, src, a, dab);
      for (std::size_t i = 0; i < ns; ++i) acc[i] += dab[i] * dab[i];
      derivative(g, src, a, da);
      for (int b = a + 1; b < g.dim; ++b) {
        derivative(g, da, b, dab);
        for (std::size_t i = 0; i < ns; ++i) acc[i] += 2.0 * dab[i] * dab[i];
      }
    }
    auto dst = out.level(j);
    for (std::size_t i = 0; i < ns; ++i) dst[i] = std::sqrt(acc[i]);
  }
  return out;
}

IsoperimetricResult isoperimetric_check(const GridFunction& u, double c_d) {
  u.require_scalar("isoperimetric_check");
  u.require_finite("isoperimetric_check");
  require(c_d > 0, "isoperimetric_check: c_d must be positive");
  const Grid& g = u.grid();
  require(g.is_static(), "isoperimetric_check: spatial field required");
  for (int a = 0; a < g.dim; ++a)
    require(g.lo[a] <= -1.0 && g.hi[a] >= 1.0, "isoperimetric_check: grid must contain the unit ball");

  GridFunction plus = u;
  for (double& v : plus.values()) v = std::max(v, 0.0);
  const GridFunction grad = gradient(plus);
  const double cell = g.cell_volume();
  const std::size_t ns = g.spatial_size();
  std::vector<double> x(g.dim);
  IsoperimetricResult res;
  double energy = 0.0;
  for (std::size_t i = 0; i < ns; ++i) {
    g.position(i, x);
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    if (r2 > 1.0 + 1e-12) continue;
    const double v = u.at(0, i);
    if (v >= 0.5) res.measure_a += cell;
    else if (v <= 0.0) res.measure_b += cell;
    else res.measure_d += cell;
    double s = 0.0;
    for (int a = 0; a < g.dim; ++a) s += grad.at(0, i, a) * grad.at(0, i, a);
    energy += s * cell;
  }
  res.lhs = energy;
  const double num = c_d * res.measure_a * res.measure_a * std::pow(res.measure_b, 2.0 - 2.0 / g.dim);
  if (num == 0.0) {
    res.rhs = 0.0;
  } else if (res.measure_d == 0.0) {
    res.rhs = std::numeric_limits<double>::infinity();
    res.rhs_infinite = true;
  } else {
    res.rhs = num / res.measure_d;
  }
  res.holds = !res.rhs_infinite && res.lhs >= res.rhs;
  return res;
}

NirenbergResult nirenberg_ratio(const GridFunction& u, int j, int m, double p, double q,
                                const HolderOptions& holder) {
  u.require_scalar("nirenberg_ratio");
  u.require_finite("nirenberg_ratio");
  if (j != 1 || m != 2) throw ValidationError("nirenberg_ratio: only j = 1, m = 2 is supported");
  if (!(p > 1.0 && q > p && std::isfinite(q)))
    throw ValidationError("nirenberg_ratio: requires 1 < p < q < inf");
  // window p m / j < q <= p (m - 1) / (j - 1); the upper bound is void for j = 1
  if (!(q > p * m / j)) throw ValidationError("nirenberg_ratio: requires q > 2p");
  const Grid& g = u.grid();
  require(g.is_static(), "nirenberg_ratio: spatial field required");
  require(g.dim >= 2, "nirenberg_ratio: dimension must be >= 2");

  NirenbergResult r;
  r.alpha = (j * q - m * p) / (q - p);
  r.theta = p / q;
  r.grad_q = lp_norm(gradient(u).magnitude(), q);
  r.hess_p = lp_norm(hessian_norm(u), p);
  r.holder = holder_seminorm(u, r.alpha, holder);
  r.rhs = std::pow(r.hess_p, r.theta) * std::pow(r.holder, 1.0 - r.theta);
  if (r.grad_q == 0.0) r.ratio = 0.0;
  else if (r.rhs == 0.0) throw NumericalError("nirenberg_ratio: nonzero gradient with vanishing right side");
  else r.ratio = r.grad_q / r.rhs;
  return r;
}

EmbeddingResult weak_embedding_check(const GridFunction& f, double p, double r, const Region& a) {
  f.require_scalar("weak_embedding_check");
  if (!(p > 1.0)) throw ValidationError("weak_embedding_check: p must exceed 1");
  if (!(p < r)) throw ValidationError("weak_embedding_check: requires p < r");
  if (!std::isfinite(r)) throw ValidationError("weak_embedding_check: r must be finite");
  require(f.grid().is_static(), "weak_embedding_check: spatial field required");
  EmbeddingResult e;
  e.measure = region_measure(f.grid(), a);
  require(e.measure > 0, "weak_embedding_check: region has zero measure");
  e.lhs = lp_norm(f, p, a);
  e.weak = weak_lp_norm(f, r, a);
  e.constant = std::pow(2.0, 1.0 / p) * std::pow(p / (r - p), 1.0 / r);
  e.rhs = e.constant * e.weak * std::pow(e.measure, 1.0 / p - 1.0 / r);
  e.holds = e.lhs <= e.rhs * (1.0 + 1e-12);
  return e;
}

}  // namespace csde
