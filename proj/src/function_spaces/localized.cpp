#include <algorithm>
#include <cmath>

#include "csde/error.hpp"
#include "csde/norms.hpp"
#include "quadrature.hpp"

namespace csde {

double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double smoothstep_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  const double da = a / (t * t);
  const double db = -b / ((1.0 - t) * (1.0 - t));
  return (da * b - a * db) / ((a + b) * (a + b));
}

double cutoff_profile(double s) { return 1.0 - smoothstep(s - 1.0); }

double CutoffFamily::operator()(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t a = 0; a < center.size(); ++a) s += (x[a] - center[a]) * (x[a] - center[a]);
  return cutoff_profile(std::sqrt(s) / radius);
}

namespace {

struct WindowAtom {
  std::size_t node;
  double w;
  double chi;
};

// Nodes (with periodic images) seen by the window chi^y_r.
std::vector<WindowAtom> window_atoms(const Grid& g, std::span<const double> y, double r) {
  std::vector<WindowAtom> out;
  const double reach = 2.0 * r;
  std::vector<std::size_t> ilo(g.dim), ihi(g.dim);
  std::vector<long> klo(g.dim, 0), khi(g.dim, 0);
  for (int a = 0; a < g.dim; ++a) {
    const double h = g.h(a);
    if (g.boundary == Boundary::periodic) {
      const double len = g.hi[a] - g.lo[a];
      klo[a] = long(std::floor((y[a] - reach - g.hi[a]) / len));
      khi[a] = long(std::ceil((y[a] + reach - g.lo[a]) / len));
      ilo[a] = 0;
      ihi[a] = g.nx[a] - 1;
    } else {
      const double a0 = std::ceil((y[a] - reach - g.lo[a]) / h);
      const double a1 = std::floor((y[a] + reach - g.lo[a]) / h);
      if (a1 < 0 || a0 > double(g.nx[a] - 1)) return out;
      ilo[a] = std::size_t(std::max(a0, 0.0));
      ihi[a] = std::size_t(std::min(a1, double(g.nx[a] - 1)));
    }
  }
  std::vector<std::size_t> idx(ilo);
  std::vector<long> k(klo);
  std::vector<double> x(g.dim);
  const auto strides = g.strides();
  while (true) {
    std::size_t node = 0;
    for (int a = 0; a < g.dim; ++a) {
      node += idx[a] * strides[a];
      x[a] = g.coord(a, idx[a]);
    }
    const double w = detail::trapezoid_weight(g, node);
    // iterate periodic images (a single image on Dirichlet grids)
    std::fill(k.begin(), k.end(), 0);
    for (int a = 0; a < g.dim; ++a) k[a] = klo[a];
    while (true) {
      double s = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        const double xa = x[a] + double(k[a]) * (g.hi[a] - g.lo[a]);
        s += (xa - y[a]) * (xa - y[a]);
      }
      const double chi = cutoff_profile(std::sqrt(s) / r);
      if (chi > 0.0) out.push_back({node, w, chi});
      int a = 0;
      for (; a < g.dim; ++a) {
        if (k[a] < khi[a]) {
          ++k[a];
          break;
        }
        k[a] = klo[a];
      }
      if (a == g.dim) break;
    }
    int a = 0;
    for (; a < g.dim; ++a) {
      if (idx[a] < ihi[a]) {
        ++idx[a];
        break;
      }
      idx[a] = ilo[a];
    }
    if (a == g.dim) break;
  }
  return out;
}

}  // namespace

double localized_norm(const GridFunction& f, const ExponentPair& e, bool weak,
                      std::span<const std::vector<double>> centers, double radius,
                      const WeakNormOptions& opts) {
  f.require_scalar("localized_norm");
  f.require_finite("localized_norm");
  e.p.validate("localized_norm");
  e.q.validate("localized_norm");
  require(!centers.empty(), "localized_norm: at least one sample center required");
  require(radius > 0, "localized_norm: window radius must be positive");
  const Grid& g = f.grid();
  const auto tq = detail::time_quadrature(g, Region{});
  const bool p_inf = e.p.is_infinite(), q_inf = e.q.is_infinite();
  const double p = p_inf ? 0.0 : e.p.value();
  const double q = q_inf ? 0.0 : e.q.value();
  double best = 0.0;
  std::vector<double> s(tq.levels.size());
  std::vector<std::pair<double, double>> atoms;
  for (const auto& y : centers) {
    require(int(y.size()) == g.dim, "localized_norm: center dimension mismatch");
    const auto win = window_atoms(g, y, radius);
    for (std::size_t k = 0; k < tq.levels.size(); ++k) {
      auto vals = f.level(tq.levels[k].node);
      if (weak) {
        atoms.clear();
        for (const auto& a : win) {
          const double v = std::abs(vals[a.node]) * a.chi;
          if (v > 0.0 && a.w > 0.0) atoms.emplace_back(v, a.w);
        }
        s[k] = detail::weak_from_atoms(atoms, p, p_inf, opts.min_level_nodes, opts.min_level_measure);
      } else if (p_inf) {
        double m = 0.0;
        for (const auto& a : win) m = std::max(m, std::abs(vals[a.node]) * a.chi);
        s[k] = m;
      } else {
        double acc = 0.0;
        for (const auto& a : win) acc += a.w * std::pow(std::abs(vals[a.node]) * a.chi, p);
        s[k] = std::pow(acc, 1.0 / p);
      }
    }
    best = std::max(best, detail::time_norm(tq, s, q, q_inf));
  }
  return best;
}

std::vector<std::vector<double>> center_lattice(std::span<const double> lo, std::span<const double> hi,
                                                double spacing) {
  require(spacing > 0, "center_lattice: spacing must be positive");
  require(lo.size() == hi.size() && !lo.empty(), "center_lattice: bounds dimension mismatch");
  const std::size_t d = lo.size();
  std::vector<std::vector<double>> axes(d);
  for (std::size_t a = 0; a < d; ++a) {
    require(lo[a] <= hi[a], "center_lattice: lo > hi");
    const auto n = std::size_t(std::ceil((hi[a] - lo[a]) / spacing - 1e-9));
    for (std::size_t i = 0; i <= n; ++i) axes[a].push_back(std::min(lo[a] + double(i) * spacing, hi[a]));
  }
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    std::vector<double> c(d);
    for (std::size_t a = 0; a < d; ++a) c[a] = axes[a][idx[a]];
    out.push_back(std::move(c));
    std::size_t a = 0;
    for (; a < d; ++a) {
      if (++idx[a] < axes[a].size()) break;
      idx[a] = 0;
    }
    if (a == d) break;
  }
  return out;
}

std::vector<std::vector<double>> support_lattice(const GridFunction& f, double spacing) {
  const Grid& g = f.grid();
  if (g.boundary == Boundary::periodic) return center_lattice(g.lo, g.hi, spacing);
  std::vector<double> lo(g.dim, 0.0), hi(g.dim, 0.0), x(g.dim);
  bool any = false;
  const std::size_t ns = g.spatial_size(), nc = f.components();
  for (std::size_t i = 0; i < ns; ++i) {
    bool nz = false;
    for (std::size_t j = 0; j < g.levels() && !nz; ++j)
      for (std::size_t c = 0; c < nc; ++c)
        if (f.at(j, i, c) != 0.0) nz = true;
    if (!nz) continue;
    g.position(i, x);
    for (int a = 0; a < g.dim; ++a) {
      lo[a] = any ? std::min(lo[a], x[a]) : x[a];
      hi[a] = any ? std::max(hi[a], x[a]) : x[a];
    }
    any = true;
  }
  if (!any) {
    for (int a = 0; a < g.dim; ++a) lo[a] = hi[a] = 0.5 * (g.lo[a] + g.hi[a]);
  }
  return center_lattice(lo, hi, spacing);
}

}  // namespace csde
