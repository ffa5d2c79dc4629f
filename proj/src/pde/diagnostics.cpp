#include <algorithm>
#include <cmath>

#include "csde/error.hpp"
#include "csde/inequalities.hpp"
#include "csde/pde.hpp"

namespace csde::pde {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double min_image(const Grid& g, int a, double d) {
  if (g.boundary == Boundary::periodic) {
    const double len = g.hi[a] - g.lo[a];
    d -= len * std::round(d / len);
  }
  return d;
}

// Largest r with Q_r(t, x) inside the grid.
double fitting_radius(const Grid& g, double t, std::span<const double> x) {
  double r = g.is_static() ? 1e300 : std::sqrt(std::max(0.0, t - g.t0));
  for (int a = 0; a < g.dim; ++a) {
    if (g.boundary == Boundary::periodic) r = std::min(r, 0.5 * (g.hi[a] - g.lo[a]));
    else r = std::min({r, x[a] - g.lo[a], g.hi[a] - x[a]});
  }
  return r;
}

}  // namespace

double cylinder_oscillation(const GridFunction& u, const Cylinder& q) {
  u.require_scalar("cylinder_oscillation");
  require(q.r > 0, "cylinder: radius must be positive");
  const Grid& g = u.grid();
  require(int(q.x.size()) == g.dim, "cylinder: center dimension mismatch");
  const double eps = 1e-9;
  if (!g.is_static()) {
    if (q.t - q.r * q.r < g.t0 - eps * (1.0 + g.dt()) || q.t > g.t1 + eps)
      throw ValidationError("cylinder exits the grid's time range");
  }
  if (g.boundary != Boundary::periodic)
    for (int a = 0; a < g.dim; ++a)
      if (q.x[a] - q.r < g.lo[a] - eps || q.x[a] + q.r > g.hi[a] + eps)
        throw ValidationError("cylinder exits the grid's box");
  double lo = 1e300, hi = -1e300;
  bool any = false;
  std::vector<double> x(g.dim);
  const double r2 = q.r * q.r * (1.0 + 1e-12);
  const double tdt = g.is_static() ? 0.0 : 1e-9 * g.dt();
  for (std::size_t j = 0; j < g.levels(); ++j) {
    if (!g.is_static()) {
      const double t = g.time(j);
      if (t < q.t - q.r * q.r - tdt || t > q.t + tdt) continue;
    }
    auto v = u.level(j);
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
      g.position(i, x);
      double s = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        const double d = min_image(g, a, x[a] - q.x[a]);
        s += d * d;
      }
      if (s > r2) continue;
      lo = std::min(lo, v[i]);
      hi = std::max(hi, v[i]);
      any = true;
    }
  }
  if (!any) throw ValidationError("cylinder contains no grid node");
  return hi - lo;
}

OscillationReport oscillation_decay(const PdeSolution& sol, double t, std::span<const double> x,
                                    const std::vector<double>& radii, const OscillationOptions& opts) {
  require(!radii.empty(), "oscillation_decay: radii list is empty");
  const Grid& g = sol.u.grid();
  const int d = g.dim;
  const double kappa = 2.0 - lps_index(opts.forcing_exponents, d);
  require(kappa > 0, "oscillation_decay: forcing exponents need d/p + 2/q < 2");
  OscillationReport rep;
  std::vector<double> xs(x.begin(), x.end());
  for (double r : radii) {
    const Cylinder q{t, xs, r};
    OscRow row;
    row.r = r;
    row.osc = cylinder_oscillation(sol.u, q);
    // forcing term of the rescaled oscillation lemma: C_f r^kappa ||f||_{L^p_q(Q_r)}
    row.forcing_term = opts.forcing_constant * std::pow(r, kappa) * mixed_norm(sol.forcing, opts.forcing_exponents, q);
    rep.rows.push_back(row);
  }
  for (const auto& big : rep.rows) {
    if (big.osc <= 0.0) continue;
    for (const auto& small : rep.rows)
      if (std::abs(small.r - 0.25 * big.r) <= 1e-9 * big.r)
        rep.decay_ratios.push_back((small.osc - big.forcing_term) / big.osc);
  }
  if (rep.decay_ratios.empty())
    throw ValidationError("oscillation_decay: need radius pairs (r, r/4) with nonzero oscillation");
  rep.mu_hat = median(rep.decay_ratios);
  return rep;
}

HolderEstimate holder_exponent_estimate(const GridFunction& u, const std::vector<std::vector<double>>& centers,
                                        std::vector<double> radii) {
  u.require_scalar("holder_exponent_estimate");
  require(!centers.empty(), "holder_exponent_estimate: no centers");
  const Grid& g = u.grid();
  for (const auto& c : centers) require(int(c.size()) == g.dim + 1, "holder_exponent_estimate: centers are (t, x)");
  if (radii.empty()) {
    double rmax = 1e300;
    for (const auto& c : centers) rmax = std::min(rmax, fitting_radius(g, c[0], std::span(c).subspan(1)));
    const double rmin = std::max(2.0 * g.max_h(), g.is_static() ? 0.0 : std::sqrt(2.0 * g.dt()));
    for (double r = rmax; r >= rmin * (1 - 1e-12); r *= 0.5) radii.push_back(r);
  }
  if (radii.size() < 3) throw ValidationError("holder_exponent_estimate: fewer than 3 dyadic radii fit the grid");

  HolderEstimate est;
  std::vector<double> slopes;
  for (const auto& c : centers) {
    std::vector<double> lx, ly;
    std::vector<double> xs(c.begin() + 1, c.end());
    for (double r : radii) {
      const double o = cylinder_oscillation(u, Cylinder{c[0], xs, r});
      if (o > 0.0) {
        lx.push_back(std::log(r));
        ly.push_back(std::log(o));
      }
    }
    const bool flat = ly.size() < 3 || std::all_of(ly.begin(), ly.end(), [&](double v) { return v == ly[0]; });
    if (flat) throw NumericalError("holder_exponent_estimate: degenerate fit (oscillation constant across radii)");
    const double n = double(lx.size());
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      mx += lx[k];
      my += ly[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      sxx += (lx[k] - mx) * (lx[k] - mx);
      sxy += (lx[k] - mx) * (ly[k] - my);
    }
    HolderFit fit;
    fit.center = c;
    fit.slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      const double e = ly[k] - (my + fit.slope * (lx[k] - mx));
      ss += e * e;
    }
    fit.residual = std::sqrt(ss / n);
    fit.points = lx.size();
    slopes.push_back(fit.slope);
    est.max_residual = std::max(est.max_residual, fit.residual);
    est.fits.push_back(std::move(fit));
  }
  est.raw_median = median(slopes);
  // Hoelder exponents above 1 carry no meaning; smooth data saturates at 1
  est.alpha_hat = std::min(1.0, est.raw_median);
  return est;
}

HolderEstimate holder_exponent_estimate(const PdeSolution& sol, const std::vector<std::vector<double>>& centers,
                                        std::vector<double> radii) {
  return holder_exponent_estimate(sol.u, centers, std::move(radii));
}

GlobalMaxReport global_max_check(const PdeSolution& sol, const GridFunction& f, const ExponentPair& e,
                                 const GlobalMaxOptions& opts) {
  const Grid& g = sol.u.grid();
  if (!(lps_index(e, g.dim) < 2.0)) throw ValidationError("global_max_check: requires d/p + 2/q < 2");
  f.require_scalar("global_max_check");
  auto centers = opts.centers;
  if (centers.empty()) centers = center_lattice(g.lo, g.hi, opts.spacing);
  GlobalMaxReport rep;
  for (double v : sol.u.values()) rep.sup = std::max(rep.sup, std::abs(v));
  rep.energy_sup = localized_norm(sol.u, {2.0, Exponent::infinity()}, false, centers);
  rep.energy_grad = localized_norm(gradient(sol.u).magnitude(), {2.0, 2.0}, false, centers);
  rep.lhs = rep.sup + rep.energy_sup + rep.energy_grad;
  rep.rhs_norm = localized_norm(f, e, false, centers);
  if (rep.rhs_norm > 0) rep.ratio = rep.lhs / rep.rhs_norm;
  else rep.ratio = rep.lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace csde::pde
