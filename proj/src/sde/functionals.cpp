#include <algorithm>
#include <cmath>
#include <limits>

#include "csde/error.hpp"
#include "csde/sde.hpp"

namespace csde::sde {

namespace {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

bool same_field(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid() == b.grid()) || a.components() != b.components()) return false;
  return std::equal(a.values().begin(), a.values().end(), b.values().begin(), b.values().end());
}

std::vector<double> path_integrals(const PathEnsemble& ens, const GridFunction& f) {
  for (std::size_t k = 0; k < ens.n_integrands; ++k)
    if (same_field(ens.integrands[k], f)) {
      auto v = ens.integral(k);
      return {v.begin(), v.end()};
    }
  require(ens.save_every == 1,
          "krylov_estimate: f was not integrated during the simulation and the ensemble does not keep every step");
  const std::size_t ns = ens.snapshots();
  std::vector<double> out(ens.n_paths, 0.0);
  for (std::size_t p = 0; p < ens.n_paths; ++p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < ns; ++i) {
      const double w = (i == 0 || i + 1 == ns) ? 0.5 * ens.dt : ens.dt;
      acc += w * interpolate(f, ens.times[i], ens.state(p, i));
    }
    out[p] = acc;
  }
  return out;
}

}  // namespace

MeanSE mean_se(std::span<const double> v) {
  require(!v.empty(), "mean_se: empty sample");
  MeanSE r;
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; })) {
    r.mean = v[0];
    return r;
  }
  const double n = double(v.size());
  r.mean = pairwise_sum(v) / n;
  if (v.size() < 2) return r;
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - r.mean) * (v[i] - r.mean);
  r.se = std::sqrt(pairwise_sum(dev) / (n - 1.0) / n);
  return r;
}

KrylovEstimate krylov_estimate(const PathEnsemble& ens, const GridFunction& f, const ExponentPair& e,
                               const KrylovOptions& opts) {
  require(ens.n_paths > 0, "krylov_estimate: empty ensemble");
  f.require_scalar("krylov_estimate");
  require(f.grid().dim == ens.dim, "krylov_estimate: forcing dimension mismatch");
  require(lps_index(e, ens.dim) < 2.0, "krylov_estimate: need d/p + 2/q < 2");
  const auto vals = path_integrals(ens, f);
  const auto ms = mean_se(vals);
  KrylovEstimate est;
  est.value = ms.mean;
  est.std_error = ms.se;
  est.f_id = opts.f_id;
  est.exponents = e;
  const auto centers = opts.centers.empty() ? support_lattice(f, opts.spacing) : opts.centers;
  est.rhs_norm = centers.empty() ? 0.0 : localized_norm(f, e, false, centers, 1.0);
  est.ratio = est.rhs_norm > 0.0 ? est.value / est.rhs_norm : 0.0;
  if (!std::isfinite(est.value)) throw NumericalError("krylov_estimate: non-finite estimate");
  return est;
}

DualityResult duality_compare(const PathEnsemble& ens, std::size_t integrand, const pde::PdeSolution& backward,
                              std::span<const double> x0) {
  const auto ms = mean_se(ens.integral(integrand));
  DualityResult r;
  r.mc = ms.mean;
  r.se = ms.se;
  r.pde_value = pde::duality_value(backward, x0);
  const double diff = std::abs(r.mc - r.pde_value);
  if (r.se > 0.0) r.z_score = diff / r.se;
  else r.z_score = diff <= 1e-8 * std::max(1.0, std::abs(r.pde_value)) ? 0.0 : std::numeric_limits<double>::infinity();
  r.pass = r.z_score <= 3.0;
  return r;
}

DualityResult duality_test(const SimConfig& cfg, const GridFunction& f_mc, const pde::PdeSolution& backward) {
  require(backward.direction == pde::Direction::backward, "duality_test: needs a backward solution");
  const Grid& g = backward.u.grid();
  const double horizon = g.t1 - g.t0;
  if (std::abs(horizon - cfg.T) > 1e-12 * horizon || std::abs(g.t0 - cfg.t0) > 1e-12 * (1.0 + std::abs(g.t0)))
    throw ValidationError("duality_test: simulation and PDE horizons differ");
  const Grid& fg = f_mc.grid();
  if (fg.dim != g.dim || fg.lo != g.lo || fg.hi != g.hi || fg.boundary != g.boundary)
    throw ValidationError("duality_test: forcing and PDE domains differ");
  require(g.contains(cfg.x0), "duality_test: x0 lies outside the PDE box");
  const GridFunction b = cfg.drift.sample(backward.drift.grid());
  double scale = 1.0, diff = 0.0;
  for (std::size_t i = 0; i < b.values().size(); ++i) {
    scale = std::max(scale, std::abs(backward.drift.values()[i]));
    diff = std::max(diff, std::abs(b.values()[i] - backward.drift.values()[i]));
  }
  if (diff > 1e-9 * scale) throw ValidationError("duality_test: simulation and PDE use different drifts");
  SimConfig run = cfg;
  run.integrands = {f_mc};
  const auto ens = simulate(run);
  return duality_compare(ens, 0, backward, cfg.x0);
}

double modulus_statistic(const PathEnsemble& ens, double delta) {
  require(ens.n_paths > 0, "modulus_statistic: empty ensemble");
  const std::size_t ns = ens.snapshots();
  require(ns >= 2, "modulus_statistic: ensemble keeps a single snapshot");
  const double res = ens.times[1] - ens.times[0];
  if (delta < res * (1.0 - 1e-12)) throw ValidationError("modulus_statistic: delta below the saved resolution");
  const double tol = delta * (1.0 + 1e-12);
  std::vector<double> vals(ens.n_paths);
  for (std::size_t p = 0; p < ens.n_paths; ++p) {
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < ns; ++i) {
      const auto xi = ens.state(p, i);
      for (std::size_t j = i + 1; j < ns && ens.times[j] - ens.times[i] <= tol; ++j) {
        const auto xj = ens.state(p, j);
        double d2 = 0.0;
        for (int a = 0; a < ens.dim; ++a) d2 += (xj[a] - xi[a]) * (xj[a] - xi[a]);
        best = std::max(best, d2);
      }
    }
    vals[p] = std::pow(best, 0.25);
  }
  return pairwise_sum(vals) / double(ens.n_paths);
}

ModulusFit modulus_fit(const PathEnsemble& ens, const std::vector<double>& deltas) {
  require(deltas.size() >= 2, "modulus_fit: need at least two deltas");
  ModulusFit fit;
  fit.deltas = deltas;
  std::vector<double> lx, ly;
  for (double d : deltas) {
    const double v = modulus_statistic(ens, d);
    fit.values.push_back(v);
    if (!(v > 0.0)) throw NumericalError("modulus_fit: zero statistic, exponent undefined");
    lx.push_back(std::log(d));
    ly.push_back(std::log(v));
  }
  const double n = double(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) sxx += (lx[i] - mx) * (lx[i] - mx), sxy += (lx[i] - mx) * (ly[i] - my);
  fit.exponent = sxy / sxx;
  double rss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (my + fit.exponent * (lx[i] - mx));
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / n);
  return fit;
}

}  // namespace csde::sde
