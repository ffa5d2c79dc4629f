#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>

#include "csde/error.hpp"
#include "csde/field_io.hpp"
#include "csde/sde.hpp"
#include "parallel.hpp"

namespace csde::sde {

void SimConfig::validate() const {
  require(int(x0.size()) == drift.dim(), "simulate: x0 dimension differs from the drift");
  require(T > 0 && std::isfinite(T), "simulate: T must be positive and finite");
  require(dt > 0 && dt <= T, "simulate: need 0 < dt <= T");
  require(n_paths >= 1, "simulate: need at least one path");
  const double s = T / dt;
  require(std::abs(s - std::round(s)) <= 1e-9 * s, "simulate: T must be a multiple of dt");
  for (const auto& b : traps) {
    require(int(b.center.size()) == drift.dim(), "simulate: trap dimension mismatch");
    require(b.radius > 0, "simulate: trap radius must be positive");
  }
  for (const auto& f : integrands) {
    f.require_scalar("simulate integrand");
    require(f.grid().dim == drift.dim(), "simulate: integrand dimension mismatch");
  }
  if (enforce_coupling && drift.spec().n) {
    const double n = double(*drift.spec().n);
    require(dt <= (1.0 + 1e-9) / (8.0 * n * n), "simulate: dt exceeds 1/(8 n^2) for the mollification level");
  }
}

std::size_t SimConfig::steps() const { return std::size_t(std::llround(T / dt)); }

std::span<const double> PathEnsemble::state(std::size_t path, std::size_t snap) const {
  return {states.data() + (path * times.size() + snap) * std::size_t(dim), std::size_t(dim)};
}

std::span<const double> PathEnsemble::integral(std::size_t k) const {
  require(k < n_integrands, "ensemble: integrand index out of range");
  return {integrals.data() + k * n_paths, n_paths};
}

nlohmann::json PathEnsemble::metadata() const {
  return {{"dim", dim},         {"n_paths", n_paths},   {"t0", t0},        {"T", T},
          {"dt", dt},           {"seed", seed},         {"save_every", save_every},
          {"drift", drift},     {"n_traps", n_traps},   {"n_integrands", n_integrands},
          {"max_step", max_step}};
}

PathEnsemble simulate(const SimConfig& cfg) {
  cfg.validate();
  const int d = cfg.drift.dim();
  const std::size_t steps = cfg.steps();
  const double dt = cfg.T / double(steps);
  const double noise = std::sqrt(2.0 * dt);

  PathEnsemble ens;
  ens.dim = d;
  ens.n_paths = cfg.n_paths;
  ens.t0 = cfg.t0;
  ens.T = cfg.T;
  ens.dt = dt;
  ens.seed = cfg.seed;
  ens.save_every = cfg.save_every;
  ens.drift = cfg.drift.describe();
  std::vector<std::size_t> snap_steps;
  for (std::size_t i = 0; i <= steps; ++i)
    if (i == 0 || i == steps || (cfg.save_every && i % cfg.save_every == 0)) snap_steps.push_back(i);
  for (std::size_t i : snap_steps) ens.times.push_back(cfg.t0 + double(i) * dt);
  const std::size_t ns = snap_steps.size();
  ens.states.assign(cfg.n_paths * ns * std::size_t(d), 0.0);
  ens.n_traps = cfg.traps.size();
  ens.hit_times.assign(cfg.n_paths * ens.n_traps, std::numeric_limits<double>::quiet_NaN());
  ens.n_integrands = cfg.integrands.size();
  ens.integrands = cfg.integrands;
  ens.integrals.assign(ens.n_integrands * cfg.n_paths, 0.0);
  ens.frozen.assign(cfg.n_paths, 0);
  std::vector<double> path_max(cfg.n_paths, 0.0);

  auto run_path = [&](std::size_t p) {
    NormalStream rng(cfg.seed, p);
    std::vector<double> x(cfg.x0), xn(d), b(d), z(d);
    std::vector<double> acc(ens.n_integrands, 0.0);
    std::size_t next_snap = 0;
    bool frozen = false;
    double maxdx = 0.0;
    auto record = [&](std::size_t i) {
      while (next_snap < ns && snap_steps[next_snap] == i) {
        std::copy(x.begin(), x.end(), ens.states.begin() + std::ptrdiff_t((p * ns + next_snap) * std::size_t(d)));
        ++next_snap;
      }
    };
    auto integrate = [&](double t, double w) {
      for (std::size_t k = 0; k < ens.n_integrands; ++k) acc[k] += w * interpolate(cfg.integrands[k], t, x);
    };
    record(0);
    integrate(cfg.t0, 0.5 * dt);
    for (std::size_t i = 0; i < steps; ++i) {
      const double t = cfg.t0 + double(i) * dt;
      if (!frozen) {
        cfg.drift.eval(t, x, b);
        rng.fill(z);
        double dx2 = 0.0;
        bool finite = true;
        for (int a = 0; a < d; ++a) {
          xn[a] = x[a] + b[a] * dt + noise * z[a];
          finite = finite && std::isfinite(xn[a]);
          dx2 += (xn[a] - x[a]) * (xn[a] - x[a]);
        }
        if (finite) {
          x.swap(xn);
          maxdx = std::max(maxdx, std::sqrt(dx2));
        } else {
          frozen = true;
        }
      }
      const double tn = cfg.t0 + double(i + 1) * dt;
      for (std::size_t k = 0; k < ens.n_traps; ++k) {
        double& hit = ens.hit_times[p * ens.n_traps + k];
        if (!std::isnan(hit)) continue;
        const auto& ball = cfg.traps[k];
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) r2 += (x[a] - ball.center[a]) * (x[a] - ball.center[a]);
        if (r2 <= ball.radius * ball.radius) hit = tn;
      }
      record(i + 1);
      integrate(tn, i + 1 == steps ? 0.5 * dt : dt);
    }
    for (std::size_t k = 0; k < ens.n_integrands; ++k) ens.integrals[k * cfg.n_paths + p] = acc[k];
    ens.frozen[p] = frozen ? 1 : 0;
    path_max[p] = maxdx;
  };

  detail::parallel_for(cfg.n_paths, cfg.threads, run_path);
  for (double m : path_max) ens.max_step = std::max(ens.max_step, m);
  return ens;
}

void write_ensemble(const PathEnsemble& e, std::ostream& os) {
  io::Writer w(os);
  io::write_preamble(w, BinaryKind::ensemble);
  w.u32(std::uint32_t(e.dim));
  w.u64(e.n_paths);
  w.f64(e.t0);
  w.f64(e.T);
  w.f64(e.dt);
  w.u64(e.seed);
  w.u64(e.save_every);
  w.u64(e.n_traps);
  w.u64(e.n_integrands);
  const std::string meta = e.metadata().dump();
  w.bytes(meta);
  w.u64(e.times.size());
  w.f64s(e.times);
  w.f64s(e.states);
  w.f64s(e.hit_times);
  w.f64s(e.integrals);
  std::vector<double> frozen(e.frozen.begin(), e.frozen.end());
  w.f64s(frozen);
}

PathEnsemble read_ensemble(std::istream& is) {
  io::Reader r(is);
  if (io::read_preamble(r) != BinaryKind::ensemble) throw ValidationError("read_ensemble: not an ensemble file");
  PathEnsemble e;
  e.dim = int(r.u32());
  e.n_paths = r.u64();
  e.t0 = r.f64();
  e.T = r.f64();
  e.dt = r.f64();
  e.seed = r.u64();
  e.save_every = r.u64();
  e.n_traps = r.u64();
  e.n_integrands = r.u64();
  const std::string meta = r.bytes(r.u32());
  e.drift = nlohmann::json::parse(meta).value("drift", nlohmann::json::object());
  e.max_step = nlohmann::json::parse(meta).value("max_step", 0.0);
  const std::size_t ns = r.u64();
  e.times = r.f64s(ns);
  e.states = r.f64s(e.n_paths * ns * std::size_t(e.dim));
  e.hit_times = r.f64s(e.n_paths * e.n_traps);
  e.integrals = r.f64s(e.n_paths * e.n_integrands);
  const auto frozen = r.f64s(e.n_paths);
  e.frozen.assign(frozen.begin(), frozen.end());
  return e;
}

void save_ensemble(const std::filesystem::path& path, const PathEnsemble& e) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot open " + path.string() + " for writing");
  write_ensemble(e, os);
}

PathEnsemble load_ensemble(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open " + path.string());
  return read_ensemble(is);
}

}  // namespace csde::sde
