#include <algorithm>
#include <cmath>
#include <limits>

#include "csde/error.hpp"
#include "csde/sde.hpp"
#include "parallel.hpp"

namespace csde::sde {

WilsonInterval wilson_interval(std::size_t hits, std::size_t n, double z) {
  require(n > 0 && hits <= n, "wilson_interval: need 0 <= hits <= n, n > 0");
  const double nn = double(n), ph = double(hits) / nn, z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (ph + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

void BlowupConfig::validate() const {
  require(!lambdas.empty(), "blowup_probe: empty lambda list");
  require(dim >= 2, "blowup_probe: need d >= 2");
  require(trap_radius > 0 && start_distance > trap_radius, "blowup_probe: need 0 < trap radius < start distance");
  require(escape_radius > start_distance, "blowup_probe: escape radius must exceed the start distance");
  require(T > 0, "blowup_probe: T must be positive");
  require(kappa > 0 && dt_min > 0 && dt_max >= dt_min, "blowup_probe: bad step controls");
  require(trap_tolerance >= 0 && trap_tolerance < 1, "blowup_probe: trap tolerance must lie in [0, 1)");
  require(n_paths >= 1, "blowup_probe: need at least one path");
  bool singular = false;
  for (double l : lambdas) singular = singular || l != 0.0;
  if (singular) {
    require(mollification.has_value() && *mollification >= 1, "blowup_probe: lambda > 0 needs a mollification level");
  }
  if (mollification)
    require(trap_radius >= 3.0 / double(*mollification),
            "blowup_probe: trap radius below 3x the mollification scale");
}

BlowupTable blowup_probe(const BlowupConfig& cfg) {
  cfg.validate();
  const int d = cfg.dim;
  BlowupTable table;
  for (std::size_t row = 0; row < cfg.lambdas.size(); ++row) {
    const double lambda = cfg.lambdas[row];
    drift::ApproxSpec spec;
    if (cfg.mollification && lambda != 0.0) spec.n = *cfg.mollification;
    const drift::ApproxDrift b(lambda == 0.0 ? drift::constant_drift(std::vector<double>(d, 0.0))
                                             : drift::inverse_radial(d, lambda),
                               spec);
    std::vector<std::uint8_t> outcome(cfg.n_paths, 0);  // 0 survived, 1 hit, 2 escaped, 3 censored
    auto run_path = [&](std::size_t p) {
      NormalStream rng(cfg.seed, (std::uint64_t(row) << 32) | std::uint64_t(p));
      std::vector<double> x(d, 0.0), v(d), z(d);
      x[0] = cfg.start_distance;
      double t = 0.0;
      for (std::size_t step = 0;; ++step) {
        double r2 = 0.0;
        for (double c : x) r2 += c * c;
        const double r = std::sqrt(r2);
        if (r <= cfg.trap_radius * (1.0 + cfg.trap_tolerance)) {
          outcome[p] = 1;
          return;
        }
        if (r >= cfg.escape_radius) {
          outcome[p] = 2;
          return;
        }
        if (t >= cfg.T) return;
        if (step >= cfg.max_steps) {
          outcome[p] = 3;
          return;
        }
        const double gap = r - cfg.trap_radius;
        double h = std::clamp(cfg.kappa * gap * gap, cfg.dt_min, cfg.dt_max);
        if (std::isfinite(cfg.T)) h = std::min(h, cfg.T - t);
        b.eval(t, x, v);
        rng.fill(z);
        const double s = std::sqrt(2.0 * h);
        for (int a = 0; a < d; ++a) x[a] += v[a] * h + s * z[a];
        t += h;
      }
    };
    detail::parallel_for(cfg.n_paths, cfg.threads, run_path);
    BlowupRow out;
    out.lambda = lambda;
    out.n = cfg.n_paths;
    for (auto o : outcome) {
      out.hits += o == 1;
      out.escaped += o == 2;
      out.censored += o == 3;
    }
    out.hit_fraction = double(out.hits) / double(out.n);
    out.ci = wilson_interval(out.hits, out.n);
    table.rows.push_back(out);
  }
  table.monotone = true;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const auto& a = table.rows[i - 1];
    const auto& b = table.rows[i];
    if (b.lambda < a.lambda) continue;
    if (b.hit_fraction < a.hit_fraction && b.ci.hi < a.ci.lo) table.monotone = false;
  }
  return table;
}

}  // namespace csde::sde
