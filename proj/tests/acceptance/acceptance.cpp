// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Usage: csde_acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "csde/cli.hpp"
#include "csde/degiorgi.hpp"
#include "csde/drift.hpp"
#include "csde/error.hpp"
#include "csde/forcing.hpp"
#include "csde/inequalities.hpp"
#include "csde/norms.hpp"
#include "csde/pde.hpp"
#include "csde/sde.hpp"

using namespace csde;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GridFunction zero_drift(const Grid& g) { return GridFunction(g.spatial_only(), std::size_t(g.dim)); }

// Smooth regression matrix shared by the duality and local-max criteria.
std::vector<json> regression_drifts() {
  return {{{"kind", "constant"}, {"c", {0.8, -0.4}}},
          {{"kind", "linear"}, {"d", 2}, {"rate", 1.0}},
          {{"kind", "gaussian_vortex"}, {"d", 2}, {"strength", 2.0}, {"width", 0.7}}};
}

std::vector<json> regression_forcings() {
  return {{{"kind", "gaussian"}, {"center", {0.3, -0.2}}, {"width", 0.5}, {"amplitude", 1.0}},
          {{"kind", "modulated_bump"}, {"center", {-0.2, 0.1}}, {"width", 0.6}, {"mode", {1, 0}}, {"amplitude", 1.0}},
          {{"kind", "gaussian"}, {"center", {0.0, 0.4}}, {"width", 0.4}, {"amplitude", 1.0}, {"decay", 2.0}}};
}

// 1. b = 0 sine mode on the unit torus against e^{-4 pi^2 t} sin(2 pi x1).
Outcome heat_oracle() {
  const auto start = std::chrono::steady_clock::now();
  const Grid g = box_grid(2, 0.0, 1.0, 65, Boundary::periodic).with_time(1000, 0.0, 0.1);
  const auto mode = [](double t, std::span<const double> x) {
    return std::exp(-4.0 * std::numbers::pi * std::numbers::pi * t) * std::sin(2.0 * std::numbers::pi * x[0]);
  };
  const auto init = GridFunction::sample(g.spatial_only(), mode);
  const auto sol = pde::solve(
      {g, zero_drift(g), GridFunction(g.spatial_only()), init, pde::Direction::forward, pde::SchemeOptions::accurate()});
  const double elapsed = seconds_since(start);
  double worst = 0.0;
  std::vector<double> x(2);
  for (std::size_t j = 0; j < g.levels(); ++j) {
    double err = 0.0, ref = 0.0;
    for (std::size_t k = 0; k < g.spatial_size(); ++k) {
      g.position(k, x);
      const double e = mode(g.time(j), x);
      err = std::max(err, std::abs(sol.u.at(j, k) - e));
      ref = std::max(ref, std::abs(e));
    }
    worst = std::max(worst, err / ref);
  }
  return {worst <= 1e-3 && elapsed < 10.0, fmt("rel Linf err %.3e (<= 1e-3), %.2f s (< 10 s)", worst, elapsed)};
}

// 2. u(0, x0) of the backward equation against E int_0^T f(t, X_t) dt.
Outcome duality_matrix() {
  const auto start = std::chrono::steady_clock::now();
  const Grid g = box_grid(2, -4.0, 4.0, 81).with_time(100, 0.0, 0.5);
  Grid mc_grid = g;
  for (auto& n : mc_grid.nx) n = (n - 1) * 4 + 1;
  const std::vector<double> x0 = {0.1, 0.0};
  bool pass = true;
  double zmax = 0.0;
  std::string rows;
  for (const auto& dspec : regression_drifts()) {
    const drift::ApproxDrift b(drift::make_drift(dspec), drift::ApproxSpec::none());
    std::vector<GridFunction> mc_f;
    std::vector<pde::PdeSolution> sols;
    for (const auto& fspec : regression_forcings()) {
      const auto f = make_scalar_field(fspec, 2);
      mc_f.push_back(f.sample(fspec.contains("decay") ? mc_grid : mc_grid.with_time(0, g.t0, g.t1)));
      sols.push_back(pde::solve({g, b, f.sample(g), std::nullopt, pde::Direction::backward, pde::SchemeOptions::accurate()}));
    }
    sde::SimConfig cfg{b};
    cfg.x0 = x0;
    cfg.T = 0.5;
    cfg.dt = 1e-3;
    cfg.n_paths = 200000;
    cfg.seed = 20240611;
    cfg.integrands = mc_f;
    const auto ens = sde::simulate(cfg);
    for (std::size_t k = 0; k < sols.size(); ++k) {
      const auto r = sde::duality_compare(ens, k, sols[k], x0);
      pass = pass && r.z_score <= 3.0;
      zmax = std::max(zmax, r.z_score);
      rows += fmt(" %s/f%zu z=%.2f", dspec.at("kind").get<std::string>().c_str(), k, r.z_score);
    }
  }
  const double elapsed = seconds_since(start);
  return {pass && elapsed < 300.0, fmt("max z %.2f (<= 3), %.0f s (< 300 s);", zmax, elapsed) + rows};
}

// 3. E int f / ||f|| across the mollification ladder of -0.2 x/|x|^2.
Outcome krylov_uniformity() {
  const Grid fg = box_grid(3, -1.5, 1.5, 49);
  const std::vector<json> forcings = {
      {{"kind", "gaussian"}, {"center", {0.0, 0.0, 0.0}}, {"width", 0.3}, {"amplitude", 1.0}},
      {{"kind", "gaussian"}, {"center", {0.4, 0.0, 0.2}}, {"width", 0.25}, {"amplitude", 1.0}},
      {{"kind", "ball_indicator"}, {"center", {0.0, 0.0, 0.1}}, {"radius", 0.3}, {"amplitude", 1.0}}};
  std::vector<GridFunction> fs;
  for (const auto& f : forcings) fs.push_back(make_scalar_field(f, 3).sample(fg));
  const std::vector<int> ladder = {4, 8, 16, 32};
  const double T = 0.1;
  const double dt = T / std::ceil(T * 8.0 * 32 * 32);
  const ExponentPair e{Exponent(2.0), Exponent(6.0)};
  std::vector<std::vector<double>> ratios(fs.size());
  for (int n : ladder) {
    sde::SimConfig cfg{drift::ApproxDrift(drift::inverse_radial(3, 0.2), drift::ApproxSpec::mollified(n))};
    cfg.x0 = {0.0, 0.0, 0.3};
    cfg.T = T;
    cfg.dt = dt;
    cfg.n_paths = 20000;
    cfg.seed = 977;
    cfg.integrands = fs;
    const auto ens = sde::simulate(cfg);
    for (std::size_t k = 0; k < fs.size(); ++k) ratios[k].push_back(sde::krylov_estimate(ens, fs[k], e).ratio);
  }
  bool pass = true;
  std::string rows;
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const auto [lo, hi] = std::minmax_element(ratios[k].begin(), ratios[k].end());
    const double spread = (*hi - *lo) / *lo;
    pass = pass && spread <= 0.2;
    rows += fmt(" f%zu spread=%.3f", k, spread);
  }
  return {pass, "ratio spread across n=4..32 (<= 0.2):" + rows};
}

// 4. ||lambda/|x| ||_{L^{3,inf}} = lambda (4 pi/3)^{1/3} on R^3.
Outcome weak_l3() {
  const double lambda = 1.0;
  const double exact = lambda * std::cbrt(4.0 * std::numbers::pi / 3.0);
  WeakNormOptions opts;
  opts.min_level_measure = 4.0 * std::numbers::pi / 3.0 * std::pow(0.25, 3);
  std::vector<double> vals;
  for (std::size_t n : {65u, 129u}) {
    const Grid g = box_grid(3, -1.0, 1.0, n);
    vals.push_back(weak_lp_norm(drift::sample_drift(drift::inverse_radial(3, lambda), g).magnitude(), 3.0, {}, 0, opts));
  }
  const double err = std::abs(vals[1] - exact) / exact;
  const double change = std::abs(vals[1] - vals[0]) / vals[1];
  return {err <= 0.02 && change <= 0.01,
          fmt("n=65: %.5f, n=129: %.5f, exact %.5f; err %.4f (<= 0.02), change %.4f (<= 0.01)", vals[0], vals[1], exact,
              err, change)};
}

// 5. Central-difference divergence of the swirl field off the x3-axis.
// Points on the unit sphere at least 45 degrees from the axis; the
// truncation error grows like h^2 / rho^4 toward the axis.
Outcome swirl_divergence() {
  const auto b = drift::swirl_drift(1.0);
  std::mt19937_64 rng(505);
  std::normal_distribution<double> gauss;
  std::vector<std::vector<double>> pts;
  while (pts.size() < 100) {
    std::vector<double> x = {gauss(rng), gauss(rng), gauss(rng)};
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    for (double& c : x) c /= r;
    if (std::hypot(x[0], x[1]) >= std::sqrt(0.5)) pts.push_back(x);
  }
  double coarse = 0.0, fine = 0.0;
  for (const auto& x : pts) {
    coarse = std::max(coarse, std::abs(drift::fd_divergence(b, 0.0, x, 1.0 / 128)));
    fine = std::max(fine, std::abs(drift::fd_divergence(b, 0.0, x, 1.0 / 256)));
  }
  const double drop = coarse / fine;
  return {coarse <= 1e-3 && drop >= 3.5 && drop <= 4.5,
          fmt("max |div| %.3e at h=1/128 (<= 1e-3), %.3e at h=1/256, drop %.2f (about 4)", coarse, fine, drop)};
}

// 6. y_{j+1} = N C^j y_j^{1+eps} from and above the threshold.
Outcome decrease_lemma() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> un(1.0, 10.0), uc(1.0, 10.0), uc2(2.0, 10.0), ue(0.05, 2.0);
  int converged = 0, diverged = 0;
  for (int i = 0; i < 100; ++i) {
    const double N = un(rng), C = uc(rng), eps = ue(rng);
    if (degiorgi::decrease_lemma(degiorgi::decrease_threshold(N, C, eps), N, C, eps, 1000000).converged) ++converged;
  }
  for (int i = 0; i < 100; ++i) {
    const double N = un(rng), C = uc2(rng), eps = ue(rng);
    if (!degiorgi::decrease_lemma(10.0 * degiorgi::decrease_threshold(N, C, eps), N, C, eps, 50).converged) ++diverged;
  }
  return {converged == 100 && diverged >= 95,
          fmt("threshold seeds converged %d/100 (100), 10x seeds diverged %d/100 (>= 95)", converged, diverged)};
}

// 7. Level iteration on every solver-produced regression solution.
Outcome local_max() {
  bool pass = true;
  std::string rows;
  std::size_t worst_levels = 0, runs = 0;
  double worst_ratio = 0.0;
  const Grid g = degiorgi::lab_grid(2, 33, 64);
  for (const auto& dspec : regression_drifts()) {
    const drift::ApproxDrift b(drift::make_drift(dspec), drift::ApproxSpec::none());
    for (const auto& fspec : regression_forcings()) {
      const auto f = make_scalar_field(fspec, 2);
      for (auto scheme : {pde::SchemeOptions::monotone(), pde::SchemeOptions::accurate()}) {
        const auto sol = pde::solve({g, b, f.sample(g), std::nullopt, pde::Direction::forward, scheme});
        for (double C_U : {2.0, 1.05}) {
          degiorgi::LocalMaxParams params;
          params.C_U = C_U;
          const auto r = degiorgi::local_max_iterate(sol.u, sol.drift, sol.forcing, params);
          const bool ok = r.grid_check && r.converged && r.levels_used <= 40;
          pass = pass && ok;
          ++runs;
          worst_levels = std::max(worst_levels, r.levels_used);
          worst_ratio = std::max(worst_ratio, r.sup_half / (2.0 * r.M));
          if (!ok)
            rows += fmt(" [%s %s C_U=%g: sup=%.3g 2M=%.3g levels=%zu]", dspec.at("kind").get<std::string>().c_str(),
                        scheme.id().c_str(), C_U, r.sup_half, 2.0 * r.M, r.levels_used);
        }
      }
    }
  }
  return {pass, fmt("%zu runs over 18 solutions and C_U in {2, 1.05}; max sup/(2M) %.3g (<= 1), max levels %zu (<= 40)", runs,
                     worst_ratio, worst_levels) + rows};
}

// 8. ||grad u||_q / (||grad^2 u||_p^theta [u]_alpha^{1-theta}) under u(x) -> u(lambda x).
Outcome nirenberg_scaling() {
  const std::vector<std::pair<double, double>> sets = {{2.0, 5.0}, {2.0, 8.0}, {3.0, 7.0}};
  double worst = 0.0;
  std::string rows;
  for (const auto& [p, q] : sets) {
    std::vector<double> ratios;
    for (double lambda : {1.0, 2.0, 4.0}) {
      // the dilated bump on the dilated box keeps the node values
      const Grid g = box_grid(2, -4.0 / lambda, 4.0 / lambda, 65);
      const auto u = GridFunction::sample(g, [lambda](double, std::span<const double> x) {
        return std::exp(-0.5 * lambda * lambda * (x[0] * x[0] + x[1] * x[1]));
      });
      ratios.push_back(nirenberg_ratio(u, 1, 2, p, q).ratio);
    }
    double dev = 0.0;
    for (double r : ratios) dev = std::max(dev, std::abs(r - ratios[0]) / ratios[0]);
    worst = std::max(worst, dev);
    rows += fmt(" (p=%g,q=%g) ratio=%.6f dev=%.1e", p, q, ratios[0], dev);
  }
  return {worst <= 1e-6, fmt("max relative deviation %.2e (<= 1e-6);", worst) + rows};
}

// 9. ||f||_{L^p(A)} <= 2^{1/p} (p/(r-p))^{1/r} |A|^{1/p-1/r} ||f||_{L^{r,inf}(A)}.
Outcome embedding() {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> up(1.0, 4.0), ur(1.05, 3.0), uc(-0.6, 0.6), urad(0.3, 0.9);
  std::lognormal_distribution<double> mag(0.0, 1.5);
  std::bernoulli_distribution zero(0.3);
  int violations = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + trial % 2;
    const std::size_t n = d == 2 ? 41 : 17;
    const Grid g = box_grid(d, -1.0, 1.0, n);
    const int blocks = 2 + int(rng() % 6);
    std::vector<double> vals(std::size_t(std::pow(blocks, d)));
    for (double& v : vals) v = zero(rng) ? 0.0 : mag(rng);
    const auto f = GridFunction::sample(g, [&](double, std::span<const double> x) {
      std::size_t idx = 0;
      for (int a = d - 1; a >= 0; --a) {
        const int c = std::min(blocks - 1, int((x[a] + 1.0) * 0.5 * blocks));
        idx = idx * blocks + std::size_t(c);
      }
      return vals[idx];
    });
    const double p = up(rng), r = p * ur(rng);
    Region a;
    if (trial % 3 != 0) {
      std::vector<double> c(d);
      for (double& v : c) v = uc(rng);
      a = Region::in_ball({c, urad(rng)});
    }
    const auto res = weak_embedding_check(f, p, r, a);
    if (!res.holds) ++violations;
    if (res.rhs > 0) worst = std::max(worst, res.lhs / res.rhs);
  }
  return {violations == 0, fmt("violations %d/100 (0), max lhs/rhs %.3f", violations, worst)};
}

// 10. Hoelder exponent fit and oscillation decay for bounded drifts, ||f||_{L^4_4} = 1,
// started from a front of height 2.
Outcome holder_proxy() {
  const Grid g = box_grid(2, -2.0, 2.0, 257).with_time(1024, 0.0, 1.0);
  const ExponentPair e{Exponent(4.0), Exponent(4.0)};
  bool pass = true;
  std::string rows;
  for (const auto& dspec : regression_drifts()) {
    const drift::ApproxDrift b(drift::make_drift(dspec), drift::ApproxSpec::none());
    auto f = make_scalar_field(regression_forcings()[0], 2).sample(g);
    const double nf = mixed_norm(f, e);
    for (double& v : f.values()) v /= nf;
    const auto u0 = GridFunction::sample(g.spatial_only(), [](double, std::span<const double> x) {
      return std::tanh((x[0] - 0.1) / 0.2);
    });
    const auto sol = pde::solve({g, b, f, u0, pde::Direction::forward, pde::SchemeOptions::monotone()});
    // small radii, where the spatial part r |grad u| dominates the r^2 |u_t| part
    const auto h = pde::holder_exponent_estimate(sol, {{1.0, 0.0, 0.0}, {1.0, 0.3, -0.2}, {1.0, -0.2, 0.1}},
                                                 {0.25, 0.125, 0.0625, 0.03125});
    const std::vector<double> x = {0.3, -0.2};
    const auto osc = pde::oscillation_decay(sol, 1.0, x, {1.0, 0.5, 0.25, 0.125, 0.0625});
    const bool ok = h.alpha_hat > 0.0 && h.alpha_hat <= 1.0 && h.max_residual < 0.1 && osc.mu_hat < 1.0;
    pass = pass && ok;
    std::vector<double> raw;
    for (std::size_t i = 2; i < osc.rows.size(); ++i) raw.push_back(osc.rows[i].osc / osc.rows[i - 2].osc);
    std::sort(raw.begin(), raw.end());
    rows += fmt(" %s: alpha=%.3f res=%.3f mu=%.3f (osc ratio without forcing %.3f);",
                dspec.at("kind").get<std::string>().c_str(), h.alpha_hat, h.max_residual, osc.mu_hat, raw[raw.size() / 2]);
  }
  return {pass, "alpha in (0,1], residual < 0.1, mu < 1:" + rows};
}

// 11. Hit fraction of the trap B_r for dX = -lambda X/|X|^2 dt + sqrt(2) dW from |x| = R.
Outcome blowup() {
  sde::BlowupConfig cfg;
  cfg.lambdas = {0.0, 0.5, 1.0, 2.0, 4.0};
  cfg.trap_radius = 0.25;
  cfg.start_distance = 1.0;
  cfg.T = INFINITY;
  cfg.mollification = 12;
  cfg.n_paths = 10000;
  cfg.seed = 1111;
  const auto t = sde::blowup_probe(cfg);
  const auto& base = t.rows[0];
  const double expect = cfg.trap_radius / cfg.start_distance;
  const bool inside = base.ci.lo <= expect && expect <= base.ci.hi;
  std::string rows;
  for (const auto& r : t.rows) rows += fmt(" %g:%.4f", r.lambda, r.hit_fraction);
  return {inside && t.monotone, fmt("lambda=0: %.4f, CI [%.4f, %.4f] contains r/R=%.2f; monotone %s; fractions",
                                    base.hit_fraction, base.ci.lo, base.ci.hi, expect, t.monotone ? "yes" : "no") +
                                    rows};
}

// 12. Output digests of solve and simulate stages across reruns and thread counts.
Outcome determinism() {
  json spec = {{"schema", cli::kSchemaId}, {"name", "determinism"}, {"seed", 12}};
  spec["grid"] = {{"dim", 2}, {"lo", -2.0}, {"hi", 2.0}, {"n", 33}, {"nt", 32}, {"t0", 0.0}, {"t1", 0.5}};
  spec["stages"] = json::array(
      {{{"id", "fwd"},
        {"op", "solve-pde"},
        {"params", {{"drift", regression_drifts()[2]}, {"forcing", regression_forcings()[0]}, {"scheme", "monotone"}}}},
       {{"id", "bwd"},
        {"op", "solve-pde"},
        {"params",
         {{"drift", regression_drifts()[1]}, {"forcing", regression_forcings()[2]}, {"scheme", "accurate"},
          {"direction", "bwd"}}}},
       {{"id", "paths"},
        {"op", "simulate"},
        {"params",
         {{"drift", {{"kind", "inverse_radial"}, {"d", 3}, {"lambda", 0.5}}},
          {"approx", {{"n", 8}}},
          {"x0", {0.3, 0.0, 0.1}},
          {"T", 0.25},
          {"dt", 1.0 / 1024},
          {"paths", 4000},
          {"save_every", 50},
          {"traps", {{{"center", {0.0, 0.0, 0.0}}, {"radius", 0.1}}}}}}}});
  const auto parsed = cli::ExperimentSpec::parse(spec);
  const std::filesystem::path root = std::filesystem::temp_directory_path() / "csde_acceptance_determinism";
  std::filesystem::remove_all(root);
  std::vector<cli::RunManifest> runs;
  for (std::size_t threads : {1u, 1u, 4u}) {
    cli::RunOptions opts;
    opts.output_dir = root / std::to_string(runs.size());
    opts.threads = threads;
    runs.push_back(cli::run(parsed, opts));
  }
  bool pass = true;
  std::size_t files = 0;
  std::string errors;
  for (const auto& st : runs[0].stages)
    if (st.status != "ok") {
      pass = false;
      errors += " [" + st.id + ": " + st.error + "]";
    }
  for (std::size_t k = 1; k < runs.size() && pass; ++k)
    for (std::size_t i = 0; i < runs[0].stages.size(); ++i) {
      const auto& a = runs[0].stages[i].outputs;
      const auto& b = runs[k].stages[i].outputs;
      pass = pass && a.size() == b.size();
      for (std::size_t j = 0; pass && j < a.size(); ++j) {
        pass = a[j].sha256 == b[j].sha256;
        ++files;
      }
    }
  std::filesystem::remove_all(root);
  return {pass, fmt("%zu output digests compared over 3 runs (threads 1, 1, 4)", files) + errors};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "heat oracle", heat_oracle},
      {2, "duality matrix", duality_matrix},
      {3, "krylov ratio uniformity", krylov_uniformity},
      {4, "weak L3 of inverse radial", weak_l3},
      {5, "swirl divergence", swirl_divergence},
      {6, "decrease lemma", decrease_lemma},
      {7, "local max iteration", local_max},
      {8, "nirenberg scaling", nirenberg_scaling},
      {9, "weak embedding", embedding},
      {10, "holder proxy", holder_proxy},
      {11, "blow-up probe", blowup},
      {12, "determinism", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
