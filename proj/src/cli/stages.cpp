#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "csde/cli.hpp"
#include "csde/degiorgi.hpp"
#include "csde/error.hpp"
#include "csde/field_io.hpp"
#include "csde/forcing.hpp"
#include "csde/inequalities.hpp"
#include "csde/pde.hpp"
#include "csde/sde.hpp"

namespace csde::cli {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

class CsvOut {
 public:
  CsvOut(const fs::path& path, const StageContext& ctx, const std::vector<std::string>& cols) : os_(path) {
    if (!os_) throw ValidationError("cannot write " + path.string());
    os_ << ctx.header_line() << '\n';
    for (std::size_t i = 0; i < cols.size(); ++i) os_ << (i ? "," : "") << cols[i];
    os_ << '\n';
  }
  CsvOut& operator<<(const std::string& s) {
    cell(s);
    return *this;
  }
  CsvOut& operator<<(double v) {
    cell(num(v));
    return *this;
  }
  void end() {
    os_ << '\n';
    first_ = true;
  }

 private:
  void cell(const std::string& s) {
    if (!first_) os_ << ',';
    os_ << s;
    first_ = false;
  }
  std::ofstream os_;
  bool first_ = true;
};

void write_json(const fs::path& path, const StageContext& ctx, json body) {
  body["header"] = ctx.header();
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write " + path.string());
  os << body.dump(2) << '\n';
}

Grid stage_grid(const json& params, const StageContext& ctx) {
  if (params.contains("grid")) return grid_from_json(params.at("grid"));
  require(!ctx.grid.empty(), "stage needs a grid (params.grid or the spec's grid)");
  return grid_from_json(ctx.grid);
}

std::uint64_t stage_seed(const json& params, const StageContext& ctx) {
  return params.contains("seed") ? params.at("seed").get<std::uint64_t>() : ctx.seed;
}

drift::ApproxDrift make_approx(const json& params) {
  require(params.contains("drift"), "stage needs a 'drift'");
  return drift::ApproxDrift(drift::make_drift(params.at("drift")), approx_from_json(params.value("approx", json())));
}

std::string forcing_id(const json& f, std::size_t i) {
  return f.value("id", f.value("kind", std::string("f")) + std::to_string(i));
}

json without_id(json f) {
  f.erase("id");
  return f;
}

pde::SchemeOptions scheme_from_json(const json& j) {
  if (j.is_null()) return pde::SchemeOptions::monotone();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "monotone") return pde::SchemeOptions::monotone();
    if (s == "accurate") return pde::SchemeOptions::accurate();
    throw ValidationError("scheme: expected 'monotone', 'accurate' or an object");
  }
  pde::SchemeOptions o = j.value("base", std::string("monotone")) == "accurate" ? pde::SchemeOptions::accurate()
                                                                                 : pde::SchemeOptions::monotone();
  if (j.contains("diffusion"))
    o.diffusion = j.at("diffusion") == "crank_nicolson" ? pde::DiffusionScheme::crank_nicolson
                                                        : pde::DiffusionScheme::implicit_euler;
  if (j.contains("advection"))
    o.advection = j.at("advection") == "central" ? pde::AdvectionScheme::central : pde::AdvectionScheme::upwind;
  o.order = j.value("order", o.order);
  o.substeps = j.value("substeps", o.substeps);
  o.cfl = j.value("cfl", o.cfl);
  o.residual_tol = j.value("residual_tol", o.residual_tol);
  return o;
}

json scheme_to_json(const pde::SchemeOptions& o) {
  return {{"diffusion", o.diffusion == pde::DiffusionScheme::crank_nicolson ? "crank_nicolson" : "implicit_euler"},
          {"advection", o.advection == pde::AdvectionScheme::central ? "central" : "upwind"},
          {"order", o.order},
          {"substeps", o.substeps},
          {"cfl", o.cfl},
          {"residual_tol", o.residual_tol}};
}

pde::Direction direction_from(const json& params) {
  const std::string d = params.value("direction", std::string("fwd"));
  if (d == "fwd" || d == "forward") return pde::Direction::forward;
  if (d == "bwd" || d == "backward") return pde::Direction::backward;
  throw ValidationError("direction must be fwd or bwd");
}

// ---- solution files ----

void save_solution(const fs::path& path, const pde::PdeSolution& sol, const StageContext& ctx) {
  const fs::path drift_path = fs::path(path).replace_extension(".drift.csde");
  const fs::path forcing_path = fs::path(path).replace_extension(".forcing.csde");
  json meta = {{"header", ctx.header()},
               {"solve", sol.metadata()},
               {"scheme", scheme_to_json(sol.scheme)},
               {"direction", pde::to_string(sol.direction)},
               {"substeps", sol.substeps},
               {"dt_internal", sol.dt_internal},
               {"residual_norm", sol.residual_norm},
               {"drift_file", drift_path.filename().string()},
               {"forcing_file", forcing_path.filename().string()}};
  save_field(path, sol.u, meta.dump());
  save_field(drift_path, sol.drift, json{{"header", ctx.header()}}.dump());
  save_field(forcing_path, sol.forcing, json{{"header", ctx.header()}}.dump());
}

pde::PdeSolution load_solution(const fs::path& path) {
  auto loaded = load_field(path);
  json meta;
  try {
    meta = json::parse(loaded.metadata);
  } catch (const json::exception& e) {
    throw ValidationError("solution " + path.string() + ": bad metadata");
  }
  require(meta.contains("drift_file") && meta.contains("scheme"), "solution " + path.string() + ": not a solver output");
  pde::PdeSolution sol;
  sol.u = std::move(loaded.field);
  sol.drift = load_field(path.parent_path() / meta.at("drift_file").get<std::string>()).field;
  sol.forcing = load_field(path.parent_path() / meta.at("forcing_file").get<std::string>()).field;
  sol.scheme = scheme_from_json(meta.at("scheme"));
  sol.direction = meta.at("direction") == "backward" ? pde::Direction::backward : pde::Direction::forward;
  sol.substeps = meta.at("substeps").get<std::size_t>();
  sol.dt_internal = meta.value("dt_internal", 0.0);
  sol.residual_norm = meta.value("residual_norm", 0.0);
  return sol;
}

// ---- ops ----

StageResult op_norms(const json& p, const StageContext& ctx) {
  GridFunction f;
  if (p.contains("input")) {
    f = load_field(ctx.resolve(p.at("input").get<std::string>(), ".csde")).field;
  } else {
    const Grid g = stage_grid(p, ctx);
    f = make_scalar_field(p.at("field"), g.dim).sample(g);
  }
  f.require_scalar("norms");
  json out = {{"field", p.contains("field") ? p.at("field") : json(p.value("input", std::string()))}};
  json mixed = json::array();
  for (const auto& e : p.value("exponents", json::array())) {
    const auto pair = pair_from_json(e);
    mixed.push_back({{"exponents", pair_to_json(pair)},
                     {"value", mixed_norm(f, pair)},
                     {"lps", to_string(lps_classify(pair, f.grid().dim))}});
  }
  out["mixed"] = mixed;
  json weak = json::array();
  for (const auto& w : p.value("weak", json::array())) {
    const double pw = w.get<double>();
    weak.push_back({{"p", pw}, {"value", weak_mixed_norm(f, pw, Exponent::infinity())}});
  }
  out["weak"] = weak;
  json loc = json::array();
  for (const auto& l : p.value("localized", json::array())) {
    const auto pair = pair_from_json(l.at("exponents"));
    const bool is_weak = l.value("weak", false);
    const auto centers = support_lattice(f, l.value("spacing", 0.5));
    loc.push_back({{"exponents", pair_to_json(pair)},
                   {"weak", is_weak},
                   {"value", centers.empty() ? 0.0 : localized_norm(f, pair, is_weak, centers, l.value("radius", 1.0))}});
  }
  out["localized"] = loc;
  json hold = json::array();
  for (const auto& a : p.value("holder", json::array()))
    hold.push_back({{"alpha", a.get<double>()}, {"value", holder_seminorm(f, a.get<double>())}});
  out["holder"] = hold;
  const fs::path path = ctx.dir / "norms.json";
  write_json(path, ctx, out);
  return {{path}, out, true};
}

StageResult op_drift(const json& p, const StageContext& ctx) {
  const Grid g = stage_grid(p, ctx);
  const auto base = drift::make_drift(p.at("drift"));
  GridFunction samples;
  json out = {{"drift", p.at("drift")}};
  if (p.contains("approx")) {
    const drift::ApproxDrift a(base, approx_from_json(p.at("approx")));
    samples = a.sample(g);
    out["approx"] = a.describe();
  } else {
    samples = drift::sample_drift(base, g);
  }
  const GridFunction mag = samples.magnitude();
  out["sup"] = mixed_norm(mag, {Exponent::infinity(), Exponent::infinity()});
  out["singular_set"] = base.singular_set;
  if (base.homogeneity) out["homogeneity"] = *base.homogeneity;
  if (g.dim >= 2) {
    const auto centers = support_lattice(mag, p.value("spacing", 0.5));
    if (!centers.empty())
      out["localized_weak_Ld"] =
          localized_norm(mag, {Exponent(double(g.dim)), Exponent::infinity()}, true, centers, 1.0);
  }
  if (p.contains("split")) {
    drift::SplitOptions so;
    so.center_spacing = p.at("split").value("spacing", 0.5);
    const auto s = drift::split_critical(base, p.at("split").at("epsilon").get<double>(), g, so);
    out["split"] = {{"N", s.N}, {"b0_weak", s.b0_weak}, {"b1_sup", s.b1_sup}, {"sampling_cap", s.sampling_cap}};
  }
  const fs::path field = ctx.dir / "drift.csde";
  save_field(field, samples, json{{"header", ctx.header()}, {"drift", out}}.dump());
  const fs::path path = ctx.dir / "drift.json";
  write_json(path, ctx, out);
  return {{field, path}, out, true};
}

StageResult op_solve(const json& p, const StageContext& ctx) {
  const Grid g = stage_grid(p, ctx);
  require(!g.is_static(), "solve-pde: the grid needs time levels (nt >= 1)");
  const auto approx = make_approx(p);
  require(p.contains("forcing"), "solve-pde: needs a 'forcing'");
  const auto forcing = make_scalar_field(p.at("forcing"), g.dim);
  pde::PdeProblem prob{g, approx, forcing.sample(g), std::nullopt, direction_from(p), scheme_from_json(p.value("scheme", json()))};
  if (p.contains("initial")) prob.initial = make_scalar_field(p.at("initial"), g.dim).sample(g.spatial_only());
  const auto sol = pde::solve(prob);

  const fs::path sol_path = ctx.dir / "sol.csde";
  save_solution(sol_path, sol, ctx);
  std::vector<fs::path> outputs = {sol_path, fs::path(sol_path).replace_extension(".drift.csde"),
                                   fs::path(sol_path).replace_extension(".forcing.csde")};
  json out = {{"solve", sol.metadata()}, {"drift", approx.describe()}};
  bool pass = true;
  const fs::path metrics_path = ctx.dir / "metrics.csv";
  {
    CsvOut csv(metrics_path, ctx, {"metric", "value"});
    csv << "residual_norm" << sol.residual_norm;
    csv.end();
    csv << "sup_u" << mixed_norm(sol.u, {Exponent::infinity(), Exponent::infinity()});
    csv.end();
    const json diag = p.value("diagnostics", json::object());
    if (diag.contains("global_max")) {
      const auto e = pair_from_json(diag.at("global_max").value("exponents", json::array({4.0, 4.0})));
      pde::GlobalMaxOptions go;
      go.spacing = diag.at("global_max").value("spacing", 0.5);
      const auto gm = pde::global_max_check(sol, sol.forcing, e, go);
      out["global_max"] = {{"lhs", gm.lhs}, {"rhs_norm", gm.rhs_norm}, {"ratio", finite_or_string(gm.ratio)},
                           {"sup", gm.sup}, {"energy_sup", gm.energy_sup}, {"energy_grad", gm.energy_grad}};
      csv << "global_max_lhs" << gm.lhs;
      csv.end();
      csv << "global_max_rhs" << gm.rhs_norm;
      csv.end();
      csv << "global_max_ratio" << gm.ratio;
      csv.end();
    }
    if (diag.contains("oscillation")) {
      const auto& o = diag.at("oscillation");
      const auto center = o.at("center").get<std::vector<double>>();
      require(int(center.size()) == g.dim + 1, "oscillation: center is (t, x...)");
      std::vector<double> x(center.begin() + 1, center.end());
      const auto rep = pde::oscillation_decay(sol, center[0], x, o.at("radii").get<std::vector<double>>());
      const fs::path osc_path = ctx.dir / "osc.csv";
      CsvOut oc(osc_path, ctx, {"r", "osc", "forcing_term"});
      for (const auto& row : rep.rows) {
        oc << row.r << row.osc << row.forcing_term;
        oc.end();
      }
      outputs.push_back(osc_path);
      out["mu_hat"] = rep.mu_hat;
      csv << "mu_hat" << rep.mu_hat;
      csv.end();
      pass = pass && rep.mu_hat < 1.0;
    }
    if (diag.contains("holder")) {
      const auto& h = diag.at("holder");
      const auto est = pde::holder_exponent_estimate(sol, h.at("centers").get<std::vector<std::vector<double>>>(),
                                                     h.value("radii", std::vector<double>{}));
      out["alpha_hat"] = est.alpha_hat;
      out["holder_residual"] = est.max_residual;
      csv << "alpha_hat" << est.alpha_hat;
      csv.end();
      csv << "holder_residual" << est.max_residual;
      csv.end();
      pass = pass && est.alpha_hat > 0.0 && est.alpha_hat <= 1.0 && est.max_residual < 0.1;
    }
    if (diag.contains("duality_point")) {
      require(sol.direction == pde::Direction::backward, "duality_point needs a backward solve");
      const auto x = diag.at("duality_point").get<std::vector<double>>();
      out["duality_value"] = pde::duality_value(sol, x);
      csv << "duality_value" << out["duality_value"].get<double>();
      csv.end();
    }
  }
  outputs.push_back(metrics_path);
  const fs::path path = ctx.dir / "solve.json";
  write_json(path, ctx, out);
  outputs.push_back(path);
  return {outputs, out, pass};
}

degiorgi::LabFields lab_fields(const json& p, const StageContext& ctx) {
  const auto sol = load_solution(ctx.resolve(p.at("input").get<std::string>(), ".csde"));
  degiorgi::require_subsolution(sol, p.value("certify_tol", 1e-6));
  if (!p.contains("cylinder")) return {sol.u, sol.drift, sol.forcing, Cylinder{0.0, std::vector<double>(sol.u.grid().dim, 0.0), 1.0}};
  const auto& c = p.at("cylinder");
  const Cylinder q{c.at("t").get<double>(), c.at("x").get<std::vector<double>>(), c.at("r").get<double>()};
  const auto lab = degiorgi::lab_grid(sol.u.grid().dim, p.value("lab_nx", std::size_t(33)), p.value("lab_nt", std::size_t(64)));
  return degiorgi::to_lab_frame(sol.u, sol.drift, sol.forcing, q, lab);
}

StageResult op_degiorgi(const json& p, const StageContext& ctx) {
  const std::string check = p.at("check").get<std::string>();
  const json cp = p.value("params", json::object());
  json out = {{"check", check}};
  std::vector<fs::path> outputs;
  bool pass = true;
  auto pair_or = [&](const char* key, ExponentPair def) { return cp.contains(key) ? pair_from_json(cp.at(key)) : def; };

  if (check == "decrease") {
    const double N = cp.value("N", 1.0), C = cp.value("C", 2.0), eps = cp.value("eps", 1.0);
    const double thr = degiorgi::decrease_threshold(N, C, eps);
    const double y0 = cp.contains("y0") ? cp.at("y0").get<double>() : cp.value("threshold_multiple", 1.0) * thr;
    const auto r = degiorgi::decrease_lemma(y0, N, C, eps, cp.value("jmax", std::size_t(100000)));
    const fs::path seq = ctx.dir / "decrease.csv";
    CsvOut csv(seq, ctx, {"j", "y"});
    for (std::size_t j = 0; j < r.y.size(); ++j) {
      csv << double(j) << r.y[j];
      csv.end();
    }
    outputs.push_back(seq);
    out.update({{"y0", y0}, {"threshold", thr}, {"converged", r.converged}, {"diverged", r.diverged}, {"steps", r.steps}});
    if (cp.contains("expect_converged")) pass = r.converged == cp.at("expect_converged").get<bool>();
  } else {
    require(p.contains("input"), "degiorgi: check '" + check + "' needs an input solution");
    const auto lab = lab_fields(p, ctx);
    if (check == "ei") {
      degiorgi::EnergyParams ep;
      ep.k = cp.value("k", 0.0);
      ep.rho = cp.value("rho", 0.5);
      ep.R = cp.value("R", 1.0);
      ep.s = cp.value("s", -1.0);
      ep.t = cp.value("t", 0.0);
      ep.C = cp.value("C", 1e3);
      ep.e2 = pair_or("e2", ep.e2);
      ep.e3 = pair_or("e3", ep.e3);
      const std::size_t draws = cp.value("draws", std::size_t(0));
      std::vector<degiorgi::EnergyParams> runs;
      if (draws == 0) runs.push_back(ep);
      std::mt19937_64 rng(stage_seed(p, ctx));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      double umax = mixed_norm(lab.u, {Exponent::infinity(), Exponent::infinity()});
      for (std::size_t i = 0; i < draws; ++i) {
        auto e = ep;
        e.R = 0.3 + 0.7 * unit(rng);
        e.rho = e.R * (0.1 + 0.8 * unit(rng));
        e.k = umax * unit(rng);
        runs.push_back(e);
      }
      const fs::path table = ctx.dir / "energy.csv";
      CsvOut csv(table, ctx, {"k", "rho", "R", "s", "t", "lhs", "rhs", "l2_term", "drift_term", "forcing_u_term",
                              "forcing_term", "observed_C", "holds"});
      double worst = 0.0;
      for (const auto& e : runs) {
        const auto r = degiorgi::energy_inequality_report(lab.u, lab.b, lab.f, e);
        csv << r.k << r.rho << r.R << r.s << r.t << r.lhs << r.rhs << r.l2_term << r.drift_term << r.forcing_u_term
            << r.forcing_term << r.observed_C << (r.holds ? "1" : "0");
        csv.end();
        pass = pass && r.holds;
        worst = std::max(worst, r.observed_C);
      }
      outputs.push_back(table);
      out.update({{"draws", runs.size()}, {"C", ep.C}, {"max_observed_C", finite_or_string(worst)}, {"holds", pass}});
    } else if (check == "lm") {
      degiorgi::LocalMaxParams lp;
      lp.e2 = pair_or("e2", lp.e2);
      lp.e3 = pair_or("e3", lp.e3);
      lp.C_U = cp.value("C_U", lp.C_U);
      if (cp.contains("M0")) lp.M0 = cp.at("M0").get<double>();
      lp.max_levels = cp.value("max_levels", lp.max_levels);
      const auto r = degiorgi::local_max_iterate(lab.u, lab.b, lab.f, lp);
      const fs::path table = ctx.dir / "levels.csv";
      CsvOut csv(table, ctx, {"k", "M_k", "U_k", "E_k", "measure", "t_k", "radius_k"});
      for (const auto& rec : r.records) {
        csv << double(rec.k) << rec.M_k << rec.U_k << rec.E_k << rec.measure << rec.t_k << rec.radius_k;
        csv.end();
      }
      outputs.push_back(table);
      out.update({{"M", r.M}, {"epsilon", r.epsilon}, {"forcing_norm", r.forcing_norm}, {"energy", r.energy},
                  {"converged", r.converged}, {"levels_used", r.levels_used}, {"sup_half", r.sup_half},
                  {"grid_check", r.grid_check}});
      pass = r.converged && r.grid_check;
    } else if (check == "measure") {
      degiorgi::MeasureParams mp;
      mp.delta = cp.value("delta", mp.delta);
      mp.beta = cp.value("beta", mp.beta);
      mp.e3 = pair_or("e3", mp.e3);
      const auto r = degiorgi::measure_lemma_check(lab.u, lab.b, lab.f, mp);
      out.update({{"A", r.a}, {"B", r.b}, {"D", r.d}, {"forcing_norm", r.forcing_norm}, {"clipped_nodes", r.clipped_nodes},
                  {"premise", r.premise}, {"implication", r.implication}, {"beta", r.beta}});
      pass = r.implication;
    } else {
      throw ValidationError("degiorgi: check must be ei, lm, measure or decrease");
    }
  }
  const fs::path path = ctx.dir / "degiorgi.json";
  write_json(path, ctx, out);
  outputs.push_back(path);
  return {outputs, out, pass};
}

std::vector<Ball> traps_from(const json& p) {
  std::vector<Ball> out;
  for (const auto& t : p.value("traps", json::array()))
    out.push_back(Ball{t.at("center").get<std::vector<double>>(), t.at("radius").get<double>()});
  return out;
}

StageResult op_simulate(const json& p, const StageContext& ctx) {
  sde::SimConfig cfg{make_approx(p)};
  cfg.x0 = p.at("x0").get<std::vector<double>>();
  cfg.t0 = p.value("t0", 0.0);
  cfg.T = p.at("T").get<double>();
  cfg.dt = p.at("dt").get<double>();
  cfg.n_paths = p.value("paths", std::size_t(1000));
  cfg.seed = stage_seed(p, ctx);
  cfg.save_every = p.value("save_every", std::size_t(0));
  cfg.traps = traps_from(p);
  cfg.threads = p.value("threads", ctx.threads);
  const auto ens = sde::simulate(cfg);
  const fs::path path = ctx.dir / "ens.csde";
  sde::save_ensemble(path, ens);
  json out = ens.metadata();
  json mean = json::array(), var = json::array();
  const std::size_t last = ens.snapshots() - 1;
  for (int a = 0; a < ens.dim; ++a) {
    std::vector<double> v(ens.n_paths);
    for (std::size_t i = 0; i < ens.n_paths; ++i) v[i] = ens.state(i, last)[a];
    const auto ms = sde::mean_se(v);
    for (double& x : v) x = (x - ms.mean) * (x - ms.mean);
    mean.push_back(ms.mean);
    var.push_back(ens.n_paths > 1 ? sde::mean_se(v).mean * double(ens.n_paths) / double(ens.n_paths - 1) : 0.0);
  }
  out["mean_XT"] = mean;
  out["var_XT"] = var;
  std::size_t frozen = 0;
  for (auto f : ens.frozen) frozen += f;
  out["frozen_paths"] = frozen;
  json hits = json::array();
  for (std::size_t k = 0; k < ens.n_traps; ++k) {
    std::size_t h = 0;
    for (std::size_t i = 0; i < ens.n_paths; ++i) h += !std::isnan(ens.hit_times[i * ens.n_traps + k]);
    hits.push_back(double(h) / double(ens.n_paths));
  }
  out["hit_fractions"] = hits;
  const fs::path summary = ctx.dir / "simulate.json";
  write_json(summary, ctx, out);
  return {{path, summary}, out, frozen == 0};
}

double default_dt(double T, std::optional<int> n) {
  if (!n) return T / 1000.0;
  const double target = 1.0 / (8.0 * double(*n) * double(*n));
  return T / std::ceil(T / target - 1e-9);
}

StageResult op_krylov(const json& p, const StageContext& ctx) {
  const auto base = drift::make_drift(p.at("drift"));
  std::vector<std::optional<int>> ladder;
  if (p.contains("ladder"))
    for (const auto& n : p.at("ladder")) ladder.push_back(n.get<int>());
  else
    ladder.push_back(approx_from_json(p.value("approx", json())).n);
  const Grid fg = stage_grid(p, ctx);
  const auto e = pair_from_json(p.value("exponents", json::array({2.0, 6.0})));
  const double T = p.at("T").get<double>();
  std::optional<int> nmax;
  for (auto n : ladder)
    if (n) nmax = std::max(nmax.value_or(0), *n);
  const double dt = p.contains("dt") ? p.at("dt").get<double>() : default_dt(T, nmax);
  std::vector<GridFunction> fs_;
  std::vector<std::string> ids;
  std::size_t i = 0;
  for (const auto& f : p.at("forcings")) {
    ids.push_back(forcing_id(f, i++));
    fs_.push_back(make_scalar_field(without_id(f), fg.dim).sample(fg));
  }
  const fs::path table = ctx.dir / "krylov.csv";
  CsvOut csv(table, ctx, {"n", "f_id", "estimate", "stderr", "rhs_norm", "ratio"});
  std::vector<std::vector<double>> ratios(fs_.size());
  std::vector<double> rhs(fs_.size(), -1.0);
  for (std::size_t li = 0; li < ladder.size(); ++li) {
    drift::ApproxSpec spec = approx_from_json(p.value("approx", json()));
    spec.n = ladder[li];
    sde::SimConfig cfg{drift::ApproxDrift(base, spec)};
    cfg.x0 = p.at("x0").get<std::vector<double>>();
    cfg.T = T;
    cfg.dt = dt;
    cfg.n_paths = p.value("paths", std::size_t(20000));
    cfg.seed = stage_seed(p, ctx);
    cfg.integrands = fs_;
    cfg.threads = p.value("threads", ctx.threads);
    const auto ens = sde::simulate(cfg);
    for (std::size_t k = 0; k < fs_.size(); ++k) {
      sde::KrylovOptions ko;
      ko.f_id = ids[k];
      ko.spacing = p.value("spacing", 0.5);
      auto est = sde::krylov_estimate(ens, fs_[k], e, ko);
      ratios[k].push_back(est.ratio);
      csv << (ladder[li] ? double(*ladder[li]) : 0.0) << ids[k] << est.value << est.std_error << est.rhs_norm
          << est.ratio;
      csv.end();
    }
  }
  const double tol = p.value("tolerance", 0.2);
  json spread = json::object();
  bool pass = true;
  for (std::size_t k = 0; k < fs_.size(); ++k) {
    const auto [lo, hi] = std::minmax_element(ratios[k].begin(), ratios[k].end());
    const double s = *lo > 0 ? (*hi - *lo) / *lo : std::numeric_limits<double>::infinity();
    spread[ids[k]] = finite_or_string(s);
    pass = pass && s <= tol;
  }
  json out = {{"exponents", pair_to_json(e)}, {"dt", dt}, {"spread", spread}, {"tolerance", tol}};
  const fs::path path = ctx.dir / "krylov.json";
  write_json(path, ctx, out);
  return {{table, path}, out, pass};
}

StageResult op_duality(const json& p, const StageContext& ctx) {
  const Grid g = stage_grid(p, ctx);
  require(!g.is_static(), "duality: the PDE grid needs time levels");
  const auto x0 = p.at("x0").get<std::vector<double>>();
  const std::size_t refine = p.value("mc_refine", std::size_t(4));
  require(refine >= 1, "duality: mc_refine must be >= 1");
  Grid mc_grid = g;
  for (auto& n : mc_grid.nx) n = (n - 1) * refine + 1;
  const auto scheme = scheme_from_json(p.value("scheme", json("accurate")));
  const fs::path table = ctx.dir / "duality.csv";
  CsvOut csv(table, ctx, {"drift", "forcing", "mc", "stderr", "pde", "z", "pass"});
  bool pass = true;
  double zmax = 0.0;
  std::size_t di = 0;
  for (const auto& dspec : p.at("drifts")) {
    const std::string did = dspec.value("id", dspec.at("kind").get<std::string>() + std::to_string(di++));
    const drift::ApproxDrift b(drift::make_drift(without_id(dspec)), approx_from_json(p.value("approx", json())));
    std::vector<GridFunction> mc_f;
    std::vector<pde::PdeSolution> sols;
    std::vector<std::string> fids;
    std::size_t fi = 0;
    for (const auto& fspec : p.at("forcings")) {
      fids.push_back(forcing_id(fspec, fi++));
      const auto f = make_scalar_field(without_id(fspec), g.dim);
      const bool autonomous = !fspec.contains("decay");
      mc_f.push_back(f.sample(autonomous ? mc_grid.with_time(0, g.t0, g.t1) : mc_grid));
      pde::PdeProblem prob{g, b, f.sample(g), std::nullopt, pde::Direction::backward, scheme};
      sols.push_back(pde::solve(prob));
    }
    sde::SimConfig cfg{b};
    cfg.x0 = x0;
    cfg.t0 = g.t0;
    cfg.T = g.t1 - g.t0;
    cfg.dt = p.value("dt", 1e-3);
    cfg.n_paths = p.value("paths", std::size_t(200000));
    cfg.seed = stage_seed(p, ctx);
    cfg.integrands = mc_f;
    cfg.threads = p.value("threads", ctx.threads);
    const auto ens = sde::simulate(cfg);
    for (std::size_t k = 0; k < sols.size(); ++k) {
      const auto r = sde::duality_compare(ens, k, sols[k], x0);
      csv << did << fids[k] << r.mc << r.se << r.pde_value << r.z_score << (r.pass ? "1" : "0");
      csv.end();
      pass = pass && r.pass;
      zmax = std::max(zmax, r.z_score);
    }
  }
  json out = {{"max_z", finite_or_string(zmax)}, {"all_pass", pass}, {"mc_refine", refine}};
  const fs::path path = ctx.dir / "duality.json";
  write_json(path, ctx, out);
  return {{table, path}, out, pass};
}

StageResult op_blowup(const json& p, const StageContext& ctx) {
  sde::BlowupConfig cfg;
  cfg.lambdas = p.at("lambdas").get<std::vector<double>>();
  cfg.dim = p.value("dim", 3);
  cfg.trap_radius = p.value("trap_radius", cfg.trap_radius);
  cfg.start_distance = p.value("start_distance", cfg.start_distance);
  if (p.contains("T")) {
    const auto& t = p.at("T");
    cfg.T = t.is_string() ? exponent_from_json(t).is_infinite() ? INFINITY : 0.0 : t.get<double>();
  }
  cfg.escape_radius = p.value("escape_radius", cfg.escape_radius);
  if (p.contains("mollification")) cfg.mollification = p.at("mollification").get<int>();
  cfg.kappa = p.value("kappa", cfg.kappa);
  cfg.trap_tolerance = p.value("trap_tolerance", cfg.trap_tolerance);
  cfg.dt_max = p.value("dt_max", cfg.dt_max);
  cfg.dt_min = p.value("dt_min", cfg.dt_min);
  cfg.max_steps = p.value("max_steps", cfg.max_steps);
  cfg.n_paths = p.value("paths", cfg.n_paths);
  cfg.seed = stage_seed(p, ctx);
  cfg.threads = p.value("threads", ctx.threads);
  const auto table = sde::blowup_probe(cfg);
  const fs::path csv_path = ctx.dir / "blowup.csv";
  CsvOut csv(csv_path, ctx, {"lambda", "estimate", "stderr", "ci_lo", "ci_hi", "hits", "escaped", "censored", "n"});
  PlotSeries s{"hit fraction", {}, {}, {}, {}};
  for (const auto& r : table.rows) {
    const double se = std::sqrt(r.hit_fraction * (1.0 - r.hit_fraction) / double(r.n));
    csv << r.lambda << r.hit_fraction << se << r.ci.lo << r.ci.hi << double(r.hits) << double(r.escaped)
        << double(r.censored) << double(r.n);
    csv.end();
    s.x.push_back(r.lambda);
    s.y.push_back(r.hit_fraction);
    s.lo.push_back(r.ci.lo);
    s.hi.push_back(r.ci.hi);
  }
  const fs::path svg = ctx.dir / "blowup.svg";
  {
    std::ofstream os(svg);
    os << render_svg({"trap entry fraction vs lambda", "lambda", "hit fraction", false, false, {s}});
  }
  json out = {{"monotone", table.monotone}, {"trap_radius", cfg.trap_radius}, {"start_distance", cfg.start_distance},
              {"T", finite_or_string(cfg.T)}};
  const fs::path path = ctx.dir / "blowup.json";
  write_json(path, ctx, out);
  return {{csv_path, svg, path}, out, table.monotone};
}

}  // namespace

const std::vector<std::string>& known_ops() {
  static const std::vector<std::string> ops = {"norms",    "drift",   "solve-pde", "degiorgi",
                                               "simulate", "krylov",  "duality",   "blowup"};
  return ops;
}

std::string StageContext::header_line() const {
  return "# csde spec=" + spec_hash + " seed=" + std::to_string(seed) + " grid=" + grid.dump();
}

json StageContext::header() const { return {{"spec", spec_hash}, {"seed", seed}, {"grid", grid}}; }

fs::path StageContext::resolve(const std::string& ref, const std::string& extension) const {
  auto it = inputs.find(ref);
  if (it != inputs.end()) {
    for (const auto& path : it->second)
      if (path.filename().string().find('.') == path.filename().string().rfind('.') && path.extension() == extension)
        return path;
    throw ValidationError("input stage '" + ref + "' has no " + extension + " output");
  }
  if (fs::exists(ref)) return ref;
  throw ValidationError("cannot resolve input '" + ref + "'");
}

StageResult run_stage(const std::string& op, const json& params, const StageContext& ctx) {
  fs::create_directories(ctx.dir);
  try {
    if (op == "norms") return op_norms(params, ctx);
    if (op == "drift") return op_drift(params, ctx);
    if (op == "solve-pde") return op_solve(params, ctx);
    if (op == "degiorgi") return op_degiorgi(params, ctx);
    if (op == "simulate") return op_simulate(params, ctx);
    if (op == "krylov") return op_krylov(params, ctx);
    if (op == "duality") return op_duality(params, ctx);
    if (op == "blowup") return op_blowup(params, ctx);
  } catch (const json::exception& e) {
    throw ValidationError(op + ": " + e.what());
  }
  throw ValidationError("unknown op '" + op + "'");
}

}  // namespace csde::cli
