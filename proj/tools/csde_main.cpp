#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "csde/cli.hpp"
#include "csde/error.hpp"

using namespace csde;
using namespace csde::cli;

namespace {

// Inline JSON, or @path to read it from a file.
json parse_json_arg(const std::string& text, const std::string& what) {
  if (text.empty()) return json::object();
  std::string body = text;
  if (text[0] == '@') {
    std::ifstream is(text.substr(1));
    if (!is) throw ValidationError(what + ": cannot open " + text.substr(1));
    std::stringstream ss;
    ss << is.rdbuf();
    body = ss.str();
  }
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

struct StageArgs {
  std::string params, drift, forcing, grid, direction, input, check, x0, out;
  std::optional<double> T, dt;
  std::optional<std::size_t> paths, threads;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, StageArgs& a, const std::string& default_out) {
  sub->add_option("--params", a.params, "stage parameters: JSON text or @file");
  sub->add_option("--grid", a.grid, "grid spec: JSON text or @file");
  sub->add_option("--seed", a.seed, "random seed");
  sub->add_option("--threads", a.threads, "worker threads (0: all cores)");
  a.out = default_out;
  sub->add_option("--out", a.out, "main output file; siblings go to its directory")->capture_default_str();
}

json build_params(const StageArgs& a) {
  json p = parse_json_arg(a.params, "--params");
  require(p.is_object(), "--params must be a JSON object");
  auto set_kind = [&](const char* key, const std::string& id) {
    if (id.empty()) return;
    if (!p.contains(key) || !p[key].is_object()) p[key] = json::object();
    p[key]["kind"] = id;
  };
  set_kind("drift", a.drift);
  set_kind("forcing", a.forcing);
  if (!a.grid.empty()) p["grid"] = parse_json_arg(a.grid, "--grid");
  if (!a.direction.empty()) p["direction"] = a.direction;
  if (!a.input.empty()) p["input"] = a.input;
  if (!a.check.empty()) p["check"] = a.check;
  if (!a.x0.empty()) p["x0"] = parse_list(a.x0);
  if (a.T) p["T"] = *a.T;
  if (a.dt) p["dt"] = *a.dt;
  if (a.paths) p["paths"] = *a.paths;
  if (a.seed) p["seed"] = *a.seed;
  if (a.threads) p["threads"] = *a.threads;
  return p;
}

int run_single(const std::string& op, const StageArgs& a) {
  const json p = build_params(a);
  const fs::path out = a.out;
  StageContext ctx;
  ctx.dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  ctx.seed = p.value("seed", std::uint64_t(0));
  ctx.grid = p.value("grid", json::object());
  ctx.spec_hash = sha256_hex(json{{"op", op}, {"params", p}}.dump());
  ctx.threads = a.threads.value_or(0);
  auto res = run_stage(op, p, ctx);
  // the first output with the requested extension is the primary artifact
  for (auto& f : res.outputs) {
    if (f.extension() != out.extension()) continue;
    if (f.filename() != out.filename()) {
      fs::rename(f, ctx.dir / out.filename());
      f = ctx.dir / out.filename();
    }
    break;
  }
  json summary = res.summary;
  json files = json::array();
  for (const auto& f : res.outputs) files.push_back(f.string());
  std::cout << json{{"op", op}, {"check_passed", res.check_passed}, {"outputs", files}, {"summary", summary}}.dump(2)
            << '\n';
  return res.check_passed ? ExitCode::ok : ExitCode::check_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"csde: critical-drift SDE and PDE experiments"};
  app.require_subcommand(1);

  struct Single {
    std::string op, help, out;
    StageArgs args;
  };
  std::vector<Single> singles = {{"norms", "mixed, weak, localized and Hölder norms of a field", "norms.json", {}},
                                 {"drift", "sample a catalog drift and its critical split", "drift.csde", {}},
                                 {"solve-pde", "solve the advection-diffusion equation", "sol.csde", {}},
                                 {"degiorgi", "energy, local max, measure and decrease checks", "degiorgi.json", {}},
                                 {"simulate", "Euler-Maruyama path ensemble", "ens.csde", {}},
                                 {"krylov", "Krylov ratio ladder over mollification levels", "krylov.csv", {}},
                                 {"duality", "Monte Carlo vs backward PDE matrix", "duality.csv", {}},
                                 {"blowup", "trap entry probe for inverse-radial drifts", "blowup.csv", {}}};
  for (auto& s : singles) {
    auto* sub = app.add_subcommand(s.op, s.help);
    add_common(sub, s.args, s.out);
    if (s.op == "solve-pde" || s.op == "drift" || s.op == "simulate" || s.op == "krylov")
      sub->add_option("--drift", s.args.drift, "drift kind");
    if (s.op == "solve-pde") {
      sub->add_option("--forcing", s.args.forcing, "forcing kind");
      sub->add_option("--direction", s.args.direction, "fwd | bwd")->check(CLI::IsMember({"fwd", "bwd"}));
    }
    if (s.op == "degiorgi") {
      sub->add_option("--input", s.args.input, "solution file");
      sub->add_option("--check", s.args.check, "ei | lm | measure | decrease")
          ->check(CLI::IsMember({"ei", "lm", "measure", "decrease"}));
    }
    if (s.op == "simulate" || s.op == "krylov" || s.op == "duality") {
      sub->add_option("--x0", s.args.x0, "start point, comma separated");
      sub->add_option("--T", s.args.T, "horizon");
      sub->add_option("--dt", s.args.dt, "time step");
    }
    if (s.op == "simulate" || s.op == "krylov" || s.op == "duality" || s.op == "blowup")
      sub->add_option("--paths", s.args.paths, "number of paths");
  }

  std::string spec_path, out_dir;
  std::size_t threads = 0;
  auto* run_cmd = app.add_subcommand("run", "run an experiment spec");
  run_cmd->add_option("spec", spec_path, "experiment spec (JSON)")->required();
  run_cmd->add_option("--out-dir", out_dir, "override the spec's output directory");
  run_cmd->add_option("--threads", threads, "worker threads (0: all cores)");
  bool print_schema = false;
  auto* schema_cmd = app.add_subcommand("schema", "print the experiment spec schema");
  schema_cmd->callback([&] { print_schema = true; });

  std::string manifest_path, format = "csv", report_dir = "report";
  auto* rep = app.add_subcommand("report", "aggregate a finished run");
  rep->add_option("manifest", manifest_path, "manifest.json of a run")->required();
  rep->add_option("--format", format, "csv | json | plots")->check(CLI::IsMember({"csv", "json", "plots"}));
  rep->add_option("--out", report_dir, "report directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ExitCode::validation;
  }

  try {
    if (print_schema) {
      std::cout << experiment_schema().dump(2) << '\n';
      return ExitCode::ok;
    }
    for (auto& s : singles)
      if (app.got_subcommand(s.op)) return run_single(s.op, s.args);
    if (*run_cmd) {
      RunOptions opts;
      if (!out_dir.empty()) opts.output_dir = out_dir;
      opts.threads = threads;
      const auto m = run(ExperimentSpec::load(spec_path), opts);
      for (const auto& st : m.stages)
        std::cout << st.id << ' ' << st.status << (st.status == "ok" && !st.check_passed ? " (check failed)" : "")
                  << (st.error.empty() ? "" : ": " + st.error) << '\n';
      std::cout << "manifest: " << (m.run_dir / "manifest.json").string() << '\n';
      return m.exit_code();
    }
    if (*rep) {
      for (const auto& f : report(RunManifest::load(manifest_path), format, report_dir))
        std::cout << f.string() << '\n';
      return ExitCode::ok;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCode::validation;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return ExitCode::numerical;
  }
  return ExitCode::ok;
}
