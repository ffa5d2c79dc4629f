#include <chrono>
#include <fstream>
#include <set>

#include "csde/cli.hpp"
#include "csde/error.hpp"

namespace csde::cli {

namespace {

std::uint64_t stage_seed(std::uint64_t global, const std::string& id) {
  // FNV-1a of the id mixed into the global seed
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : id) h = (h ^ c) * 1099511628211ull;
  return (global ^ h) & 0x7fffffffffffffffull;
}

json record_to_json(const StageRecord& r) {
  json outs = json::array();
  for (const auto& o : r.outputs) outs.push_back({{"path", o.path}, {"sha256", o.sha256}});
  json j = {{"id", r.id},           {"op", r.op},         {"status", r.status},
            {"wall_seconds", r.wall_seconds}, {"seed", r.seed}, {"outputs", outs},
            {"summary", r.summary}, {"check_passed", r.check_passed}};
  if (!r.error.empty()) {
    j["error"] = r.error;
    j["error_code"] = r.error_code;
  }
  return j;
}

StageRecord record_from_json(const json& j) {
  StageRecord r;
  r.id = j.at("id");
  r.op = j.at("op");
  r.status = j.at("status");
  r.wall_seconds = j.value("wall_seconds", 0.0);
  r.seed = j.value("seed", std::uint64_t(0));
  for (const auto& o : j.value("outputs", json::array())) r.outputs.push_back({o.at("path"), o.at("sha256")});
  r.summary = j.value("summary", json::object());
  r.check_passed = j.value("check_passed", true);
  r.error = j.value("error", std::string());
  r.error_code = j.value("error_code", 0);
  return r;
}

}  // namespace

json RunManifest::to_json() const {
  json stages_j = json::array();
  for (const auto& s : stages) stages_j.push_back(record_to_json(s));
  return {{"name", name},
          {"spec_hash", spec_hash},
          {"code_version", code_version},
          {"seed", seed},
          {"run_dir", run_dir.string()},
          {"stages", stages_j}};
}

RunManifest RunManifest::from_json(const json& j) {
  try {
    RunManifest m;
    m.name = j.at("name");
    m.spec_hash = j.at("spec_hash");
    m.code_version = j.value("code_version", std::string());
    m.seed = j.value("seed", std::uint64_t(0));
    m.run_dir = j.at("run_dir").get<std::string>();
    for (const auto& s : j.at("stages")) m.stages.push_back(record_from_json(s));
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
}

RunManifest RunManifest::load(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open manifest " + path.string());
  try {
    auto m = from_json(json::parse(is));
    m.run_dir = path.parent_path();
    return m;
  } catch (const json::parse_error& e) {
    throw ValidationError("manifest " + path.string() + ": " + e.what());
  }
}

int RunManifest::exit_code() const {
  int code = ExitCode::ok;
  for (const auto& s : stages) {
    if (s.status == "failed") {
      if (s.error_code == ExitCode::validation) return ExitCode::validation;
      code = ExitCode::numerical;
    } else if (s.status == "ok" && !s.check_passed && code == ExitCode::ok) {
      code = ExitCode::check_failed;
    }
  }
  return code;
}

RunManifest run(const ExperimentSpec& spec, const RunOptions& opts) {
  RunManifest m;
  m.name = spec.name;
  m.spec_hash = spec.hash();
  m.code_version = CSDE_VERSION;
  m.seed = spec.seed;
  m.run_dir = opts.output_dir.value_or(spec.output_dir) / spec.name;
  fs::create_directories(m.run_dir);
  {
    std::ofstream os(m.run_dir / "spec.json");
    os << spec.source.dump(2) << '\n';
  }

  std::map<std::string, std::vector<fs::path>> produced;
  std::set<std::string> failed;
  for (std::size_t idx : spec.order()) {
    const auto& st = spec.stages[idx];
    StageRecord rec;
    rec.id = st.id;
    rec.op = st.op;
    rec.seed = st.params.contains("seed") ? st.params.at("seed").get<std::uint64_t>() : stage_seed(spec.seed, st.id);
    bool blocked = false;
    for (const auto& in : st.inputs) blocked = blocked || failed.count(in);
    if (blocked) {
      rec.status = "skipped";
      rec.error = "an input stage failed";
      failed.insert(st.id);
      m.stages.push_back(rec);
      continue;
    }
    StageContext ctx;
    ctx.dir = m.run_dir / st.id;
    ctx.spec_hash = m.spec_hash;
    ctx.seed = rec.seed;
    ctx.grid = spec.grid;
    ctx.threads = opts.threads;
    for (const auto& in : st.inputs) ctx.inputs[in] = produced.at(in);
    const auto start = std::chrono::steady_clock::now();
    try {
      auto res = run_stage(st.op, st.params, ctx);
      rec.status = "ok";
      rec.summary = res.summary;
      rec.check_passed = res.check_passed;
      for (const auto& p : res.outputs)
        rec.outputs.push_back({fs::relative(p, m.run_dir).generic_string(), sha256_file(p)});
      produced[st.id] = res.outputs;
    } catch (const ValidationError& e) {
      rec.status = "failed";
      rec.error = e.what();
      rec.error_code = ExitCode::validation;
    } catch (const std::exception& e) {
      rec.status = "failed";
      rec.error = e.what();
      rec.error_code = ExitCode::numerical;
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (rec.status == "failed") failed.insert(st.id);
    m.stages.push_back(std::move(rec));
  }
  std::ofstream os(m.run_dir / "manifest.json");
  os << m.to_json().dump(2) << '\n';
  return m;
}

}  // namespace csde::cli
