#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csde/drift.hpp"
#include "csde/grid.hpp"
#include "csde/norms.hpp"
#include "json.hpp"

namespace csde::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kSchemaId = "csde-experiment/1";

enum ExitCode : int { ok = 0, validation = 2, numerical = 3, check_failed = 4 };

// ---- config helpers ----

// {"dim":d, "lo":a|[..], "hi":b|[..], "n":n|[..], "nt":k, "t0":s, "t1":t,
//  "boundary":"dirichlet"|"periodic"}
Grid grid_from_json(const json& j);
json grid_to_json(const Grid& g);
// number, or "inf"/"infinity"
Exponent exponent_from_json(const json& j);
ExponentPair pair_from_json(const json& j);
json pair_to_json(const ExponentPair& e);
// {"n":int, "N":real, "order":"truncate_then_mollify"|"mollify_then_truncate"}
drift::ApproxSpec approx_from_json(const json& j);

// ---- experiment spec ----

struct StageSpec {
  std::string id;
  std::string op;
  json params = json::object();
  std::vector<std::string> inputs;
};

struct ExperimentSpec {
  std::string name;
  std::uint64_t seed = 0;
  fs::path output_dir = "runs";
  json grid = json::object();  // default grid for stages without their own
  std::vector<StageSpec> stages;
  json source;  // the parsed document

  static ExperimentSpec parse(const json& doc);
  static ExperimentSpec load(const fs::path& path);
  std::string hash() const;  // SHA-256 of the canonical document
  // Topological order of stage indices; throws on cycles or unknown inputs.
  std::vector<std::size_t> order() const;
};

// The published schema, as a JSON Schema document.
json experiment_schema();

// ---- stages ----

struct StageContext {
  fs::path dir;  // stage output directory
  std::string spec_hash;
  std::uint64_t seed = 0;
  json grid = json::object();
  std::map<std::string, std::vector<fs::path>> inputs;  // stage id -> outputs
  std::size_t threads = 0;

  // "# csde spec=<hash> seed=<seed> grid=<json>"
  std::string header_line() const;
  json header() const;
  // Resolves a stage id among the inputs or a plain file path.
  fs::path resolve(const std::string& ref, const std::string& extension) const;
};

struct StageResult {
  std::vector<fs::path> outputs;
  json summary = json::object();
  bool check_passed = true;
};

const std::vector<std::string>& known_ops();
StageResult run_stage(const std::string& op, const json& params, const StageContext& ctx);

// ---- runner ----

struct OutputFile {
  std::string path;  // relative to the run directory
  std::string sha256;
};

struct StageRecord {
  std::string id, op;
  std::string status = "pending";  // ok | failed | skipped
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::vector<OutputFile> outputs;
  json summary = json::object();
  bool check_passed = true;
  std::string error;
  int error_code = 0;
};

struct RunManifest {
  std::string name;
  std::string spec_hash;
  std::string code_version;
  std::uint64_t seed = 0;
  fs::path run_dir;
  std::vector<StageRecord> stages;

  json to_json() const;
  static RunManifest from_json(const json& j);
  static RunManifest load(const fs::path& path);
  int exit_code() const;
};

struct RunOptions {
  std::optional<fs::path> output_dir;  // overrides the spec
  std::size_t threads = 0;             // forwarded to stages that simulate paths
};

// Runs stages in dependency order. A failed stage skips its dependents and
// the rest continue; the manifest is written to <run_dir>/manifest.json.
RunManifest run(const ExperimentSpec& spec, const RunOptions& opts = {});

// ---- reports ----

// format: csv | json | plots. Returns the written files.
std::vector<fs::path> report(const RunManifest& m, const std::string& format, const fs::path& out_dir);

// ---- utilities ----

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const fs::path& path);

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  std::vector<double> lo, hi;  // optional error bars
};

struct PlotSpec {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<PlotSeries> series;
};

std::string render_svg(const PlotSpec& spec);

// Colored table; cells beyond `threshold` are flagged.
std::string render_heat_table(const std::string& title, const std::vector<std::string>& rows,
                              const std::vector<std::string>& cols, const std::vector<std::vector<double>>& values,
                              double threshold);

std::vector<std::vector<std::string>> read_csv_table(const fs::path& path);

}  // namespace csde::cli
