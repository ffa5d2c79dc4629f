#include <fstream>
#include <set>

#include "csde/cli.hpp"
#include "csde/error.hpp"

namespace csde::cli {

namespace {

double to_num(const std::string& s) {
  try {
    return std::stod(s);
  } catch (...) {
    return NAN;
  }
}

// Outputs of a stage whose file name is `name`.
std::optional<fs::path> find_output(const RunManifest& m, const StageRecord& s, const std::string& name) {
  for (const auto& o : s.outputs)
    if (fs::path(o.path).filename() == name) return m.run_dir / o.path;
  return std::nullopt;
}

// Column of `name` in a table whose first row is the header.
std::size_t column(const std::vector<std::vector<std::string>>& t, const std::string& name) {
  require(!t.empty(), "report: empty table");
  for (std::size_t j = 0; j < t[0].size(); ++j)
    if (t[0][j] == name) return j;
  throw ValidationError("report: missing column '" + name + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write " + path.string());
  os << text;
}

const std::vector<std::string> kTables = {"metrics.csv", "osc.csv", "energy.csv", "levels.csv", "decrease.csv",
                                          "krylov.csv",  "duality.csv", "blowup.csv"};

}  // namespace

std::vector<fs::path> report(const RunManifest& m, const std::string& format, const fs::path& out_dir) {
  require(format == "csv" || format == "json" || format == "plots", "report: format must be csv, json or plots");
  fs::create_directories(out_dir);
  std::vector<fs::path> written;

  if (format == "json") {
    json j = {{"name", m.name}, {"spec_hash", m.spec_hash}, {"exit_code", m.exit_code()}};
    json stages = json::array();
    for (const auto& s : m.stages)
      stages.push_back({{"id", s.id}, {"op", s.op}, {"status", s.status}, {"check_passed", s.check_passed},
                        {"summary", s.summary}, {"error", s.error}});
    j["stages"] = stages;
    const fs::path p = out_dir / "report.json";
    write_text(p, j.dump(2) + "\n");
    written.push_back(p);
    return written;
  }

  if (format == "csv") {
    {
      const fs::path p = out_dir / "stages.csv";
      std::ofstream os(p);
      os << "# csde spec=" << m.spec_hash << " seed=" << m.seed << "\nstage,op,status,check_passed\n";
      for (const auto& s : m.stages) os << s.id << ',' << s.op << ',' << s.status << ',' << s.check_passed << '\n';
      written.push_back(p);
    }
    for (const auto& name : kTables) {
      std::ofstream os;
      bool header_done = false;
      for (const auto& s : m.stages) {
        const auto src = find_output(m, s, name);
        if (!src) continue;
        const auto t = read_csv_table(*src);
        if (t.empty()) continue;
        if (!header_done) {
          const fs::path p = out_dir / name;
          os.open(p);
          os << "# csde spec=" << m.spec_hash << " seed=" << m.seed << "\nstage";
          for (const auto& c : t[0]) os << ',' << c;
          os << '\n';
          written.push_back(p);
          header_done = true;
        }
        for (std::size_t i = 1; i < t.size(); ++i) {
          os << s.id;
          for (const auto& c : t[i]) os << ',' << c;
          os << '\n';
        }
      }
    }
    return written;
  }

  // plots
  PlotSpec osc{"oscillation decay", "r", "osc u on Q_r", true, true, {}};
  PlotSpec blow{"trap entry fraction vs lambda", "lambda", "hit fraction", false, false, {}};
  std::vector<std::string> drow, dcol;
  std::map<std::pair<std::string, std::string>, double> zs;
  for (const auto& s : m.stages) {
    if (auto p = find_output(m, s, "osc.csv")) {
      const auto t = read_csv_table(*p);
      PlotSeries ser{s.id, {}, {}, {}, {}};
      const auto cr = column(t, "r"), co = column(t, "osc");
      for (std::size_t i = 1; i < t.size(); ++i) {
        ser.x.push_back(to_num(t[i][cr]));
        ser.y.push_back(to_num(t[i][co]));
      }
      osc.series.push_back(ser);
    }
    if (auto p = find_output(m, s, "blowup.csv")) {
      const auto t = read_csv_table(*p);
      PlotSeries ser{s.id, {}, {}, {}, {}};
      const auto cl = column(t, "lambda"), ce = column(t, "estimate"), lo = column(t, "ci_lo"), hi = column(t, "ci_hi");
      for (std::size_t i = 1; i < t.size(); ++i) {
        ser.x.push_back(to_num(t[i][cl]));
        ser.y.push_back(to_num(t[i][ce]));
        ser.lo.push_back(to_num(t[i][lo]));
        ser.hi.push_back(to_num(t[i][hi]));
      }
      blow.series.push_back(ser);
    }
    if (auto p = find_output(m, s, "duality.csv")) {
      const auto t = read_csv_table(*p);
      const auto cd = column(t, "drift"), cf = column(t, "forcing"), cz = column(t, "z");
      for (std::size_t i = 1; i < t.size(); ++i) {
        const std::string r = s.id + ":" + t[i][cd];
        if (std::find(drow.begin(), drow.end(), r) == drow.end()) drow.push_back(r);
        if (std::find(dcol.begin(), dcol.end(), t[i][cf]) == dcol.end()) dcol.push_back(t[i][cf]);
        zs[{r, t[i][cf]}] = to_num(t[i][cz]);
      }
    }
  }
  if (!osc.series.empty()) {
    const fs::path p = out_dir / "oscillation.svg";
    write_text(p, render_svg(osc));
    written.push_back(p);
  }
  if (!blow.series.empty()) {
    const fs::path p = out_dir / "blowup.svg";
    write_text(p, render_svg(blow));
    written.push_back(p);
  }
  if (!drow.empty()) {
    std::vector<std::vector<double>> vals(drow.size(), std::vector<double>(dcol.size(), NAN));
    for (std::size_t i = 0; i < drow.size(); ++i)
      for (std::size_t j = 0; j < dcol.size(); ++j) {
        auto it = zs.find({drow[i], dcol[j]});
        if (it != zs.end()) vals[i][j] = it->second;
      }
    const fs::path p = out_dir / "duality_z.svg";
    write_text(p, render_heat_table("duality z-scores", drow, dcol, vals, 3.0));
    written.push_back(p);
  }
  return written;
}

}  // namespace csde::cli
