#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "csde/cli.hpp"
#include "csde/error.hpp"

namespace csde::cli {

namespace {

constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Axis {
  double lo, hi;
  bool log;
  double px0, px1;
  double map(double v) const {
    const double a = log ? std::log10(lo) : lo, b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    return px0 + (x - a) / (b - a) * (px1 - px0);
  }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0); }
};

Axis make_axis(std::vector<double> vals, bool log, double px0, double px1) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : vals)
    if (std::isfinite(v) && (!log || v > 0)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!std::isfinite(lo)) lo = log ? 0.1 : 0.0, hi = 1.0;
  if (hi <= lo) {
    if (log) lo /= 2, hi *= 2;
    else lo -= 0.5, hi += 0.5;
  } else if (!log) {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, log, px0, px1};
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> t;
  if (a.log) {
    for (double e = std::floor(std::log10(a.lo)); e <= std::ceil(std::log10(a.hi)); e += 1) {
      const double v = std::pow(10.0, e);
      if (v >= a.lo && v <= a.hi) t.push_back(v);
    }
    if (t.size() < 2) t = {a.lo, a.hi};
    return t;
  }
  for (int i = 0; i <= 4; ++i) t.push_back(a.lo + (a.hi - a.lo) * i / 4.0);
  return t;
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  std::vector<double> xs, ys;
  for (const auto& s : spec.series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
    ys.insert(ys.end(), s.lo.begin(), s.lo.end());
    ys.insert(ys.end(), s.hi.begin(), s.hi.end());
  }
  const Axis ax = make_axis(xs, spec.logx, L, W - R);
  const Axis ay = make_axis(ys, spec.logy, H - B, T);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double v : ticks(ax))
    os << "<text x=\"" << ax.map(v) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << fmt(v) << "</text>\n";
  for (double v : ticks(ay))
    os << "<text x=\"" << L - 6 << "\" y=\"" << ay.map(v) + 4 << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << escape(spec.xlabel) << "</text>\n";
  os << "<text transform=\"translate(16," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(spec.ylabel) << "</text>\n";
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const char* color = kColors[k % 6];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (ax.usable(s.x[i]) && ay.usable(s.y[i])) pts += fmt(ax.map(s.x[i])) + "," + fmt(ay.map(s.y[i])) + " ";
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      const double px = ax.map(s.x[i]);
      os << "<circle cx=\"" << px << "\" cy=\"" << ay.map(s.y[i]) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      if (i < s.lo.size() && i < s.hi.size() && ay.usable(s.lo[i]) && ay.usable(s.hi[i]))
        os << "<line x1=\"" << px << "\" x2=\"" << px << "\" y1=\"" << ay.map(s.lo[i]) << "\" y2=\"" << ay.map(s.hi[i])
           << "\" stroke=\"" << color << "\"/>\n";
    }
    os << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 + 14 * k << "\" fill=\"" << color << "\">" << escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_heat_table(const std::string& title, const std::vector<std::string>& rows,
                              const std::vector<std::string>& cols, const std::vector<std::vector<double>>& values,
                              double threshold) {
  const double cw = 110, ch = 26, lw = 140;
  const double w = lw + cw * cols.size() + 20, h = 60 + ch * (rows.size() + 1);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"10\" y=\"22\" font-size=\"14\">" << escape(title) << "</text>\n";
  for (std::size_t j = 0; j < cols.size(); ++j)
    os << "<text x=\"" << lw + cw * (j + 0.5) << "\" y=\"" << 40 + ch * 0.6 << "\" text-anchor=\"middle\">"
       << escape(cols[j]) << "</text>\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double y = 40 + ch * (i + 1);
    os << "<text x=\"10\" y=\"" << y + ch * 0.6 << "\">" << escape(rows[i]) << "</text>\n";
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double v = i < values.size() && j < values[i].size() ? values[i][j] : NAN;
      const double shade = std::isfinite(v) ? std::clamp(std::abs(v) / threshold, 0.0, 1.0) : 1.0;
      const bool flagged = !std::isfinite(v) || std::abs(v) > threshold;
      const int g = int(255 - 155 * shade);
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02x%02x", flagged ? 230 : g, flagged ? 90 : 255, flagged ? 90 : g);
      os << "<rect x=\"" << lw + cw * j << "\" y=\"" << y << "\" width=\"" << cw << "\" height=\"" << ch
         << "\" fill=\"" << fill << "\" stroke=\"#888\"/>\n";
      os << "<text x=\"" << lw + cw * (j + 0.5) << "\" y=\"" << y + ch * 0.65 << "\" text-anchor=\"middle\">"
         << (std::isfinite(v) ? fmt(v) : std::string("-")) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::vector<std::string>> read_csv_table(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open " + path.string());
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace csde::cli
