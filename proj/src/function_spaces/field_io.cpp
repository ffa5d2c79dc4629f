#include "csde/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "csde/error.hpp"

namespace csde {

namespace io {

static_assert(std::endian::native == std::endian::little, "binary IO assumes a little-endian host");

void Writer::u32(std::uint32_t v) { os_.write(reinterpret_cast<const char*>(&v), sizeof v); }
void Writer::u64(std::uint64_t v) { os_.write(reinterpret_cast<const char*>(&v), sizeof v); }
void Writer::f64(double v) { os_.write(reinterpret_cast<const char*>(&v), sizeof v); }
void Writer::bytes(const std::string& s) {
  u32(std::uint32_t(s.size()));
  os_.write(s.data(), std::streamsize(s.size()));
}
void Writer::f64s(const std::vector<double>& v) {
  os_.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
}

void Reader::read(void* dst, std::size_t n) {
  is_.read(static_cast<char*>(dst), std::streamsize(n));
  if (std::size_t(is_.gcount()) != n) throw ValidationError("binary: truncated input");
}
std::uint32_t Reader::u32() {
  std::uint32_t v;
  read(&v, sizeof v);
  return v;
}
std::uint64_t Reader::u64() {
  std::uint64_t v;
  read(&v, sizeof v);
  return v;
}
double Reader::f64() {
  double v;
  read(&v, sizeof v);
  return v;
}
std::string Reader::bytes(std::size_t n) {
  std::string s(n, '\0');
  if (n) read(s.data(), n);
  return s;
}
std::vector<double> Reader::f64s(std::size_t n) {
  std::vector<double> v(n);
  if (n) read(v.data(), n * sizeof(double));
  return v;
}

void write_preamble(Writer& w, BinaryKind kind) {
  w.u32(0x45445343u);  // "CSDE" in file order
  w.u32(kBinaryVersion);
  w.u32(std::uint32_t(kind));
}

BinaryKind read_preamble(Reader& r) {
  if (r.u32() != 0x45445343u) throw ValidationError("binary: bad magic (expected CSDE)");
  const auto v = r.u32();
  if (v != kBinaryVersion) throw ValidationError("binary: unsupported version " + std::to_string(v));
  const auto k = r.u32();
  if (k > 1) throw ValidationError("binary: unknown payload kind");
  return BinaryKind(k);
}

}  // namespace io

void write_csv(const GridFunction& f, std::ostream& os, const std::string& comment) {
  const Grid& g = f.grid();
  if (!comment.empty()) os << "# " << comment << '\n';
  os << 't';
  for (int a = 0; a < g.dim; ++a) os << ",x" << a + 1;
  if (f.is_scalar()) {
    os << ",v";
  } else {
    for (std::size_t c = 0; c < f.components(); ++c) os << ",v" << c + 1;
  }
  os << '\n';
  char buf[64];
  std::vector<double> x(g.dim);
  for (std::size_t j = 0; j < g.levels(); ++j) {
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
      g.position(i, x);
      std::snprintf(buf, sizeof buf, "%.17g", g.time(j));
      os << buf;
      for (double v : x) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        os << buf;
      }
      for (std::size_t c = 0; c < f.components(); ++c) {
        std::snprintf(buf, sizeof buf, ",%.17g", f.at(j, i, c));
        os << buf;
      }
      os << '\n';
    }
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

// Sorted distinct values checked for uniform spacing.
std::vector<double> axis_values(std::vector<double> v, const char* what) {
  std::sort(v.begin(), v.end());
  std::vector<double> u;
  for (double x : v)
    if (u.empty() || std::abs(x - u.back()) > 1e-12 * std::max(1.0, std::abs(x))) u.push_back(x);
  if (u.size() >= 3) {
    const double h = (u.back() - u.front()) / double(u.size() - 1);
    for (std::size_t i = 0; i < u.size(); ++i)
      if (std::abs(u[i] - (u.front() + double(i) * h)) > 1e-9 * std::max(1.0, std::abs(h) * double(u.size())))
        throw ValidationError(std::string("csv: non-uniform ") + what + " spacing");
  }
  return u;
}

}  // namespace

GridFunction read_csv(std::istream& is) {
  std::string line;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#') break;
  const auto head = split(line);
  if (head.size() < 3 || head[0] != "t") throw ValidationError("csv: header must start with t,x1,...");
  int dim = 0;
  while (std::size_t(dim + 1) < head.size() && head[dim + 1] == "x" + std::to_string(dim + 1)) ++dim;
  const std::size_t comps = head.size() - 1 - std::size_t(dim);
  if (dim == 0 || comps == 0) throw ValidationError("csv: header needs spatial columns and values");

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (cells.size() != head.size()) throw ValidationError("csv: ragged row");
    std::vector<double> r;
    for (const auto& c : cells) r.push_back(std::stod(c));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ValidationError("csv: no samples");
  Grid g;
  g.dim = dim;
  std::vector<std::vector<double>> axes(dim + 1);
  for (int a = 0; a <= dim; ++a) {
    std::vector<double> col;
    for (const auto& r : rows) col.push_back(r[a]);
    axes[a] = axis_values(std::move(col), a == 0 ? "time" : "space");
  }
  g.t0 = axes[0].front();
  g.t1 = axes[0].back();
  g.nt = axes[0].size() - 1;
  for (int a = 0; a < dim; ++a) {
    if (axes[a + 1].size() < 2) throw ValidationError("csv: each axis needs at least 2 nodes");
    g.lo.push_back(axes[a + 1].front());
    g.hi.push_back(axes[a + 1].back());
    g.nx.push_back(axes[a + 1].size());
  }
  g.validate();
  if (rows.size() != g.node_count()) throw ValidationError("csv: row count does not match the inferred grid");
  GridFunction f(g, comps);
  const auto strides = g.strides();
  for (const auto& r : rows) {
    std::size_t level = g.nt == 0 ? 0 : std::size_t(std::llround((r[0] - g.t0) / g.dt()));
    std::size_t node = 0;
    for (int a = 0; a < dim; ++a) node += std::size_t(std::llround((r[a + 1] - g.lo[a]) / g.h(a))) * strides[a];
    for (std::size_t c = 0; c < comps; ++c) f.at(level, node, c) = r[1 + dim + c];
  }
  return f;
}

void write_binary(const GridFunction& f, std::ostream& os, const std::string& metadata) {
  const Grid& g = f.grid();
  io::Writer w(os);
  io::write_preamble(w, BinaryKind::field);
  w.u32(std::uint32_t(g.dim));
  w.u32(std::uint32_t(f.components()));
  w.u32(g.boundary == Boundary::periodic ? 1u : 0u);
  w.u64(g.nt);
  w.f64(g.t0);
  w.f64(g.t1);
  for (int a = 0; a < g.dim; ++a) {
    w.f64(g.lo[a]);
    w.f64(g.hi[a]);
    w.u64(g.nx[a]);
  }
  w.bytes(metadata);
  w.u64(f.values().size());
  os.write(reinterpret_cast<const char*>(f.values().data()), std::streamsize(f.values().size() * sizeof(double)));
}

LoadedField read_binary(std::istream& is) {
  io::Reader r(is);
  if (io::read_preamble(r) != BinaryKind::field) throw ValidationError("binary: payload is not a grid field");
  Grid g;
  g.dim = int(r.u32());
  const std::size_t comps = r.u32();
  g.boundary = r.u32() ? Boundary::periodic : Boundary::dirichlet;
  g.nt = r.u64();
  g.t0 = r.f64();
  g.t1 = r.f64();
  if (g.dim < 1 || g.dim > 6) throw ValidationError("binary: bad dimension");
  for (int a = 0; a < g.dim; ++a) {
    g.lo.push_back(r.f64());
    g.hi.push_back(r.f64());
    g.nx.push_back(r.u64());
  }
  g.validate();
  LoadedField out;
  out.metadata = r.bytes(r.u32());
  const auto n = r.u64();
  if (n != g.node_count() * comps) throw ValidationError("binary: sample count does not match header");
  out.field = GridFunction(g, comps, r.f64s(n));
  return out;
}

void save_field(const std::filesystem::path& path, const GridFunction& f, const std::string& metadata) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot open " + path.string() + " for writing");
  if (path.extension() == ".csv") write_csv(f, os, metadata);
  else write_binary(f, os, metadata);
}

LoadedField load_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open " + path.string());
  if (path.extension() == ".csv") return LoadedField{read_csv(is), "{}"};
  return read_binary(is);
}

}  // namespace csde
