#include "csde/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "csde/error.hpp"

namespace csde {

namespace {

constexpr int kMaxDim = 6;

struct AxisStencil {
  std::size_t i0 = 0, i1 = 0;
  double w1 = 0.0;  // weight of i1; i0 gets 1 - w1
};

// Returns false when x lies off a Dirichlet box.
bool axis_stencil(const Grid& g, int a, double x, AxisStencil& s) {
  const double h = g.h(a);
  const std::size_t n = g.nx[a];
  if (g.boundary == Boundary::periodic) {
    const double len = g.hi[a] - g.lo[a];
    double y = std::fmod(x - g.lo[a], len);
    if (y < 0) y += len;
    double u = y / h;
    auto i = static_cast<std::size_t>(u);
    if (i >= n - 1) i = n - 2;
    s.i0 = i;
    s.i1 = i + 1;
    s.w1 = std::clamp(u - double(i), 0.0, 1.0);
    return true;
  }
  if (x < g.lo[a] || x > g.hi[a]) return false;
  double u = (x - g.lo[a]) / h;
  auto i = static_cast<std::size_t>(u);
  if (i >= n - 1) i = n - 2;
  s.i0 = i;
  s.i1 = i + 1;
  s.w1 = std::clamp(u - double(i), 0.0, 1.0);
  return true;
}

double spatial_interp(const GridFunction& f, std::size_t level, std::span<const double> x,
                      std::size_t comp) {
  const Grid& g = f.grid();
  std::array<AxisStencil, kMaxDim> st;
  std::size_t stride = 1;
  std::array<std::size_t, kMaxDim> strides{};
  for (int a = 0; a < g.dim; ++a) {
    if (!axis_stencil(g, a, x[a], st[a])) return 0.0;
    strides[a] = stride;
    stride *= g.nx[a];
  }
  const auto vals = f.level(level);
  const std::size_t nc = f.components();
  double acc = 0.0;
  const unsigned corners = 1u << g.dim;
  for (unsigned c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t idx = 0;
    for (int a = 0; a < g.dim; ++a) {
      if (c & (1u << a)) {
        w *= st[a].w1;
        idx += st[a].i1 * strides[a];
      } else {
        w *= 1.0 - st[a].w1;
        idx += st[a].i0 * strides[a];
      }
    }
    if (w != 0.0) acc += w * vals[idx * nc + comp];
  }
  return acc;
}

}  // namespace

void Grid::validate() const {
  require(dim >= 1 && dim <= kMaxDim, "grid: dimension must be in [1, 6]");
  require(int(lo.size()) == dim && int(hi.size()) == dim && int(nx.size()) == dim,
          "grid: lo/hi/nx must have one entry per axis");
  for (int a = 0; a < dim; ++a) {
    require(std::isfinite(lo[a]) && std::isfinite(hi[a]) && lo[a] < hi[a],
            "grid: box_lo < box_hi required on every axis");
    require(nx[a] >= 2, "grid: at least 2 nodes per axis");
  }
  require(std::isfinite(t0) && std::isfinite(t1), "grid: non-finite time bounds");
  if (nt > 0) {
    require(t0 < t1, "grid: t0 < t1 required when nt >= 1");
  } else {
    require(t0 <= t1, "grid: t0 <= t1 required");
  }
}

double Grid::max_h() const {
  double m = 0.0;
  for (int a = 0; a < dim; ++a) m = std::max(m, h(a));
  return m;
}

double Grid::min_h() const {
  double m = h(0);
  for (int a = 1; a < dim; ++a) m = std::min(m, h(a));
  return m;
}

double Grid::time(std::size_t level) const {
  if (nt == 0) return t0;
  if (level == nt) return t1;
  return t0 + double(level) * dt();
}

std::size_t Grid::spatial_size() const {
  std::size_t n = 1;
  for (auto v : nx) n *= v;
  return n;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= h(a);
  return v;
}

std::size_t Grid::flat(std::span<const std::size_t> idx) const {
  std::size_t f = 0, s = 1;
  for (int a = 0; a < dim; ++a) {
    f += idx[a] * s;
    s *= nx[a];
  }
  return f;
}

void Grid::unflat(std::size_t f, std::span<std::size_t> idx) const {
  for (int a = 0; a < dim; ++a) {
    idx[a] = f % nx[a];
    f /= nx[a];
  }
}

void Grid::position(std::size_t f, std::span<double> x) const {
  for (int a = 0; a < dim; ++a) {
    x[a] = coord(a, f % nx[a]);
    f /= nx[a];
  }
}

std::vector<std::size_t> Grid::strides() const {
  std::vector<std::size_t> s(dim);
  std::size_t acc = 1;
  for (int a = 0; a < dim; ++a) {
    s[a] = acc;
    acc *= nx[a];
  }
  return s;
}

bool Grid::contains(std::span<const double> x) const {
  for (int a = 0; a < dim; ++a)
    if (x[a] < lo[a] || x[a] > hi[a]) return false;
  return true;
}

bool Grid::same_space(const Grid& o) const {
  return dim == o.dim && lo == o.lo && hi == o.hi && nx == o.nx && boundary == o.boundary;
}

Grid Grid::spatial_only() const {
  Grid g = *this;
  g.nt = 0;
  g.t1 = g.t0;
  return g;
}

Grid Grid::with_time(std::size_t n, double a, double b) const {
  Grid g = *this;
  g.nt = n;
  g.t0 = a;
  g.t1 = b;
  g.validate();
  return g;
}

Grid box_grid(int dim, double lo, double hi, std::size_t n, Boundary b) {
  Grid g;
  g.dim = dim;
  g.lo.assign(dim, lo);
  g.hi.assign(dim, hi);
  g.nx.assign(dim, n);
  g.boundary = b;
  g.validate();
  return g;
}

GridFunction::GridFunction(Grid grid, std::size_t components) : grid_(std::move(grid)), comps_(components) {
  grid_.validate();
  require(comps_ >= 1, "grid function: at least one component");
  values_.assign(grid_.node_count() * comps_, 0.0);
}

GridFunction::GridFunction(Grid grid, std::size_t components, std::vector<double> values)
    : grid_(std::move(grid)), comps_(components), values_(std::move(values)) {
  grid_.validate();
  require(comps_ >= 1, "grid function: at least one component");
  if (values_.size() != grid_.node_count() * comps_) {
    std::ostringstream os;
    os << "grid function: expected " << grid_.node_count() * comps_ << " samples, got " << values_.size();
    throw ValidationError(os.str());
  }
}

GridFunction GridFunction::sample(const Grid& grid, const ScalarFn& fn) {
  GridFunction out(grid, 1);
  std::vector<double> x(grid.dim);
  const std::size_t ns = grid.spatial_size();
  for (std::size_t j = 0; j < grid.levels(); ++j) {
    const double t = grid.time(j);
    for (std::size_t i = 0; i < ns; ++i) {
      grid.position(i, x);
      out.at(j, i) = fn(t, x);
    }
  }
  return out;
}

GridFunction GridFunction::sample_vector(const Grid& grid, std::size_t components, const VectorFn& fn) {
  GridFunction out(grid, components);
  std::vector<double> x(grid.dim), v(components);
  const std::size_t ns = grid.spatial_size();
  for (std::size_t j = 0; j < grid.levels(); ++j) {
    const double t = grid.time(j);
    for (std::size_t i = 0; i < ns; ++i) {
      grid.position(i, x);
      fn(t, x, v);
      for (std::size_t c = 0; c < components; ++c) out.at(j, i, c) = v[c];
    }
  }
  return out;
}

std::span<const double> GridFunction::level(std::size_t j) const {
  const std::size_t n = grid_.spatial_size() * comps_;
  return std::span<const double>(values_).subspan(j * n, n);
}

std::span<double> GridFunction::level(std::size_t j) {
  const std::size_t n = grid_.spatial_size() * comps_;
  return std::span<double>(values_).subspan(j * n, n);
}

GridFunction GridFunction::time_slice(std::size_t j) const {
  require(j < grid_.levels(), "time_slice: level out of range");
  Grid g = grid_;
  g.nt = 0;
  g.t0 = g.t1 = grid_.time(j);
  auto lv = level(j);
  return GridFunction(g, comps_, std::vector<double>(lv.begin(), lv.end()));
}

GridFunction GridFunction::magnitude() const {
  GridFunction out(grid_, 1);
  const std::size_t n = grid_.node_count();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < comps_; ++c) s += values_[i * comps_ + c] * values_[i * comps_ + c];
    out.values_[i] = std::sqrt(s);
  }
  return out;
}

GridFunction GridFunction::scaled(double c) const {
  GridFunction out = *this;
  for (auto& v : out.values_) v *= c;
  return out;
}

void GridFunction::require_scalar(const char* op) const {
  if (comps_ != 1) throw ValidationError(std::string(op) + ": scalar field required");
}

void GridFunction::require_finite(const char* op) const {
  for (double v : values_)
    if (!std::isfinite(v)) throw NumericalError(std::string(op) + ": non-finite sample");
}

double interpolate_level(const GridFunction& f, std::size_t level, std::span<const double> x,
                         std::size_t component) {
  return spatial_interp(f, level, x, component);
}

double interpolate(const GridFunction& f, double t, std::span<const double> x, std::size_t component) {
  const Grid& g = f.grid();
  if (g.nt == 0) return spatial_interp(f, 0, x, component);
  double s = (t - g.t0) / g.dt();
  s = std::clamp(s, 0.0, double(g.nt));
  auto j = static_cast<std::size_t>(s);
  if (j >= g.nt) j = g.nt - 1;
  const double w = s - double(j);
  const double a = spatial_interp(f, j, x, component);
  if (w == 0.0) return a;
  const double b = spatial_interp(f, j + 1, x, component);
  return (1.0 - w) * a + w * b;
}

}  // namespace csde
