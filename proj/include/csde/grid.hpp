#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace csde {

enum class Boundary { dirichlet, periodic };

// Uniform space-time grid over a box. Time levels t0 + j*dt, j = 0..nt.
// nt == 0 marks a time-independent field living on [t0, t1]; when t1 == t0
// the field is purely spatial and mixed norms reduce to spatial norms.
// On periodic grids the last node along each axis duplicates the first.
struct Grid {
  int dim = 1;
  std::vector<double> lo, hi;
  std::vector<std::size_t> nx;
  std::size_t nt = 0;
  double t0 = 0.0, t1 = 0.0;
  Boundary boundary = Boundary::dirichlet;

  void validate() const;

  double h(int axis) const { return (hi[axis] - lo[axis]) / double(nx[axis] - 1); }
  double max_h() const;
  double min_h() const;
  double dt() const { return nt == 0 ? 0.0 : (t1 - t0) / double(nt); }
  double time(std::size_t level) const;
  double coord(int axis, std::size_t i) const { return lo[axis] + double(i) * h(axis); }

  bool is_static() const { return nt == 0; }
  std::size_t levels() const { return nt == 0 ? 1 : nt + 1; }
  std::size_t spatial_size() const;
  std::size_t node_count() const { return levels() * spatial_size(); }
  double cell_volume() const;

  // axis 0 varies fastest
  std::size_t flat(std::span<const std::size_t> idx) const;
  void unflat(std::size_t flat, std::span<std::size_t> idx) const;
  void position(std::size_t flat, std::span<double> x) const;
  std::vector<std::size_t> strides() const;

  bool contains(std::span<const double> x) const;
  bool same_space(const Grid& other) const;
  bool operator==(const Grid& other) const = default;

  Grid spatial_only() const;
  Grid with_time(std::size_t nt, double t0, double t1) const;
};

Grid box_grid(int dim, double lo, double hi, std::size_t n, Boundary b = Boundary::dirichlet);

// Samples on a Grid; scalar (components == 1) or vector (components == dim).
class GridFunction {
 public:
  using ScalarFn = std::function<double(double t, std::span<const double> x)>;
  using VectorFn = std::function<void(double t, std::span<const double> x, std::span<double> out)>;

  GridFunction() = default;
  GridFunction(Grid grid, std::size_t components = 1);
  GridFunction(Grid grid, std::size_t components, std::vector<double> values);

  static GridFunction sample(const Grid& grid, const ScalarFn& fn);
  static GridFunction sample_vector(const Grid& grid, std::size_t components, const VectorFn& fn);

  const Grid& grid() const { return grid_; }
  std::size_t components() const { return comps_; }
  bool is_scalar() const { return comps_ == 1; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  std::span<const double> level(std::size_t j) const;
  std::span<double> level(std::size_t j);

  double& at(std::size_t level, std::size_t node, std::size_t c = 0) {
    return values_[(level * grid_.spatial_size() + node) * comps_ + c];
  }
  double at(std::size_t level, std::size_t node, std::size_t c = 0) const {
    return values_[(level * grid_.spatial_size() + node) * comps_ + c];
  }

  // Static field holding level j.
  GridFunction time_slice(std::size_t j) const;
  // Euclidean magnitude per node (identity for scalars up to sign).
  GridFunction magnitude() const;
  GridFunction scaled(double c) const;

  void require_scalar(const char* op) const;
  void require_finite(const char* op) const;

 private:
  Grid grid_;
  std::size_t comps_ = 1;
  std::vector<double> values_;
};

// Spatial ball and time window restricting a norm.
struct Ball {
  std::vector<double> center;
  double radius = 0.0;
};

struct Region {
  std::optional<double> t_lo, t_hi;
  std::optional<Ball> ball;

  static Region whole() { return {}; }
  static Region in_ball(Ball b) { return Region{std::nullopt, std::nullopt, std::move(b)}; }
};

// Q_r(t, x) = (t - r^2, t) x B_r(x)
struct Cylinder {
  double t = 0.0;
  std::vector<double> x;
  double r = 1.0;

  Region region() const { return Region{t - r * r, t, Ball{x, r}}; }
};

// Multilinear interpolation in space and linear in time. Points outside the
// box give 0 on Dirichlet grids and wrap on periodic grids.
double interpolate(const GridFunction& f, double t, std::span<const double> x, std::size_t component = 0);

// Spatial interpolation at a fixed level.
double interpolate_level(const GridFunction& f, std::size_t level, std::span<const double> x,
                         std::size_t component = 0);

}  // namespace csde
