#pragma once

#include <memory>
#include <vector>

#include "banded.hpp"
#include "csde/pde.hpp"

namespace csde::pde::detail {

// One-step map of the splitting scheme in solver time (backward problems run
// forward in reversed time).
class Stepper {
 public:
  Stepper(const Grid& grid, const SchemeOptions& scheme, const GridFunction& drift, const GridFunction& forcing,
          bool reversed, std::size_t substeps);

  // u at solver level j -> solver level j + 1
  void advance(std::vector<double>& u, std::size_t j);
  double max_residual() const { return max_residual_; }
  std::size_t substeps() const { return substeps_; }
  double tau() const { return tau_; }
  // zero on Dirichlet faces, copy duplicated periodic nodes
  void enforce_boundary(std::vector<double>& u) const;

 private:
  double physical_time(double s) const { return reversed_ ? grid_.t0 + grid_.t1 - s : s; }
  void load_fields(double s);
  // out = b . grad u + f at active nodes
  void explicit_rhs(const std::vector<double>& u, std::vector<double>& out, bool with_forcing);
  void advect(std::vector<double>& u, double s, double sigma);
  void diffuse(std::vector<double>& u, double tau);

  Grid grid_;
  SchemeOptions scheme_;
  const GridFunction& drift_;
  const GridFunction& forcing_;
  bool reversed_;
  std::size_t substeps_;
  double tau_;
  bool periodic_;
  bool zero_drift_, zero_forcing_;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> strides_;
  std::vector<double> b_, f_;  // fields at the current stage time
  double loaded_time_ = -1e300;
  std::vector<double> k1_, k2_, k3_, stage_;
  std::vector<std::unique_ptr<LineOperator>> implicit_;  // per axis
  double max_residual_ = 0.0;
};

}  // namespace csde::pde::detail
