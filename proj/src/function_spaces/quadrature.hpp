#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "csde/grid.hpp"

namespace csde::detail {

struct NodeWeight {
  std::size_t node;
  double w;
};

// Trapezoid weight of a spatial node (product of per-axis end halving).
double trapezoid_weight(const Grid& g, std::size_t node);

// Nodes inside the region's ball (all nodes if none) with positive weight.
std::vector<NodeWeight> spatial_nodes(const Grid& g, const Region& region);

struct TimeQuad {
  std::vector<NodeWeight> levels;  // level index, trapezoid weight
  bool spatial_only = false;       // static field with t0 == t1
  bool is_static = false;          // single level standing for a time-constant field
};

TimeQuad time_quadrature(const Grid& g, const Region& region);

// Outer time norm of per-level spatial norms.
double time_norm(const TimeQuad& tq, const std::vector<double>& s, double q, bool q_inf);

// Minimum-image displacement along an axis on periodic grids.
double axis_delta(const Grid& g, int axis, double a, double b);

// sup_v v W(>= v)^{1/p}; atoms are (value >= 0, weight). Sorts in place.
double weak_from_atoms(std::vector<std::pair<double, double>>& atoms, double p, bool p_inf,
                       std::size_t min_nodes, double min_measure = 0.0);

}  // namespace csde::detail
