#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "csde/drift.hpp"
#include "csde/grid.hpp"
#include "csde/norms.hpp"
#include "json.hpp"

namespace csde::pde {

// forward:  d_t u = Lap u + b.grad u + f, u(t0) = initial (default 0)
// backward: d_t u + Lap u + b.grad u + f = 0, u(t1) = initial (default 0)
enum class Direction { forward, backward };
enum class DiffusionScheme { implicit_euler, crank_nicolson };
enum class AdvectionScheme { upwind, central };

struct SchemeOptions {
  DiffusionScheme diffusion = DiffusionScheme::implicit_euler;
  AdvectionScheme advection = AdvectionScheme::upwind;
  int order = 2;              // spatial order of the central stencils: 2 or 4
  std::size_t substeps = 0;   // per grid interval; 0 picks the fewest meeting the CFL guard
  double cfl = 0.5;           // tau <= cfl * h_min / max|b|
  double residual_tol = 1e-8; // relative residual of every line solve

  // Lie splitting, explicit upwind advection, implicit Euler diffusion:
  // monotone, discrete maximum principle.
  static SchemeOptions monotone() { return {}; }
  // Strang splitting, SSP-RK3 central advection, Crank-Nicolson diffusion,
  // fourth-order stencils: not monotone, high accuracy for smooth data.
  static SchemeOptions accurate() {
    return {DiffusionScheme::crank_nicolson, AdvectionScheme::central, 4, 0, 0.5, 1e-8};
  }
  std::string id() const;
};

using DriftInput = std::variant<drift::ApproxDrift, GridFunction>;

struct PdeProblem {
  Grid grid;  // time levels of the output
  DriftInput drift;
  GridFunction forcing;  // scalar; static or on the grid's levels
  std::optional<GridFunction> initial;
  Direction direction = Direction::forward;
  SchemeOptions scheme;
};

struct PdeSolution {
  GridFunction u;
  GridFunction drift;    // samples used by the solver
  GridFunction forcing;
  Direction direction = Direction::forward;
  SchemeOptions scheme;
  std::size_t substeps = 1;
  double dt_internal = 0.0;
  double residual_norm = 0.0;

  nlohmann::json metadata() const;
};

PdeSolution solve(const PdeProblem& problem);

// Residual of a field against the solver's own one-step map:
// max_j max_nodes (u_{j+1} - Step(u_j)) / dt in solver time. Nonpositive up
// to rounding for the solver's own output.
struct StepCertificate {
  double max_residual = 0.0;
  double scale = 0.0;
};
StepCertificate step_residual(const PdeSolution& sol, const GridFunction& u);

struct GlobalMaxReport {
  double sup = 0.0;         // ||u||_inf
  double energy_sup = 0.0;  // localized ||u||_{L^2_inf}
  double energy_grad = 0.0; // localized ||grad u||_{L^2_2}
  double lhs = 0.0;
  double rhs_norm = 0.0;    // localized ||f||_{L^p_q}
  double ratio = 0.0;
};

struct GlobalMaxOptions {
  std::vector<std::vector<double>> centers;  // empty: lattice over the box
  double spacing = 0.5;
};

GlobalMaxReport global_max_check(const PdeSolution& sol, const GridFunction& f, const ExponentPair& e,
                                 const GlobalMaxOptions& opts = {});

struct OscRow {
  double r = 0.0;
  double osc = 0.0;
  double forcing_term = 0.0;
};

struct OscillationReport {
  std::vector<OscRow> rows;
  std::vector<double> decay_ratios;  // (osc_{r/4} - F_r) / osc_r
  double mu_hat = 0.0;
};

struct OscillationOptions {
  double forcing_constant = 1.0;  // C_f
  ExponentPair forcing_exponents{Exponent(4.0), Exponent(4.0)};
};

// Oscillation over nested cylinders Q_r(t, x). Errors if a cylinder leaves the grid.
OscillationReport oscillation_decay(const PdeSolution& sol, double t, std::span<const double> x,
                                    const std::vector<double>& radii, const OscillationOptions& opts = {});
double cylinder_oscillation(const GridFunction& u, const Cylinder& q);

struct HolderFit {
  std::vector<double> center;  // (t, x...)
  double slope = 0.0;
  double residual = 0.0;  // rms of log-osc residuals
  std::size_t points = 0;
};

struct HolderEstimate {
  double alpha_hat = 0.0;  // median slope capped at 1
  double raw_median = 0.0;
  double max_residual = 0.0;
  std::vector<HolderFit> fits;
};

// centers: (t, x1..xd). radii empty: dyadic from the largest fitting radius
// down to twice the grid spacing.
HolderEstimate holder_exponent_estimate(const GridFunction& u, const std::vector<std::vector<double>>& centers,
                                        std::vector<double> radii = {});
HolderEstimate holder_exponent_estimate(const PdeSolution& sol, const std::vector<std::vector<double>>& centers,
                                        std::vector<double> radii = {});

// u(t0, x) of a backward solution by multilinear interpolation.
double duality_value(const PdeSolution& backward, std::span<const double> x);

const char* to_string(Direction d);

}  // namespace csde::pde
