#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "csde/grid.hpp"
#include "csde/norms.hpp"
#include "csde/pde.hpp"

namespace csde::degiorgi {

// (u - k)^+ nodewise
GridFunction level_truncate(const GridFunction& u, double k);

// Space-time measure of {u > k} inside the region: trapezoid weights in time,
// node count times cell volume in space. Static fields use the spatial measure.
double level_set_measure(const GridFunction& u, double k, const Region& region = {});

// Central-difference divergence of a vector field per time level.
GridFunction fd_divergence_field(const GridFunction& b);

// p* with 1/p + 2/p* = 1; infinity maps to 2.
Exponent star(const Exponent& p);
ExponentPair star(const ExponentPair& e);

// The lab frame is (-4, 0) x [-2, 2]^d, which contains Q_2 = (-4, 0) x B_2.
Grid lab_grid(int dim, std::size_t nx = 33, std::size_t nt = 64);

struct LabFields {
  GridFunction u, b, f;
  Cylinder source;  // physical Q_r(t, x) mapped onto the lab Q_1
};

// v(s, y) = u(t + r^2 s, x + r y), b -> r b, f -> r^2 f. The physical
// Q_{2r}(t, x) must lie inside the source grid.
LabFields to_lab_frame(const GridFunction& u, const GridFunction& b, const GridFunction& f, const Cylinder& q,
                       const Grid& lab);

// Subsolution certificate of a solver output against the solver's own step.
struct Certification {
  double max_residual = 0.0;
  double scale = 0.0;
  double tol = 0.0;
  bool ok = false;
};
Certification certify_subsolution(const pde::PdeSolution& sol, double rel_tol = 1e-6);
// Throws ValidationError when the certificate fails.
void require_subsolution(const pde::PdeSolution& sol, double rel_tol = 1e-6);

struct EnergyParams {
  double k = 0.0;
  double rho = 0.5, R = 1.0;
  double s = -1.0, t = 0.0;  // snapped to the nearest time levels
  std::vector<double> center;  // empty: origin
  ExponentPair e2{Exponent(4.0), Exponent(4.0)};  // drift pair (p2, q2)
  ExponentPair e3{Exponent(4.0), Exponent(4.0)};  // forcing pair (p3, q3)
  double C = 1e3;
};

struct EnergyReport {
  double k = 0.0, rho = 0.0, R = 0.0, s = 0.0, t = 0.0;
  // lhs = mass_t - mass_s + gradient
  double mass_t = 0.0, mass_s = 0.0, gradient = 0.0, lhs = 0.0;
  // rhs = l2_term + drift_term + forcing_u_term + forcing_term
  double l2_term = 0.0;         // C/(R-rho)^2 ||u_k||^2_{L^2(A)}
  double drift_term = 0.0;      // C/(R-rho)^2 ||u_k||^2_{L^{p2*}_{q2*}(A)}
  double forcing_u_term = 0.0;  // C/(R-rho)^2 ||u_k||^2_{L^{p3*}_{q3*}(A)}
  double forcing_term = 0.0;    // C ||f||^2_{L^{p3}_{q3}(Q)} ||1_A||^2_{L^{p3*}_{q3*}}
  double rhs = 0.0;
  double b_norm = 0.0;    // ||b||_{L^{p2}_{q2}(Q)}
  double div_norm = 0.0;  // ||div b||_{L^{p2}_{q2}(Q)}, finite differences
  double observed_C = 0.0;  // smallest C for which the inequality holds
  bool holds = false;
};

// Energy inequality on Q = [s, t] x B_R(center) with a radial cutoff that is
// 1 on B_rho, 0 outside B_R and |grad eta| <= 2/(R - rho). The field is
// taken as given: certify solver outputs with the PdeSolution overload.
EnergyReport energy_inequality_report(const GridFunction& u, const GridFunction& b, const GridFunction& f,
                                      const EnergyParams& params);
EnergyReport energy_inequality_report(const pde::PdeSolution& sol, const EnergyParams& params);

struct LevelIterationRecord {
  std::size_t k = 0;
  double M_k = 0.0;
  double U_k = 0.0;
  double E_k = 0.0;
  double measure = 0.0;  // |{u_k > 0} cap Q'_k|
  double t_k = 0.0, radius_k = 0.0;
};

struct LocalMaxParams {
  ExponentPair e2{Exponent(4.0), Exponent(4.0)};
  ExponentPair e3{Exponent(4.0), Exponent(4.0)};
  double C_U = 2.0;
  std::optional<double> M0;  // overrides the recipe
  std::size_t max_levels = 40;
  double tol = 1e-12;
};

struct LocalMaxResult {
  double M = 0.0;
  double epsilon = 0.0;
  double forcing_norm = 0.0;  // ||f||_{L^{p3}_{q3}(Q_1)}
  double energy = 0.0;        // ||u^+||_{L^2_2(Q_1)} + sum_i ||u^+||_{L^{pi*}_{qi*}(Q_1)}
  double b_norm = 0.0;
  std::vector<LevelIterationRecord> records;
  bool converged = false;
  std::size_t levels_used = 0;
  double sup_half = 0.0;  // ||u^+||_{L^inf(Q_{1/2})} on the grid
  bool grid_check = false;  // sup_half <= 2M
};

// Level iteration on Q_1 = (-1, 0) x B_1 in lab coordinates.
LocalMaxResult local_max_iterate(const GridFunction& u, const GridFunction& b, const GridFunction& f,
                                 const LocalMaxParams& params = {});

// min over the two pairs of (d/p* + 2/q* - d/2) / (d + 2)
double interpolation_epsilon(int d, const ExponentPair& e2, const ExponentPair& e3);

struct MeasureParams {
  double delta = 0.01;
  double beta = 1e-4;
  ExponentPair e3{Exponent(4.0), Exponent(4.0)};
};

struct MeasureReport {
  double a = 0.0, b = 0.0, d = 0.0;
  double forcing_norm = 0.0;  // ||f||_{L^{p3}_{q3}(Q_2)}
  double clipped_max = 0.0;   // max u before clipping at 1
  std::size_t clipped_nodes = 0;
  bool premise = false;       // a >= delta and b >= delta
  bool implication = false;   // premise implies d >= beta
  double beta = 0.0;
};

// A = {u >= 1/2} cap Q_1, B = {u <= 0} cap Q'_1, D = {0 < u < 1/2} cap (Q_1 cup Q'_1)
// with Q'_1 = (-2, -1) x B_1.
MeasureReport measure_lemma_check(const GridFunction& u, const GridFunction& b, const GridFunction& f,
                                  const MeasureParams& params = {});

struct DecreaseResult {
  std::vector<double> y;
  double threshold = 0.0;  // N^{-1/eps} C^{-1/eps^2}
  bool converged = false;  // last y < 1e-14
  bool diverged = false;   // overflow or sustained increase
  std::size_t steps = 0;
};

double decrease_threshold(double N, double C, double eps);

// Iterates y_{j+1} = N C^j y_j^{1+eps} for at most jmax steps. Seeds within
// rounding of the threshold are iterated as the threshold itself. Stops early
// once the outcome is settled.
DecreaseResult decrease_lemma(double y0, double N, double C, double eps, std::size_t jmax);

}  // namespace csde::degiorgi
