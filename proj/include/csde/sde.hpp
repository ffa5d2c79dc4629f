#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "csde/drift.hpp"
#include "csde/grid.hpp"
#include "csde/norms.hpp"
#include "csde/pde.hpp"
#include "json.hpp"

namespace csde::sde {

// Philox4x32-10 counter-based generator.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

// Standard normals for one path: block b of path p under seed s is
// philox(counter = (p, b), key = s), two normals per block.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t path);
  double next();
  void fill(std::span<double> out);

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t path_;
  std::uint64_t block_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Uniform in (0, 1) from 64 random bits, 53-bit resolution.
double to_unit(std::uint32_t hi, std::uint32_t lo);

// dX = b_n(t, X) dt + sqrt(2) dW on [t0, t0 + T].
struct SimConfig {
  drift::ApproxDrift drift;
  std::vector<double> x0;
  double t0 = 0.0;
  double T = 1.0;
  double dt = 1e-3;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 1;
  std::size_t save_every = 0;  // snapshot stride in steps; 0 keeps the endpoints only
  std::vector<Ball> traps;     // first entry times recorded per trap
  std::vector<GridFunction> integrands;  // int f(t, X_t) dt accumulated along paths
  std::size_t threads = 0;     // 0: hardware concurrency
  bool enforce_coupling = true;  // dt <= 1/(8 n^2) for mollified drifts

  void validate() const;
  std::size_t steps() const;
};

struct PathEnsemble {
  int dim = 0;
  std::size_t n_paths = 0;
  double t0 = 0.0, T = 0.0, dt = 0.0;
  std::uint64_t seed = 0;
  std::size_t save_every = 0;
  nlohmann::json drift;
  std::vector<double> times;   // snapshot times
  std::vector<double> states;  // [path][snapshot][axis]
  std::vector<double> hit_times;  // [path][trap], NaN when not hit
  std::size_t n_traps = 0;
  std::vector<double> integrals;  // [integrand][path]
  std::size_t n_integrands = 0;
  std::vector<GridFunction> integrands;
  std::vector<std::uint8_t> frozen;  // non-finite state reached
  double max_step = 0.0;  // largest single-step displacement

  std::size_t snapshots() const { return times.size(); }
  std::span<const double> state(std::size_t path, std::size_t snap) const;
  std::span<const double> integral(std::size_t k) const;
  nlohmann::json metadata() const;
};

PathEnsemble simulate(const SimConfig& cfg);

void write_ensemble(const PathEnsemble& e, std::ostream& os);
PathEnsemble read_ensemble(std::istream& is);
void save_ensemble(const std::filesystem::path& path, const PathEnsemble& e);
PathEnsemble load_ensemble(const std::filesystem::path& path);

// Ensemble mean and standard error with pairwise summation.
struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
};
MeanSE mean_se(std::span<const double> v);

struct KrylovEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::string f_id;
  ExponentPair exponents;
  double rhs_norm = 0.0;  // localized ||f||_{L^p_q}
  double ratio = 0.0;     // value / rhs_norm
};

struct KrylovOptions {
  std::vector<std::vector<double>> centers;  // empty: lattice over supp f
  double spacing = 0.5;
  std::string f_id;
};

// E int f(t, X_t) dt by the trapezoid rule on the simulation steps. f must be
// one of the ensemble's integrands, or the ensemble must keep every step.
KrylovEstimate krylov_estimate(const PathEnsemble& ens, const GridFunction& f, const ExponentPair& e,
                               const KrylovOptions& opts = {});

struct DualityResult {
  double mc = 0.0;
  double se = 0.0;
  double pde_value = 0.0;
  double z_score = 0.0;
  bool pass = false;
};

// Compares E int f along paths with u(t0, x0) of a backward solve. The MC
// side integrates f_mc, which may be a finer sample of the same forcing.
DualityResult duality_test(const SimConfig& cfg, const GridFunction& f_mc, const pde::PdeSolution& backward);
// Same comparison from an ensemble that already integrated f_mc.
DualityResult duality_compare(const PathEnsemble& ens, std::size_t integrand, const pde::PdeSolution& backward,
                              std::span<const double> x0);

// Mean over paths of (sup_t max_{0 < u <= delta} |X_{t+u} - X_t|)^{1/2}.
double modulus_statistic(const PathEnsemble& ens, double delta);

struct ModulusFit {
  std::vector<double> deltas, values;
  double exponent = 0.0;
  double residual = 0.0;
};
ModulusFit modulus_fit(const PathEnsemble& ens, const std::vector<double>& deltas);

struct WilsonInterval {
  double lo = 0.0, hi = 0.0;
};
WilsonInterval wilson_interval(std::size_t hits, std::size_t n, double z = 1.959963984540054);

struct BlowupConfig {
  std::vector<double> lambdas;
  int dim = 3;
  double trap_radius = 0.1;
  double start_distance = 1.0;
  double T = 1.0;                   // infinity: run until hit or escape
  double escape_radius = 1000.0;    // paths reaching it count as not hit
  std::optional<int> mollification; // kernel radius 1/n; required for lambda > 0
  double kappa = 0.01;              // step <= kappa (|x| - r)^2
  double trap_tolerance = 1e-3;     // entry is detected at |x| <= r (1 + tolerance)
  double dt_max = 1e300;            // cap on the adaptive step
  double dt_min = 1e-10;
  std::size_t max_steps = 2000000;  // per path; censored paths count as not hit
  std::size_t n_paths = 10000;
  std::uint64_t seed = 7;
  std::size_t threads = 0;

  void validate() const;
};

struct BlowupRow {
  double lambda = 0.0;
  std::size_t hits = 0, escaped = 0, censored = 0, n = 0;
  double hit_fraction = 0.0;
  WilsonInterval ci;
};

struct BlowupTable {
  std::vector<BlowupRow> rows;
  bool monotone = false;  // nondecreasing up to CI overlap
};

BlowupTable blowup_probe(const BlowupConfig& cfg);

}  // namespace csde::sde
