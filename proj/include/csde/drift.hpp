#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csde/grid.hpp"
#include "csde/mollifier.hpp"
#include "csde/norms.hpp"
#include "json.hpp"

namespace csde::drift {

using VectorEval = std::function<void(double t, std::span<const double> x, std::span<double> out)>;
using ScalarEval = std::function<double(double t, std::span<const double> x)>;

// Closed-form drift b(t, x) with metadata.
struct DriftField {
  int dim = 0;
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
  VectorEval eval;
  ScalarEval div_eval;            // empty when no closed form is known
  std::string singular_set = "none";
  // Distance to the singular set; empty for regular fields.
  std::function<double(std::span<const double> x)> singular_distance;
  // b(x) = radial(|x|) x for radially symmetric fields.
  std::function<double(double r)> radial;
  // b(c x) = c^k b(x) for all c > 0 when set.
  std::optional<double> homogeneity;
  bool autonomous = true;

  bool is_singular() const { return bool(singular_distance); }
  bool has_divergence() const { return bool(div_eval); }
  std::vector<double> operator()(double t, std::span<const double> x) const;
};

// -lambda x / |x|^2, singular at 0
DriftField inverse_radial(int d, double lambda);
// (l x1 x3 / (rho^2 |x|), l x2 x3 / (rho^2 |x|), -l / |x|), rho^2 = x1^2 + x2^2
DriftField swirl_drift(double lambda);
DriftField constant_drift(std::vector<double> c);
DriftField linear_drift(int d, double rate = 1.0);  // -rate * x
// s exp(-(x1^2+x2^2)/w^2) (-x2, x1, 0, ...): divergence free
DriftField gaussian_vortex(int d, double strength, double width);
// kind in {constant, linear, gaussian_vortex}
DriftField smooth_test_drift(const std::string& kind, const nlohmann::json& params);
// {"kind": ..., ...} for every catalog entry
DriftField make_drift(const nlohmann::json& spec);

// b 1{|b| <= N}
DriftField truncate_drift(const DriftField& b, double N);

// Central-difference divergence with step h.
double fd_divergence(const DriftField& b, double t, std::span<const double> x, double h);

// Samples b on the grid. Nodes within one cell of the singular set receive
// the truncated value at level N = 1/h (h the largest spacing).
GridFunction sample_drift(const DriftField& b, const Grid& g);

enum class ApproxOrder { truncate_then_mollify, mollify_then_truncate };

struct ApproxSpec {
  std::optional<int> n;     // mollification level, kernel radius 1/n
  std::optional<double> N;  // truncation level
  ApproxOrder order = ApproxOrder::truncate_then_mollify;

  static ApproxSpec none() { return {}; }
  static ApproxSpec mollified(int n) { return {n, std::nullopt, ApproxOrder::truncate_then_mollify}; }
  static ApproxSpec truncated(double N) { return {std::nullopt, N, ApproxOrder::truncate_then_mollify}; }
};

class RadialTable;
class Cubature;

// A bounded approximation of a DriftField: mollified b * rho_n, truncated
// b^N, or both in either order. Singular fields need at least one of them.
class ApproxDrift {
 public:
  ApproxDrift(DriftField base, ApproxSpec spec, const Mollifier& rho = Mollifier::standard_bump());

  const DriftField& base() const { return base_; }
  const ApproxSpec& spec() const { return spec_; }
  int dim() const { return base_.dim; }
  const std::string& mollifier_name() const { return mollifier_; }

  void eval(double t, std::span<const double> x, std::span<double> out) const;
  std::vector<double> operator()(double t, std::span<const double> x) const;
  GridFunction sample(const Grid& g) const;
  nlohmann::json describe() const;

 private:
  void mollified(double t, std::span<const double> x, std::span<double> out) const;

  DriftField base_;
  ApproxSpec spec_;
  std::string mollifier_;
  std::shared_ptr<const RadialTable> table_;
  std::shared_ptr<const Cubature> cubature_;
};

// Smallest-ladder truncation split b = b0 + b1 with b0 = b 1{|b| > N}.
struct SplitOptions {
  std::vector<double> ladder;  // empty: {0, 1, 2, 4, ..., 2^40}
  double center_spacing = 0.5;
  WeakNormOptions weak;
};

struct SplitResult {
  GridFunction b0, b1;
  double N = 0.0;
  double b0_weak = 0.0;   // localized weak-L^d norm of |b0|
  double b1_sup = 0.0;    // max |b1|
  double sampling_cap = 0.0;
};

SplitResult split_critical(const DriftField& b, double epsilon, const Grid& domain, const SplitOptions& opts = {});

}  // namespace csde::drift
