#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "approx_internal.hpp"
#include "csde/error.hpp"

namespace csde::drift {

namespace {

// Tables are expensive to build and immutable; share them across instances.
std::shared_ptr<const RadialTable> cached_table(const std::string& key, const std::function<double(double)>& phi, int d,
                                                int m, const Mollifier& rho) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const RadialTable>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto t = std::make_shared<const RadialTable>(phi, d, m, rho);
  cache.emplace(key, t);
  return t;
}

void truncate_inplace(std::span<double> v, double N) {
  double s = 0.0;
  for (double c : v) s += c * c;
  if (!(std::sqrt(s) <= N))
    for (double& c : v) c = 0.0;
}

}  // namespace

ApproxDrift::ApproxDrift(DriftField base, ApproxSpec spec, const Mollifier& rho)
    : base_(std::move(base)), spec_(spec), mollifier_(rho.name()) {
  require(base_.dim >= 1 && bool(base_.eval), "approx drift: base field is empty");
  if (spec_.n) require(*spec_.n >= 1, "approx drift: mollification level n must be >= 1");
  if (spec_.N) require(*spec_.N > 0, "approx drift: truncation level N must be positive");
  if (base_.is_singular() && !spec_.n && !spec_.N)
    throw ValidationError("approx drift: singular field '" + base_.kind + "' needs mollification or truncation");
  if (!spec_.n) return;

  const bool truncate_first = spec_.N && spec_.order == ApproxOrder::truncate_then_mollify;
  DriftField src = truncate_first ? truncate_drift(base_, *spec_.N) : base_;
  if (src.radial && src.autonomous && base_.dim >= 2) {
    const bool reuse = src.homogeneity.has_value();
    const int m = reuse ? 1 : *spec_.n;
    std::ostringstream key;
    key << src.kind << '|' << src.params.dump() << '|' << base_.dim << '|' << m << '|' << rho.name();
    table_ = cached_table(key.str(), src.radial, base_.dim, m, rho);
  } else {
    cubature_ = std::make_shared<const Cubature>(base_.dim, rho);
  }
}

void ApproxDrift::mollified(double t, std::span<const double> x, std::span<double> out) const {
  const int d = base_.dim;
  const int n = *spec_.n;
  const bool truncate_first = spec_.N && spec_.order == ApproxOrder::truncate_then_mollify;
  if (table_) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
    const double r = std::sqrt(r2);
    if (r == 0.0) {
      for (int a = 0; a < d; ++a) out[a] = 0.0;
      return;
    }
    double G;
    const double R = double(n) * r;
    if (R > RadialTable::kTableMax) {
      // far from the kernel scale the mollified field agrees with b itself
      double phi = base_.radial(r);
      if (truncate_first && !(std::abs(phi) * r <= *spec_.N)) phi = 0.0;
      G = phi * r;
    } else if (table_->level() == 1 && n != 1) {
      // homogeneous of degree k: b_n(x) = n^{-k} b_1(n x)
      G = std::pow(double(n), -*base_.homogeneity) * (*table_)(R);
    } else {
      G = (*table_)(R);
    }
    for (int a = 0; a < d; ++a) out[a] = G * x[a] / r;
    return;
  }
  std::vector<double> y(d), v(d), acc(d, 0.0);
  double wsum = 0.0;
  const auto& z = cubature_->nodes();
  const auto& w = cubature_->weights();
  for (std::size_t k = 0; k < z.size(); ++k) {
    for (int a = 0; a < d; ++a) y[a] = x[a] - z[k][a] / n;
    base_.eval(t, y, v);
    if (truncate_first) truncate_inplace(v, *spec_.N);
    bool finite = true;
    for (double c : v) finite = finite && std::isfinite(c);
    if (!finite) continue;
    wsum += w[k];
    for (int a = 0; a < d; ++a) acc[a] += w[k] * v[a];
  }
  for (int a = 0; a < d; ++a) out[a] = wsum > 0 ? acc[a] / wsum : 0.0;
}

void ApproxDrift::eval(double t, std::span<const double> x, std::span<double> out) const {
  if (spec_.n) {
    mollified(t, x, out);
    if (spec_.N && spec_.order == ApproxOrder::mollify_then_truncate) truncate_inplace(out, *spec_.N);
    return;
  }
  base_.eval(t, x, out);
  if (spec_.N) {
    bool finite = true;
    for (double c : out) finite = finite && std::isfinite(c);
    if (!finite)
      for (double& c : out) c = 0.0;
    else
      truncate_inplace(out, *spec_.N);
  }
}

std::vector<double> ApproxDrift::operator()(double t, std::span<const double> x) const {
  std::vector<double> out(base_.dim);
  eval(t, x, out);
  return out;
}

GridFunction ApproxDrift::sample(const Grid& g) const {
  require(g.dim == base_.dim, "approx drift: grid dimension differs from the drift");
  auto out = GridFunction::sample_vector(g, std::size_t(g.dim),
                                         [this](double t, std::span<const double> x, std::span<double> v) { eval(t, x, v); });
  out.require_finite("approx drift sample");
  return out;
}

nlohmann::json ApproxDrift::describe() const {
  nlohmann::json j = base_.params;
  j["kind"] = base_.kind;
  if (spec_.n) j["mollify_n"] = *spec_.n;
  if (spec_.N) j["truncate_N"] = *spec_.N;
  if (spec_.n && spec_.N)
    j["order"] = spec_.order == ApproxOrder::truncate_then_mollify ? "truncate_then_mollify" : "mollify_then_truncate";
  if (spec_.n) j["mollifier"] = mollifier_;
  return j;
}

}  // namespace csde::drift
