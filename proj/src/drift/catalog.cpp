#include <cmath>

#include "csde/drift.hpp"
#include "csde/error.hpp"

namespace csde::drift {

DriftField inverse_radial(int d, double lambda) {
  require(d >= 2, "inverse_radial: d must be >= 2");
  require(std::isfinite(lambda), "inverse_radial: lambda must be finite");
  DriftField b;
  b.dim = d;
  b.kind = "inverse_radial";
  b.params = {{"kind", "inverse_radial"}, {"d", d}, {"lambda", lambda}};
  b.eval = [d, lambda](double, std::span<const double> x, std::span<double> v) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
    for (int a = 0; a < d; ++a) v[a] = -lambda * x[a] / r2;
  };
  b.div_eval = [d, lambda](double, std::span<const double> x) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
    return -lambda * double(d - 2) / r2;
  };
  b.singular_set = "origin";
  b.singular_distance = [d](std::span<const double> x) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
    return std::sqrt(r2);
  };
  b.radial = [lambda](double r) { return -lambda / (r * r); };
  b.homogeneity = -1.0;
  return b;
}

DriftField swirl_drift(double lambda) {
  require(std::isfinite(lambda), "swirl_drift: lambda must be finite");
  DriftField b;
  b.dim = 3;
  b.kind = "swirl";
  b.params = {{"kind", "swirl"}, {"lambda", lambda}};
  b.eval = [lambda](double, std::span<const double> x, std::span<double> v) {
    const double rho2 = x[0] * x[0] + x[1] * x[1];
    const double r = std::sqrt(rho2 + x[2] * x[2]);
    v[0] = lambda * x[0] * x[2] / (rho2 * r);
    v[1] = lambda * x[1] * x[2] / (rho2 * r);
    v[2] = -lambda / r;
  };
  b.div_eval = [](double, std::span<const double>) { return 0.0; };
  b.singular_set = "x3-axis";
  b.singular_distance = [](std::span<const double> x) { return std::hypot(x[0], x[1]); };
  b.homogeneity = -1.0;
  return b;
}

DriftField constant_drift(std::vector<double> c) {
  require(!c.empty(), "constant drift: empty vector");
  DriftField b;
  b.dim = int(c.size());
  b.kind = "constant";
  b.params = {{"kind", "constant"}, {"c", c}};
  b.eval = [c](double, std::span<const double>, std::span<double> v) {
    for (std::size_t a = 0; a < c.size(); ++a) v[a] = c[a];
  };
  b.div_eval = [](double, std::span<const double>) { return 0.0; };
  b.homogeneity = 0.0;
  return b;
}

DriftField linear_drift(int d, double rate) {
  require(d >= 1, "linear drift: d must be >= 1");
  DriftField b;
  b.dim = d;
  b.kind = "linear";
  b.params = {{"kind", "linear"}, {"d", d}, {"rate", rate}};
  b.eval = [d, rate](double, std::span<const double> x, std::span<double> v) {
    for (int a = 0; a < d; ++a) v[a] = -rate * x[a];
  };
  b.div_eval = [d, rate](double, std::span<const double>) { return -rate * d; };
  b.radial = [rate](double) { return -rate; };
  b.homogeneity = 1.0;
  return b;
}

DriftField gaussian_vortex(int d, double strength, double width) {
  require(d >= 2, "gaussian vortex: d must be >= 2");
  require(width > 0, "gaussian vortex: width must be positive");
  DriftField b;
  b.dim = d;
  b.kind = "gaussian_vortex";
  b.params = {{"kind", "gaussian_vortex"}, {"d", d}, {"strength", strength}, {"width", width}};
  b.eval = [d, strength, width](double, std::span<const double> x, std::span<double> v) {
    const double e = strength * std::exp(-(x[0] * x[0] + x[1] * x[1]) / (width * width));
    v[0] = -e * x[1];
    v[1] = e * x[0];
    for (int a = 2; a < d; ++a) v[a] = 0.0;
  };
  b.div_eval = [](double, std::span<const double>) { return 0.0; };
  return b;
}

DriftField smooth_test_drift(const std::string& kind, const nlohmann::json& p) {
  if (kind == "constant") return constant_drift(p.at("c").get<std::vector<double>>());
  if (kind == "linear") return linear_drift(p.value("d", 2), p.value("rate", 1.0));
  if (kind == "gaussian_vortex" || kind == "gaussian-vortex")
    return gaussian_vortex(p.value("d", 2), p.value("strength", 1.0), p.value("width", 1.0));
  throw ValidationError("smooth_test_drift: unknown kind '" + kind + "'");
}

DriftField make_drift(const nlohmann::json& spec) {
  require(spec.is_object() && spec.contains("kind"), "drift: spec must be an object with a 'kind'");
  const auto kind = spec.at("kind").get<std::string>();
  try {
    if (kind == "inverse_radial") return inverse_radial(spec.value("d", 3), spec.at("lambda").get<double>());
    if (kind == "swirl") return swirl_drift(spec.at("lambda").get<double>());
    if (kind == "zero") return constant_drift(std::vector<double>(spec.value("d", 2), 0.0));
    return smooth_test_drift(kind, spec);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("drift '" + kind + "': " + e.what());
  }
}

}  // namespace csde::drift
