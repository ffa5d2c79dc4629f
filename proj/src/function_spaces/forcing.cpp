#include "csde/forcing.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "csde/error.hpp"

namespace csde {

namespace {

std::vector<double> vec_param(const nlohmann::json& p, const char* key, int dim, double fill) {
  if (!p.contains(key)) return std::vector<double>(dim, fill);
  auto v = p.at(key).get<std::vector<double>>();
  if (int(v.size()) != dim) throw ValidationError(std::string("field: '") + key + "' needs one entry per axis");
  return v;
}

}  // namespace

ScalarField make_scalar_field(const nlohmann::json& spec, int dim) {
  require(spec.is_object() && spec.contains("kind"), "field: spec must be an object with a 'kind'");
  require(dim >= 1, "field: dimension must be >= 1");
  ScalarField f;
  f.kind = spec.at("kind").get<std::string>();
  f.params = spec;
  const double amp = spec.value("amplitude", 1.0);
  const double decay = spec.value("decay", 0.0);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::function<double(std::span<const double>)> space;

  if (f.kind == "constant") {
    const double c = spec.value("value", 1.0);
    space = [c](std::span<const double>) { return c; };
  } else if (f.kind == "sine") {
    auto k = vec_param(spec, "mode", dim, 0.0);
    if (!spec.contains("mode")) k[0] = 1.0;
    space = [k, amp](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t a = 0; a < k.size(); ++a) s += k[a] * x[a];
      return amp * std::sin(two_pi * s);
    };
  } else if (f.kind == "gaussian" || f.kind == "modulated_bump") {
    const auto c = vec_param(spec, "center", dim, 0.0);
    const double w = spec.value("width", 0.5);
    require(w > 0, "field: width must be positive");
    const bool mod = f.kind == "modulated_bump";
    auto k = vec_param(spec, "mode", dim, 0.0);
    if (mod && !spec.contains("mode")) k[0] = 1.0;
    space = [c, w, k, amp, mod](std::span<const double> x) {
      double r2 = 0.0, s = 0.0;
      for (std::size_t a = 0; a < c.size(); ++a) {
        r2 += (x[a] - c[a]) * (x[a] - c[a]);
        s += k[a] * (x[a] - c[a]);
      }
      const double g = amp * std::exp(-r2 / (2.0 * w * w));
      return mod ? g * std::cos(two_pi * s) : g;
    };
  } else if (f.kind == "ball_indicator") {
    const auto c = vec_param(spec, "center", dim, 0.0);
    const double r = spec.value("radius", 1.0);
    require(r > 0, "field: radius must be positive");
    space = [c, r, amp](std::span<const double> x) {
      double r2 = 0.0;
      for (std::size_t a = 0; a < c.size(); ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
      return r2 <= r * r ? amp : 0.0;
    };
  } else {
    throw ValidationError("field: unknown kind '" + f.kind + "'");
  }
  if (decay == 0.0) {
    f.eval = [space](double, std::span<const double> x) { return space(x); };
  } else {
    f.eval = [space, decay](double t, std::span<const double> x) { return std::exp(-decay * t) * space(x); };
  }
  return f;
}

}  // namespace csde
