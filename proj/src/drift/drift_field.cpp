#include <cmath>

#include "csde/drift.hpp"
#include "csde/error.hpp"

namespace csde::drift {

std::vector<double> DriftField::operator()(double t, std::span<const double> x) const {
  std::vector<double> out(dim);
  eval(t, x, out);
  return out;
}

DriftField truncate_drift(const DriftField& b, double N) {
  require(N > 0, "truncate_drift: N must be positive");
  DriftField out = b;
  out.kind = b.kind + "_truncated";
  out.params["truncation"] = N;
  const auto inner = b.eval;
  const int d = b.dim;
  out.eval = [inner, N, d](double t, std::span<const double> x, std::span<double> v) {
    inner(t, x, v);
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += v[a] * v[a];
    if (!(std::sqrt(s) <= N))
      for (int a = 0; a < d; ++a) v[a] = 0.0;
  };
  out.div_eval = nullptr;
  out.singular_distance = nullptr;
  out.singular_set = "none";
  out.homogeneity.reset();
  if (b.radial) {
    const auto phi = b.radial;
    out.radial = [phi, N](double r) {
      const double v = phi(r);
      return std::abs(v) * r <= N ? v : 0.0;
    };
  }
  return out;
}

double fd_divergence(const DriftField& b, double t, std::span<const double> x, double h) {
  require(h > 0, "fd_divergence: step must be positive");
  std::vector<double> y(x.begin(), x.end()), vp(b.dim), vm(b.dim);
  double div = 0.0;
  for (int a = 0; a < b.dim; ++a) {
    y[a] = x[a] + h;
    b.eval(t, y, vp);
    y[a] = x[a] - h;
    b.eval(t, y, vm);
    y[a] = x[a];
    div += (vp[a] - vm[a]) / (2.0 * h);
  }
  return div;
}

GridFunction sample_drift(const DriftField& b, const Grid& g) {
  require(b.dim == g.dim, "sample_drift: drift and grid dimensions differ");
  const double h = g.max_h();
  const double cap = 1.0 / h;
  return GridFunction::sample_vector(g, std::size_t(g.dim), [&](double t, std::span<const double> x, std::span<double> v) {
    b.eval(t, x, v);
    if (b.singular_distance && b.singular_distance(x) < h) {
      double s = 0.0;
      for (int a = 0; a < b.dim; ++a) s += v[a] * v[a];
      if (!(std::sqrt(s) <= cap))
        for (int a = 0; a < b.dim; ++a) v[a] = 0.0;
    }
    for (int a = 0; a < b.dim; ++a)
      if (!std::isfinite(v[a])) throw NumericalError("sample_drift: non-finite value away from the singular set");
  });
}

}  // namespace csde::drift
