#include "csde/mollifier.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "csde/error.hpp"

namespace csde {

Mollifier::Mollifier(std::string name, Profile profile) : name_(std::move(name)), profile_(std::move(profile)) {
  for (int d = 1; d < int(norm_cache_.size()); ++d) norm_cache_[d] = normalization(d);
}

Mollifier Mollifier::standard_bump() {
  return Mollifier("standard_bump", [](double r) { return r < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; });
}

double Mollifier::normalization(int d) const {
  require(d >= 1, "mollifier: dimension must be >= 1");
  if (d < int(norm_cache_.size()) && norm_cache_[d] > 0.0) return norm_cache_[d];
  // composite Simpson on [0, 1] of r^{d-1} profile(r); the profile is flat at r = 1
  const int n = 20000;
  const double h = 1.0 / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * std::pow(r, d - 1) * profile(r);
  }
  acc *= h / 3.0;
  const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
  return 1.0 / (sphere * acc);
}

GridFunction mollify(const GridFunction& f, int n, const Mollifier& rho) {
  require(n >= 1, "mollify: n must be >= 1");
  const Grid& g = f.grid();
  const double radius = 1.0 / n;
  for (int a = 0; a < g.dim; ++a)
    if (radius > g.hi[a] - g.lo[a]) throw ValidationError("mollify: mollification radius exceeds the box");

  struct Tap {
    std::vector<long> off;
    double w;
  };
  std::vector<Tap> taps;
  std::vector<long> reach(g.dim);
  for (int a = 0; a < g.dim; ++a) reach[a] = long(std::floor(radius / g.h(a)));
  {
    std::vector<long> o(g.dim);
    for (int a = 0; a < g.dim; ++a) o[a] = -reach[a];
    while (true) {
      double s = 0.0;
      for (int a = 0; a < g.dim; ++a) s += std::pow(double(o[a]) * g.h(a), 2);
      const double w = rho.profile(std::sqrt(s) / radius);
      if (w > 0.0) taps.push_back({o, w});
      int a = 0;
      for (; a < g.dim; ++a) {
        if (o[a] < reach[a]) {
          ++o[a];
          break;
        }
        o[a] = -reach[a];
      }
      if (a == g.dim) break;
    }
  }
  double total = 0.0;
  for (auto& t : taps) total += t.w;
  for (auto& t : taps) t.w /= total;

  GridFunction out(g, f.components());
  const std::size_t ns = g.spatial_size(), nc = f.components();
  const auto strides = g.strides();
  std::vector<std::size_t> idx(g.dim);
  std::vector<double> acc(nc);
  for (std::size_t j = 0; j < g.levels(); ++j) {
    auto src = f.level(j);
    auto dst = out.level(j);
    for (std::size_t i = 0; i < ns; ++i) {
      g.unflat(i, idx);
      std::fill(acc.begin(), acc.end(), 0.0);
      double wsum = 0.0;
      for (const auto& t : taps) {
        std::size_t node = 0;
        bool inside = true;
        for (int a = 0; a < g.dim; ++a) {
          long k = long(idx[a]) + t.off[a];
          if (g.boundary == Boundary::periodic) {
            const long period = long(g.nx[a]) - 1;
            k = ((k % period) + period) % period;
          } else if (k < 0 || k >= long(g.nx[a])) {
            inside = false;
            break;
          }
          node += std::size_t(k) * strides[a];
        }
        if (!inside) continue;
        wsum += t.w;
        for (std::size_t c = 0; c < nc; ++c) acc[c] += t.w * src[node * nc + c];
      }
      for (std::size_t c = 0; c < nc; ++c) dst[i * nc + c] = acc[c] / wsum;
    }
  }
  return out;
}

}  // namespace csde
