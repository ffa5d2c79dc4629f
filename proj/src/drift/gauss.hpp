#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace csde::detail {

// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

// Composite rule over consecutive breakpoints.
struct Panels {
  std::vector<double> x, w;
};

inline Panels composite(const std::vector<double>& edges, const std::pair<std::vector<double>, std::vector<double>>& gl) {
  Panels p;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double a = edges[k], b = edges[k + 1];
    if (!(b > a)) continue;
    const double m = 0.5 * (a + b), r = 0.5 * (b - a);
    for (std::size_t i = 0; i < gl.first.size(); ++i) {
      p.x.push_back(m + r * gl.first[i]);
      p.w.push_back(r * gl.second[i]);
    }
  }
  return p;
}

}  // namespace csde::detail
