#include <algorithm>
#include <cmath>
#include <numbers>

#include "approx_internal.hpp"
#include "csde/error.hpp"
#include "gauss.hpp"

namespace csde::drift {

namespace {

constexpr double kUniformEnd = 4.0;
constexpr double kUniformStep = 1.0 / 128.0;
constexpr double kGeomRatio = 1.01;

// Breakpoints on [a, b] refined geometrically toward the point c.
std::vector<double> graded(double a, double b, double c, int levels) {
  std::vector<double> e{a, b};
  if (c > a && c < b) e.push_back(c);
  for (int k = 1; k <= levels; ++k) {
    const double f = std::ldexp(1.0, -k);
    if (c > a) e.push_back(c - (c - a) * f);
    if (c < b) e.push_back(c + (b - c) * f);
  }
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  return e;
}

}  // namespace

double RadialTable::integrate(const std::function<double(double)>& phi, int d, int m, const Mollifier& rho,
                              double R) {
  if (R == 0.0) return 0.0;
  static const auto gl = detail::gauss_legendre(8);
  const double cd = rho.normalization(d);
  const double sphere = d == 2 ? 2.0 : 2.0 * std::pow(std::numbers::pi, 0.5 * (d - 1)) / std::tgamma(0.5 * (d - 1));
  const auto s_rule = detail::composite(graded(0.0, 1.0, R < 1.0 ? R : 1.0, R < 1.5 ? 30 : 6), gl);
  double total = 0.0;
  for (std::size_t i = 0; i < s_rule.x.size(); ++i) {
    const double s = s_rule.x[i];
    const double prof = rho.profile(s);
    if (prof == 0.0) continue;
    // theta grading toward 0 where the integrand peaks when s is close to R
    const double gap = std::abs(s - R) / std::max(R, 1e-300);
    const int levels = std::clamp(int(std::ceil(-std::log2(std::max(gap, 1e-12)))) + 4, 4, 44);
    std::vector<double> edges{0.0};
    for (int k = levels; k >= 0; --k) edges.push_back(std::numbers::pi * std::ldexp(1.0, -k));
    const auto t_rule = detail::composite(edges, gl);
    double inner = 0.0;
    for (std::size_t j = 0; j < t_rule.x.size(); ++j) {
      const double th = t_rule.x[j];
      const double c = std::cos(th);
      const double q2 = R * R - 2.0 * R * s * c + s * s;
      if (q2 <= 0.0) continue;
      const double q = std::sqrt(q2);
      const double val = phi(q / m) * (R - s * c) / m;
      if (!std::isfinite(val)) continue;
      inner += t_rule.w[j] * val * (d == 2 ? 1.0 : std::pow(std::sin(th), d - 2));
    }
    total += s_rule.w[i] * std::pow(s, d - 1) * prof * inner;
  }
  return cd * sphere * total;
}

RadialTable::RadialTable(std::function<double(double)> phi, int d, int m, const Mollifier& rho)
    : phi_(std::move(phi)), m_(m) {
  require(d >= 2, "radial mollification: d must be >= 2");
  uniform_step_ = kUniformStep;
  for (double R = 0.0; R <= kUniformEnd + 1e-12; R += kUniformStep) R_.push_back(R);
  uniform_count_ = R_.size();
  ratio_log_ = std::log(kGeomRatio);
  for (double R = kUniformEnd * kGeomRatio; R <= kTableMax * kGeomRatio; R *= kGeomRatio) R_.push_back(R);
  H_.resize(R_.size());
  for (std::size_t i = 0; i < R_.size(); ++i) H_[i] = integrate(phi_, d, m, rho, R_[i]);
}

double RadialTable::operator()(double R) const {
  // local cubic Lagrange interpolation in the (piecewise uniform) table index
  double u;
  if (R <= kUniformEnd) {
    u = R / uniform_step_;
  } else {
    u = double(uniform_count_ - 1) + std::log(R / kUniformEnd) / ratio_log_;
  }
  const auto n = R_.size();
  auto i = std::size_t(std::floor(u));
  if (i + 1 >= n) i = n - 2;
  std::size_t i0 = i == 0 ? 0 : i - 1;
  if (i0 + 3 >= n) i0 = n - 4;
  // Lagrange through R_[i0..i0+3] in R itself (nodes need not be uniform)
  double acc = 0.0;
  for (std::size_t a = i0; a < i0 + 4; ++a) {
    double l = 1.0;
    for (std::size_t b = i0; b < i0 + 4; ++b)
      if (b != a) l *= (R - R_[b]) / (R_[a] - R_[b]);
    acc += l * H_[a];
  }
  return acc;
}

Cubature::Cubature(int d, const Mollifier& rho) {
  require(d >= 1 && d <= 3, "mollification cubature: d must be 1, 2 or 3");
  const auto gs = detail::gauss_legendre(16);
  auto push = [&](std::vector<double> z, double w) {
    if (w > 0.0) {
      z_.push_back(std::move(z));
      w_.push_back(w);
    }
  };
  if (d == 1) {
    for (std::size_t i = 0; i < gs.first.size(); ++i) push({gs.first[i]}, gs.second[i] * rho.profile(std::abs(gs.first[i])));
  } else {
    const auto gu = detail::gauss_legendre(12);
    const int nphi = d == 2 ? 32 : 24;
    for (std::size_t i = 0; i < gs.first.size(); ++i) {
      const double s = 0.5 * (gs.first[i] + 1.0);
      const double ws = 0.5 * gs.second[i] * std::pow(s, d - 1) * rho.profile(s);
      for (int k = 0; k < nphi; ++k) {
        const double ph = 2.0 * std::numbers::pi * (k + 0.5) / nphi;
        if (d == 2) {
          push({s * std::cos(ph), s * std::sin(ph)}, ws);
        } else {
          for (std::size_t j = 0; j < gu.first.size(); ++j) {
            const double u = gu.first[j], st = std::sqrt(1.0 - u * u);
            push({s * st * std::cos(ph), s * st * std::sin(ph), s * u}, ws * gu.second[j]);
          }
        }
      }
    }
  }
  double total = 0.0;
  for (double w : w_) total += w;
  for (double& w : w_) w /= total;
}

}  // namespace csde::drift
