#include "banded.hpp"

#include <algorithm>
#include <cmath>

#include "csde/error.hpp"

namespace csde::pde::detail {

std::array<double, 5> d2_stencil(int order) {
  if (order == 4) return {-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};
  return {0.0, 1.0, -2.0, 1.0, 0.0};
}

LineOperator::LineOperator(std::size_t m, double c, int order, bool cyclic)
    : m_(m), w_(order == 4 ? 2 : 1), cyclic_(cyclic) {
  require(order == 2 || order == 4, "line operator: order must be 2 or 4");
  if (cyclic) require(m >= std::size_t(4 * w_ + 1), "line operator: periodic line too short for the stencil");
  else require(m >= 1, "line operator: empty line");
  const auto s4 = d2_stencil(order), s2 = d2_stencil(2);
  rows_.assign(m, {0, 0, 0, 0, 0});
  for (std::size_t i = 0; i < m; ++i) {
    const bool near_face = !cyclic && order == 4 && (i == 0 || i + 1 == m);
    const auto& s = near_face ? s2 : s4;
    for (int o = -2; o <= 2; ++o) rows_[i][std::size_t(o + 2)] = -c * s[std::size_t(o + 2)];
    rows_[i][2] += 1.0;
  }
  // band part B: wraps removed; Dirichlet drops out-of-range columns
  const std::size_t bw = std::size_t(2 * w_ + 1);
  lu_.assign(m * bw, 0.0);
  auto band = [&](std::size_t i, std::size_t j) -> double& { return lu_[i * bw + (j + std::size_t(w_) - i)]; };
  for (std::size_t i = 0; i < m; ++i)
    for (int o = -w_; o <= w_; ++o) {
      const long j = long(i) + o;
      if (j < 0 || j >= long(m)) continue;
      band(i, std::size_t(j)) = rows_[i][std::size_t(o + 2)];
    }
  for (std::size_t k = 0; k < m; ++k) {
    const double piv = band(k, k);
    if (!(std::abs(piv) > 1e-300)) throw NumericalError("line operator: zero pivot in banded LU");
    for (std::size_t i = k + 1; i <= std::min(m - 1, k + std::size_t(w_)); ++i) {
      const double l = band(i, k) / piv;
      band(i, k) = l;
      for (std::size_t j = k + 1; j <= std::min(m - 1, k + std::size_t(w_)); ++j) band(i, j) -= l * band(k, j);
    }
  }
  scratch_.assign(m + 4 * std::size_t(w_), 0.0);
  if (!cyclic) return;

  const std::size_t r = 2 * std::size_t(w_);
  qrows_.assign(r * m, 0.0);
  for (std::size_t c2 = 0; c2 < std::size_t(w_); ++c2) {
    const std::size_t top = c2, bot = m - std::size_t(w_) + c2;
    for (int o = -w_; o <= w_; ++o) {
      const long jt = long(top) + o;
      if (jt < 0) qrows_[c2 * m + std::size_t(jt + long(m))] = rows_[top][std::size_t(o + 2)];
      const long jb = long(bot) + o;
      if (jb >= long(m)) qrows_[(std::size_t(w_) + c2) * m + std::size_t(jb - long(m))] = rows_[bot][std::size_t(o + 2)];
    }
  }
  z_.assign(m * r, 0.0);
  std::vector<double> col(m);
  for (std::size_t k = 0; k < r; ++k) {
    std::fill(col.begin(), col.end(), 0.0);
    col[k < std::size_t(w_) ? k : m - r + k] = 1.0;
    band_solve(col);
    for (std::size_t i = 0; i < m; ++i) z_[i * r + k] = col[i];
  }
  // S = I + Q^T Z, inverted by Gauss-Jordan with partial pivoting
  std::vector<double> s(r * r, 0.0), inv(r * r, 0.0);
  for (std::size_t a = 0; a < r; ++a) {
    inv[a * r + a] = 1.0;
    for (std::size_t b = 0; b < r; ++b) {
      double acc = a == b ? 1.0 : 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += qrows_[a * m + i] * z_[i * r + b];
      s[a * r + b] = acc;
    }
  }
  for (std::size_t c2 = 0; c2 < r; ++c2) {
    std::size_t p = c2;
    for (std::size_t a = c2 + 1; a < r; ++a)
      if (std::abs(s[a * r + c2]) > std::abs(s[p * r + c2])) p = a;
    if (!(std::abs(s[p * r + c2]) > 1e-300)) throw NumericalError("line operator: singular Woodbury capacitance");
    for (std::size_t b = 0; b < r; ++b) {
      std::swap(s[c2 * r + b], s[p * r + b]);
      std::swap(inv[c2 * r + b], inv[p * r + b]);
    }
    const double d = s[c2 * r + c2];
    for (std::size_t b = 0; b < r; ++b) {
      s[c2 * r + b] /= d;
      inv[c2 * r + b] /= d;
    }
    for (std::size_t a = 0; a < r; ++a) {
      if (a == c2) continue;
      const double f = s[a * r + c2];
      if (f == 0.0) continue;
      for (std::size_t b = 0; b < r; ++b) {
        s[a * r + b] -= f * s[c2 * r + b];
        inv[a * r + b] -= f * inv[c2 * r + b];
      }
    }
  }
  sinv_ = std::move(inv);
}

void LineOperator::apply(std::span<const double> x, std::span<double> y) const {
  const long m = long(m_);
  for (long i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int o = -w_; o <= w_; ++o) {
      long j = i + o;
      if (cyclic_) j = (j + m) % m;
      else if (j < 0 || j >= m) continue;
      acc += rows_[std::size_t(i)][std::size_t(o + 2)] * x[std::size_t(j)];
    }
    y[std::size_t(i)] = acc;
  }
}

void LineOperator::band_solve(std::span<double> x) const {
  const std::size_t m = m_, w = std::size_t(w_), bw = 2 * w + 1;
  for (std::size_t i = 1; i < m; ++i) {
    double acc = x[i];
    for (std::size_t k = (i > w ? i - w : 0); k < i; ++k) acc -= lu_[i * bw + (k + w - i)] * x[k];
    x[i] = acc;
  }
  for (std::size_t ii = m; ii-- > 0;) {
    double acc = x[ii];
    for (std::size_t j = ii + 1; j <= std::min(m - 1, ii + w); ++j) acc -= lu_[ii * bw + (j + w - ii)] * x[j];
    x[ii] = acc / lu_[ii * bw + w];
  }
}

double LineOperator::solve(std::span<double> x) const {
  std::vector<double> rhs(x.begin(), x.end());
  band_solve(x);
  if (cyclic_) {
    const std::size_t r = 2 * std::size_t(w_), m = m_;
    double qy[4], corr[4];
    for (std::size_t a = 0; a < r; ++a) {
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += qrows_[a * m + i] * x[i];
      qy[a] = acc;
    }
    for (std::size_t a = 0; a < r; ++a) {
      double acc = 0.0;
      for (std::size_t b = 0; b < r; ++b) acc += sinv_[a * r + b] * qy[b];
      corr[a] = acc;
    }
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::size_t a = 0; a < r; ++a) acc += z_[i * r + a] * corr[a];
      x[i] -= acc;
    }
  }
  // relative residual of the line solve
  std::vector<double> ax(m_);
  apply(x, ax);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < m_; ++i) {
    num = std::max(num, std::abs(ax[i] - rhs[i]));
    den = std::max(den, std::abs(rhs[i]));
  }
  return den > 0.0 ? num / den : num;
}

}  // namespace csde::pde::detail
