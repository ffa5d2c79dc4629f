#pragma once

#include <functional>
#include <span>
#include <vector>

#include "csde/drift.hpp"

namespace csde::drift {

// G(r) with (b * rho_n)(x) = G(|x|) x/|x| for b(y) = phi(|y|) y. Tabulated in
// R = m r on [0, kTableMax]; exact field beyond.
class RadialTable {
 public:
  static constexpr double kTableMax = 1e4;

  RadialTable(std::function<double(double)> phi, int d, int m, const Mollifier& rho);
  // value of the tabulated function at R
  double operator()(double R) const;
  int level() const { return m_; }

  // direct quadrature, also used to fill the table
  static double integrate(const std::function<double(double)>& phi, int d, int m, const Mollifier& rho, double R);

 private:
  std::function<double(double)> phi_;
  int m_;
  std::vector<double> R_, H_;
  std::size_t uniform_count_ = 0;
  double uniform_step_ = 0.0, ratio_log_ = 0.0;
};

// Quadrature nodes z_k in the unit ball with weights rho(z_k) dz summing to 1.
class Cubature {
 public:
  Cubature(int d, const Mollifier& rho);
  const std::vector<std::vector<double>>& nodes() const { return z_; }
  const std::vector<double>& weights() const { return w_; }

 private:
  std::vector<std::vector<double>> z_;
  std::vector<double> w_;
};

}  // namespace csde::drift
