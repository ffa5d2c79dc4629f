#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>

#include "csde/grid.hpp"

namespace csde {

// Radial mollifier rho(x) = c_d * profile(|x|), supported in the unit ball,
// unit integral in every dimension. rho_n(x) = n^d rho(n x).
class Mollifier {
 public:
  using Profile = std::function<double(double r)>;

  Mollifier(std::string name, Profile profile);
  static Mollifier standard_bump();  // exp(-1/(1-|x|^2))

  const std::string& name() const { return name_; }
  double profile(double r) const { return r >= 1.0 ? 0.0 : profile_(r); }
  // c_d with c_d * int_{B_1} profile(|x|) dx = 1
  double normalization(int d) const;
  double density(double r, int d) const { return normalization(d) * profile(r); }

 private:
  std::string name_;
  Profile profile_;
  std::array<double, 9> norm_cache_{};
};

// Discrete spatial convolution with rho_n; the stencil weights are normalized
// to unit sum so constants are reproduced exactly. Periodic grids wrap,
// Dirichlet grids renormalize over the in-box part of the stencil.
GridFunction mollify(const GridFunction& f, int n, const Mollifier& rho = Mollifier::standard_bump());

}  // namespace csde
