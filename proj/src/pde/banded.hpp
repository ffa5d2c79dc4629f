#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace csde::pde::detail {

// Second-difference stencil (times h^2) at offsets -2..2. Fourth order uses
// the five-point rule; rows next to a Dirichlet face fall back to three points.
std::array<double, 5> d2_stencil(int order);

// A = I - c * D2 / h^2 on one grid line of m unknowns (c already divided by
// h^2), cyclic or with homogeneous Dirichlet ends. Factored once by banded LU
// without pivoting; the cyclic corners are handled by a Woodbury correction.
class LineOperator {
 public:
  LineOperator(std::size_t m, double c, int order, bool cyclic);

  std::size_t size() const { return m_; }
  // y = A x
  void apply(std::span<const double> x, std::span<double> y) const;
  // in place: rhs -> A^{-1} rhs; returns the relative residual
  double solve(std::span<double> x) const;

 private:
  double entry_row(std::size_t i, int off) const { return rows_[i][std::size_t(off + 2)]; }
  void band_solve(std::span<double> x) const;

  std::size_t m_;
  int w_;
  bool cyclic_;
  std::vector<std::array<double, 5>> rows_;  // full operator including wraps
  std::vector<double> lu_;                   // band storage, (2w+1) per row
  // Woodbury pieces for cyclic lines
  std::vector<double> z_;       // m x 2w, B^{-1} P
  std::vector<double> qrows_;   // 2w x m, corner rows of A
  std::vector<double> sinv_;    // (I + Q^T Z)^{-1}, 2w x 2w
  mutable std::vector<double> scratch_;
};

}  // namespace csde::pde::detail
