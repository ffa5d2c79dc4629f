#pragma once

#include "csde/grid.hpp"
#include "csde/norms.hpp"

namespace csde {

// Finite differences per time level: second-order central in the interior,
// second-order one-sided at Dirichlet box faces, wrapped on periodic grids.
GridFunction gradient(const GridFunction& u);
// Frobenius norm of the Hessian per node.
GridFunction hessian_norm(const GridFunction& u);

struct IsoperimetricResult {
  double lhs = 0.0;  // ||grad u^+||_2^2 over B_1
  double rhs = 0.0;  // c_d |A|^2 |B|^{2-2/d} / |D|
  double measure_a = 0.0, measure_b = 0.0, measure_d = 0.0;
  bool rhs_infinite = false;
  bool holds = false;
};

// A = {u >= 1/2}, B = {u <= 0}, D = {0 < u < 1/2}, all within the unit ball at
// the origin; measures by node count times cell volume.
IsoperimetricResult isoperimetric_check(const GridFunction& u, double c_d = 1.0 / 16.0);

struct NirenbergResult {
  double grad_q = 0.0;    // ||grad u||_q
  double hess_p = 0.0;    // ||grad^2 u||_p
  double holder = 0.0;    // [u]_alpha
  double alpha = 0.0;     // (q - 2p) / (q - p)
  double theta = 0.0;     // p / q
  double rhs = 0.0;       // hess_p^theta * holder^(1-theta)
  double ratio = 0.0;     // grad_q / rhs, 0 for u == 0
};

// ||grad^j u||_q <= C ||grad^m u||_p^theta [u]_alpha^(1-theta); j = 1, m = 2.
NirenbergResult nirenberg_ratio(const GridFunction& u, int j, int m, double p, double q,
                                const HolderOptions& holder = {});

struct EmbeddingResult {
  double lhs = 0.0;       // ||f||_{L^p(A)}
  double weak = 0.0;      // ||f||_{L^{r,inf}(A)}
  double measure = 0.0;   // |A|
  double constant = 0.0;  // 2^{1/p} (p/(r-p))^{1/r}
  double rhs = 0.0;
  bool holds = false;
};

EmbeddingResult weak_embedding_check(const GridFunction& f, double p, double r, const Region& a = {});

}  // namespace csde
