#include <cmath>

#include "csde/drift.hpp"
#include "csde/error.hpp"

namespace csde::drift {

SplitResult split_critical(const DriftField& b, double epsilon, const Grid& domain, const SplitOptions& opts) {
  require(epsilon > 0, "split_critical: epsilon must be positive");
  require(b.dim == domain.dim, "split_critical: drift and grid dimensions differ");
  domain.validate();
  const GridFunction sampled = sample_drift(b, domain);
  const GridFunction mag = sampled.magnitude();
  const std::size_t n = mag.values().size();
  const std::size_t nc = sampled.components();
  double sup = 0.0;
  for (double v : mag.values()) sup = std::max(sup, v);

  SplitResult res;
  res.sampling_cap = 1.0 / domain.max_h();
  auto build = [&](double N) {
    res.N = N;
    res.b0 = GridFunction(sampled.grid(), nc);
    res.b1 = GridFunction(sampled.grid(), nc);
    res.b1_sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool big = mag.values()[i] > N;
      for (std::size_t c = 0; c < nc; ++c) {
        const double v = sampled.values()[i * nc + c];
        (big ? res.b0 : res.b1).values()[i * nc + c] = v;
      }
      if (!big) res.b1_sup = std::max(res.b1_sup, mag.values()[i]);
    }
  };

  if (!b.is_singular()) {
    // a bounded field needs no small part
    build(sup);
    res.b0_weak = 0.0;
    return res;
  }

  std::vector<double> ladder = opts.ladder;
  if (ladder.empty()) {
    ladder.push_back(0.0);
    for (int k = 0; k <= 40; ++k) ladder.push_back(std::ldexp(1.0, k));
  }
  const auto centers = support_lattice(mag, opts.center_spacing);
  const ExponentPair e{double(b.dim), Exponent::infinity()};
  for (double N : ladder) {
    // levels at or above the sampling cap only reflect the grid's own truncation
    if (N >= res.sampling_cap) break;
    GridFunction b0mag = mag;
    for (double& v : b0mag.values())
      if (!(v > N)) v = 0.0;
    const double w = localized_norm(b0mag, e, true, centers, 1.0, opts.weak);
    if (w <= epsilon) {
      build(N);
      res.b0_weak = w;
      return res;
    }
  }
  throw NumericalError("split_critical: no truncation level below the sampling cap achieves epsilon; the field is too "
                       "singular for this split on this grid");
}

}  // namespace csde::drift
