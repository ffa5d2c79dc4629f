#include <cmath>
#include <limits>

#include "csde/degiorgi.hpp"
#include "csde/error.hpp"

namespace csde::degiorgi {

double decrease_threshold(double N, double C, double eps) {
  require(N >= 1.0 && C >= 1.0 && eps > 0.0, "decrease_lemma: need N, C >= 1 and eps > 0");
  return std::exp(-std::log(N) / eps - std::log(C) / (eps * eps));
}

// With l_j = log y_j and a = log threshold, the extremal recursion is
// l_j = a - j log(C)/eps + delta_j with delta_{j+1} = (1 + eps) delta_j.
DecreaseResult decrease_lemma(double y0, double N, double C, double eps, std::size_t jmax) {
  require(y0 >= 0.0 && std::isfinite(y0), "decrease_lemma: y0 must be finite and nonnegative");
  DecreaseResult res;
  res.threshold = decrease_threshold(N, C, eps);
  res.y.push_back(y0);
  constexpr double kTol = 1e-14;
  if (y0 == 0.0) {
    res.converged = true;
    return res;
  }
  const double a = -std::log(N) / eps - std::log(C) / (eps * eps);
  const double rate = std::log(C) / eps;
  double delta = std::log(y0) - a;
  if (std::abs(delta) <= 1e-12 * std::max(1.0, std::abs(a))) delta = 0.0;
  const double log_max = std::log(std::numeric_limits<double>::max());
  std::size_t rising = 0;
  for (std::size_t j = 1; j <= jmax; ++j) {
    delta *= 1.0 + eps;
    const double l = a - double(j) * rate + delta;
    if (l > log_max) {
      res.y.push_back(std::numeric_limits<double>::infinity());
      res.diverged = true;
      break;
    }
    const double y = std::exp(l);
    rising = y > res.y.back() ? rising + 1 : 0;
    res.y.push_back(y);
    // below tolerance with a nonpositive offset the sequence only decreases
    if (y < kTol && delta <= 0.0) break;
  }
  res.steps = res.y.size() - 1;
  res.converged = !res.diverged && res.y.back() < kTol;
  if (!res.diverged && rising >= 3 && res.y.back() > y0) res.diverged = true;
  return res;
}

}  // namespace csde::degiorgi
