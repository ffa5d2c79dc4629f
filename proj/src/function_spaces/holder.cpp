#include <algorithm>
#include <cmath>
#include <random>

#include "csde/error.hpp"
#include "csde/norms.hpp"
#include "quadrature.hpp"

namespace csde {

namespace {

// Space-time node addressing for pair sampling: axes 0..d-1 are space, axis d
// (when present) is time.
struct PairSpace {
  const GridFunction& f;
  const Grid& g;
  int axes;
  double alpha;

  PairSpace(const GridFunction& fn, double a)
      : f(fn), g(fn.grid()), axes(fn.grid().dim + (fn.grid().is_static() ? 0 : 1)), alpha(a) {}

  std::size_t extent(int a) const { return a < g.dim ? g.nx[a] : g.levels(); }

  double value(const std::vector<long>& z) const {
    std::size_t node = 0, s = 1;
    for (int a = 0; a < g.dim; ++a) {
      node += std::size_t(z[a]) * s;
      s *= g.nx[a];
    }
    const std::size_t level = g.is_static() ? 0 : std::size_t(z[g.dim]);
    return f.at(level, node);
  }

  // Normalizes an index vector; false if it leaves a Dirichlet box or the time range.
  bool normalize(std::vector<long>& z) const {
    for (int a = 0; a < axes; ++a) {
      const long n = long(extent(a));
      if (a < g.dim && g.boundary == Boundary::periodic) {
        const long period = n - 1;
        z[a] = ((z[a] % period) + period) % period;
      } else if (z[a] < 0 || z[a] >= n) {
        return false;
      }
    }
    return true;
  }

  double rho(const std::vector<long>& z1, const std::vector<long>& z2) const {
    double s = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const double d = detail::axis_delta(g, a, g.coord(a, std::size_t(z1[a])), g.coord(a, std::size_t(z2[a])));
      s += d * d;
    }
    double r = std::sqrt(s);
    if (!g.is_static()) r += std::sqrt(std::abs(g.time(std::size_t(z1[g.dim])) - g.time(std::size_t(z2[g.dim]))));
    return r;
  }

  double ratio(const std::vector<long>& z1, const std::vector<long>& z2) const {
    const double r = rho(z1, z2);
    if (r <= 0.0) return 0.0;
    return std::abs(value(z1) - value(z2)) / std::pow(r, alpha);
  }
};

}  // namespace

double holder_seminorm(const GridFunction& f, double alpha, const HolderOptions& opts) {
  f.require_scalar("holder_seminorm");
  f.require_finite("holder_seminorm");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("holder_seminorm: alpha must lie in (0, 1]");
  require(opts.local_budget >= 1, "holder_seminorm: local budget must be >= 1");
  PairSpace ps(f, alpha);
  const int D = ps.axes;
  const long B = opts.local_budget;

  // lexicographically positive offsets within the budget
  std::vector<std::vector<long>> offsets;
  {
    std::vector<long> o(D, -B);
    while (true) {
      int first = 0;
      while (first < D && o[first] == 0) ++first;
      if (first < D && o[first] > 0) offsets.push_back(o);
      int a = 0;
      for (; a < D; ++a) {
        if (o[a] < B) {
          ++o[a];
          break;
        }
        o[a] = -B;
      }
      if (a == D) break;
    }
  }

  double best = 0.0;
  std::vector<long> z(D, 0), w(D);
  std::size_t total = 1;
  for (int a = 0; a < D; ++a) total *= ps.extent(a);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t r = n;
    for (int a = 0; a < D; ++a) {
      z[a] = long(r % ps.extent(a));
      r /= ps.extent(a);
    }
    for (const auto& o : offsets) {
      for (int a = 0; a < D; ++a) w[a] = z[a] + o[a];
      if (!ps.normalize(w)) continue;
      best = std::max(best, ps.ratio(z, w));
    }
  }

  // random long-range pairs, then coordinate ascent from the best of them
  std::mt19937_64 rng(opts.seed);
  struct Pair {
    std::vector<long> a, b;
    double r;
  };
  std::vector<Pair> pairs;
  pairs.reserve(opts.random_pairs);
  for (std::size_t k = 0; k < opts.random_pairs; ++k) {
    Pair p{std::vector<long>(D), std::vector<long>(D), 0.0};
    for (int a = 0; a < D; ++a) {
      p.a[a] = long(rng() % ps.extent(a));
      p.b[a] = long(rng() % ps.extent(a));
    }
    p.r = ps.ratio(p.a, p.b);
    best = std::max(best, p.r);
    pairs.push_back(std::move(p));
  }
  const std::size_t starts = std::min(opts.refine_starts, pairs.size());
  std::partial_sort(pairs.begin(), pairs.begin() + long(starts), pairs.end(),
                    [](const Pair& l, const Pair& r) { return l.r > r.r; });
  for (std::size_t s = 0; s < starts; ++s) {
    Pair cur = pairs[s];
    for (int iter = 0; iter < 100000; ++iter) {
      Pair next = cur;
      for (int end = 0; end < 2; ++end) {
        for (int a = 0; a < D; ++a) {
          for (long step : {-1L, 1L}) {
            Pair cand = cur;
            auto& pt = end == 0 ? cand.a : cand.b;
            pt[a] += step;
            if (!ps.normalize(pt)) continue;
            cand.r = ps.ratio(cand.a, cand.b);
            if (cand.r > next.r) next = cand;
          }
        }
      }
      if (next.r <= cur.r) break;
      cur = std::move(next);
    }
    best = std::max(best, cur.r);
  }
  return best;
}

}  // namespace csde
