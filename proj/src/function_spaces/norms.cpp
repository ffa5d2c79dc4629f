#include <algorithm>
#include <cmath>
#include <sstream>

#include "csde/error.hpp"
#include "csde/norms.hpp"
#include "quadrature.hpp"

namespace csde {

double Exponent::value() const {
  if (infinite_) throw ValidationError("exponent: value() of an infinite exponent");
  return value_;
}

void Exponent::validate(const char* what) const {
  if (infinite_) return;
  if (!(value_ >= 1.0) || !std::isfinite(value_)) {
    std::ostringstream os;
    os << what << ": exponent must lie in [1, inf], got " << value_;
    throw ValidationError(os.str());
  }
}

double lps_index(const ExponentPair& e, int d) {
  require(d >= 1, "lps: dimension must be >= 1");
  return double(d) * e.p.reciprocal() + 2.0 * e.q.reciprocal();
}

Criticality lps_classify(const ExponentPair& e, int d) {
  e.p.validate("lps_classify");
  e.q.validate("lps_classify");
  const double s = lps_index(e, d) - 1.0;
  if (std::abs(s) <= 1e-12) return Criticality::critical;
  return s < 0 ? Criticality::subcritical : Criticality::supercritical;
}

const char* to_string(Criticality c) {
  switch (c) {
    case Criticality::subcritical: return "subcritical";
    case Criticality::critical: return "critical";
    case Criticality::supercritical: return "supercritical";
  }
  return "?";
}

namespace detail {

double trapezoid_weight(const Grid& g, std::size_t node) {
  double w = 1.0;
  for (int a = 0; a < g.dim; ++a) {
    const std::size_t i = node % g.nx[a];
    node /= g.nx[a];
    double ha = g.h(a);
    if (i == 0 || i + 1 == g.nx[a]) ha *= 0.5;
    w *= ha;
  }
  return w;
}

double axis_delta(const Grid& g, int axis, double a, double b) {
  double d = a - b;
  if (g.boundary == Boundary::periodic) {
    const double len = g.hi[axis] - g.lo[axis];
    d -= len * std::round(d / len);
  }
  return d;
}

std::vector<NodeWeight> spatial_nodes(const Grid& g, const Region& region) {
  std::vector<NodeWeight> out;
  const std::size_t n = g.spatial_size();
  std::vector<double> x(g.dim);
  if (region.ball) {
    require(int(region.ball->center.size()) == g.dim, "region: ball center dimension mismatch");
    require(region.ball->radius > 0, "region: ball radius must be positive");
  }
  const double r2 = region.ball ? region.ball->radius * region.ball->radius * (1.0 + 1e-12) : 0.0;
  out.reserve(region.ball ? 0 : n);
  for (std::size_t i = 0; i < n; ++i) {
    if (region.ball) {
      g.position(i, x);
      double s = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        const double dx = axis_delta(g, a, x[a], region.ball->center[a]);
        s += dx * dx;
      }
      if (s > r2) continue;
    }
    // the duplicated periodic end node carries weight via the halving rule
    out.push_back({i, trapezoid_weight(g, i)});
  }
  return out;
}

TimeQuad time_quadrature(const Grid& g, const Region& region) {
  TimeQuad tq;
  const double a = region.t_lo.value_or(g.t0);
  const double b = region.t_hi.value_or(g.t1);
  require(a <= b, "region: empty time window");
  if (g.nt == 0) {
    tq.is_static = true;
    if (g.t1 == g.t0) {
      tq.spatial_only = true;
      tq.levels.push_back({0, 0.0});
      return tq;
    }
    const double len = std::min(b, g.t1) - std::max(a, g.t0);
    if (len < 0) throw ValidationError("region: time window does not meet the grid");
    tq.levels.push_back({0, len});
    return tq;
  }
  const double dt = g.dt();
  const double eps = 1e-9 * dt;
  std::vector<std::size_t> sel;
  for (std::size_t j = 0; j <= g.nt; ++j) {
    const double t = g.time(j);
    if (t >= a - eps && t <= b + eps) sel.push_back(j);
  }
  if (sel.empty()) throw ValidationError("region: time window contains no grid level");
  for (std::size_t k = 0; k < sel.size(); ++k) {
    double w = 0.0;
    if (sel.size() > 1) w = (k == 0 || k + 1 == sel.size()) ? 0.5 * dt : dt;
    tq.levels.push_back({sel[k], w});
  }
  return tq;
}

double time_norm(const TimeQuad& tq, const std::vector<double>& s, double q, bool q_inf) {
  if (tq.spatial_only) return s[0];
  if (q_inf) return *std::max_element(s.begin(), s.end());
  double acc = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) acc += tq.levels[k].w * std::pow(s[k], q);
  return std::pow(acc, 1.0 / q);
}

double weak_from_atoms(std::vector<std::pair<double, double>>& atoms, double p, bool p_inf,
                       std::size_t min_nodes, double min_measure) {
  if (atoms.empty()) return 0.0;
  if (p_inf) {
    double m = 0.0;
    for (auto& [v, w] : atoms) m = std::max(m, v);
    return m;
  }
  std::sort(atoms.begin(), atoms.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
  double best = 0.0, cum = 0.0;
  std::size_t count = 0;
  const double ip = 1.0 / p;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    cum += atoms[k].second;
    ++count;
    const double v = atoms[k].first;
    if (v <= 0.0) break;
    if (k + 1 < atoms.size() && atoms[k + 1].first == v) continue;
    if (count < min_nodes || cum < min_measure) continue;
    best = std::max(best, v * std::pow(cum, ip));
  }
  return best;
}

}  // namespace detail

namespace {

double spatial_norm(std::span<const double> vals, const std::vector<detail::NodeWeight>& nodes, double p,
                    bool p_inf) {
  if (p_inf) {
    double m = 0.0;
    for (const auto& nw : nodes) m = std::max(m, std::abs(vals[nw.node]));
    return m;
  }
  double acc = 0.0;
  if (p == 2.0) {
    for (const auto& nw : nodes) acc += nw.w * vals[nw.node] * vals[nw.node];
    return std::sqrt(acc);
  }
  if (p == 1.0) {
    for (const auto& nw : nodes) acc += nw.w * std::abs(vals[nw.node]);
    return acc;
  }
  for (const auto& nw : nodes) acc += nw.w * std::pow(std::abs(vals[nw.node]), p);
  return std::pow(acc, 1.0 / p);
}

}  // namespace

double mixed_norm(const GridFunction& f, const ExponentPair& e, const Region& region) {
  f.require_scalar("mixed_norm");
  e.p.validate("mixed_norm");
  e.q.validate("mixed_norm");
  f.require_finite("mixed_norm");
  const Grid& g = f.grid();
  const auto nodes = detail::spatial_nodes(g, region);
  if (nodes.empty()) throw ValidationError("mixed_norm: region contains no grid node");
  const auto tq = detail::time_quadrature(g, region);
  const bool p_inf = e.p.is_infinite();
  const double p = p_inf ? 0.0 : e.p.value();
  std::vector<double> s;
  s.reserve(tq.levels.size());
  for (const auto& lw : tq.levels) s.push_back(spatial_norm(f.level(lw.node), nodes, p, p_inf));
  const bool q_inf = e.q.is_infinite();
  return detail::time_norm(tq, s, q_inf ? 0.0 : e.q.value(), q_inf);
}

double mixed_norm(const GridFunction& f, const ExponentPair& e, const Cylinder& cyl) {
  require(cyl.r > 0, "cylinder: radius must be positive");
  return mixed_norm(f, e, cyl.region());
}

double lp_norm(const GridFunction& f, Exponent p, const Region& region, std::size_t level) {
  f.require_scalar("lp_norm");
  p.validate("lp_norm");
  require(level < f.grid().levels(), "lp_norm: level out of range");
  const auto nodes = detail::spatial_nodes(f.grid(), region);
  if (nodes.empty()) throw ValidationError("lp_norm: region contains no grid node");
  auto vals = f.level(level);
  for (const auto& nw : nodes)
    if (!std::isfinite(vals[nw.node])) throw NumericalError("lp_norm: non-finite sample");
  return spatial_norm(vals, nodes, p.is_infinite() ? 0.0 : p.value(), p.is_infinite());
}

double region_measure(const Grid& g, const Region& region) {
  double m = 0.0;
  for (const auto& nw : detail::spatial_nodes(g, region)) m += nw.w;
  return m;
}

double weak_lp_norm(const GridFunction& f, double p, const Region& region, std::size_t level,
                    const WeakNormOptions& opts) {
  f.require_scalar("weak_lp_norm");
  if (!(p >= 1.0)) throw ValidationError("weak_lp_norm: p must be >= 1");
  require(level < f.grid().levels(), "weak_lp_norm: level out of range");
  const auto nodes = detail::spatial_nodes(f.grid(), region);
  if (nodes.empty()) throw ValidationError("weak_lp_norm: region contains no grid node");
  auto vals = f.level(level);
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(nodes.size());
  for (const auto& nw : nodes) {
    const double v = std::abs(vals[nw.node]);
    if (!std::isfinite(v)) throw NumericalError("weak_lp_norm: non-finite sample");
    if (v > 0.0 && nw.w > 0.0) atoms.emplace_back(v, nw.w);
  }
  return detail::weak_from_atoms(atoms, p, std::isinf(p), opts.min_level_nodes, opts.min_level_measure);
}

double weak_mixed_norm(const GridFunction& f, double p, Exponent q, const Region& region,
                       const WeakNormOptions& opts) {
  q.validate("weak_mixed_norm");
  const auto tq = detail::time_quadrature(f.grid(), region);
  std::vector<double> s;
  for (const auto& lw : tq.levels) s.push_back(weak_lp_norm(f, p, region, lw.node, opts));
  return detail::time_norm(tq, s, q.is_infinite() ? 0.0 : q.value(), q.is_infinite());
}

}  // namespace csde
