#include <algorithm>
#include <cmath>
#include <sstream>

#include "csde/error.hpp"
#include "stepper.hpp"

namespace csde::pde {

std::string SchemeOptions::id() const {
  std::ostringstream os;
  os << (diffusion == DiffusionScheme::implicit_euler ? "lie-ie" : "strang-cn") << '/'
     << (advection == AdvectionScheme::upwind ? "upwind1" : "central-rk3") << "/o" << order;
  return os.str();
}

const char* to_string(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

nlohmann::json PdeSolution::metadata() const {
  const Grid& g = u.grid();
  nlohmann::json h = nlohmann::json::array();
  for (int a = 0; a < g.dim; ++a) h.push_back(g.h(a));
  return {{"scheme", scheme.id()},     {"direction", to_string(direction)}, {"dt", g.dt()},
          {"dt_internal", dt_internal}, {"substeps", substeps},              {"h", h},
          {"residual_norm", residual_norm}};
}

namespace detail {

namespace {

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

Stepper::Stepper(const Grid& grid, const SchemeOptions& scheme, const GridFunction& drift,
                 const GridFunction& forcing, bool reversed, std::size_t substeps)
    : grid_(grid), scheme_(scheme), drift_(drift), forcing_(forcing), reversed_(reversed), substeps_(substeps) {
  require(grid_.nt >= 1, "solve: the grid needs at least one time step");
  tau_ = grid_.dt() / double(substeps_);
  periodic_ = grid_.boundary == Boundary::periodic;
  zero_drift_ = all_zero(drift_.values());
  zero_forcing_ = all_zero(forcing_.values());
  strides_ = grid_.strides();
  const std::size_t ns = grid_.spatial_size();
  std::vector<std::size_t> idx(grid_.dim);
  for (std::size_t i = 0; i < ns; ++i) {
    grid_.unflat(i, idx);
    bool act = true;
    for (int a = 0; a < grid_.dim; ++a) {
      if (periodic_) act = act && idx[a] + 1 < grid_.nx[a];
      else act = act && idx[a] > 0 && idx[a] + 1 < grid_.nx[a];
    }
    if (act) active_.push_back(i);
  }
  b_.assign(ns * std::size_t(grid_.dim), 0.0);
  f_.assign(ns, 0.0);
  k1_.assign(ns, 0.0);
  k2_.assign(ns, 0.0);
  k3_.assign(ns, 0.0);
  stage_.assign(ns, 0.0);
  const bool cn = scheme_.diffusion == DiffusionScheme::crank_nicolson;
  for (int a = 0; a < grid_.dim; ++a) {
    const double h = grid_.h(a);
    const std::size_t m = periodic_ ? grid_.nx[a] - 1 : grid_.nx[a] - 2;
    const double c = (cn ? 0.5 : 1.0) * tau_ / (h * h);
    implicit_.push_back(m > 0 ? std::make_unique<LineOperator>(m, c, scheme_.order, periodic_) : nullptr);
  }
}

void Stepper::load_fields(double s) {
  if (s == loaded_time_) return;
  loaded_time_ = s;
  const double t = physical_time(s);
  auto fill = [&](const GridFunction& src, std::vector<double>& dst) {
    const Grid& g = src.grid();
    if (g.is_static()) {
      auto v = src.level(0);
      std::copy(v.begin(), v.end(), dst.begin());
      return;
    }
    double pos = std::clamp((t - g.t0) / g.dt(), 0.0, double(g.nt));
    auto j = std::size_t(pos);
    if (j >= g.nt) j = g.nt - 1;
    const double w = pos - double(j);
    auto a = src.level(j), b = src.level(j + 1);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (1.0 - w) * a[i] + w * b[i];
  };
  if (!zero_drift_) fill(drift_, b_);
  if (!zero_forcing_) fill(forcing_, f_);
}

void Stepper::explicit_rhs(const std::vector<double>& u, std::vector<double>& out, bool with_forcing) {
  const int d = grid_.dim;
  const bool upwind = scheme_.advection == AdvectionScheme::upwind;
  const bool fourth = scheme_.order == 4;
  for (std::size_t i : active_) {
    double acc = with_forcing ? f_[i] : 0.0;
    if (!zero_drift_) {
      for (int a = 0; a < d; ++a) {
        const double ba = b_[i * std::size_t(d) + std::size_t(a)];
        if (ba == 0.0) continue;
        const std::size_t s = strides_[a], n = grid_.nx[a];
        const std::size_t k = (i / s) % n;
        auto at = [&](long o) -> double {
          long kk = long(k) + o;
          if (periodic_) {
            const long period = long(n) - 1;
            kk = ((kk % period) + period) % period;
          } else if (kk < 0 || kk >= long(n)) {
            return 0.0;
          }
          return u[i + std::size_t(kk - long(k)) * s];
        };
        const double h = grid_.h(a);
        double du;
        if (upwind) {
          du = ba > 0 ? (at(1) - u[i]) / h : (u[i] - at(-1)) / h;
        } else if (fourth && (periodic_ || (k >= 2 && k + 2 < n))) {
          du = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
        } else {
          du = (at(1) - at(-1)) / (2.0 * h);
        }
        acc += ba * du;
      }
    }
    out[i] = acc;
  }
}

void Stepper::advect(std::vector<double>& u, double s, double sigma) {
  if (zero_drift_ && zero_forcing_) return;
  if (scheme_.advection == AdvectionScheme::upwind) {
    load_fields(s);
    explicit_rhs(u, k1_, true);
    for (std::size_t i : active_) u[i] += sigma * k1_[i];
    enforce_boundary(u);
    return;
  }
  if (zero_drift_) {
    // pure forcing: Simpson's rule in time is exact for the linear-in-time samples
    load_fields(s);
    for (std::size_t i : active_) k1_[i] = f_[i];
    load_fields(s + 0.5 * sigma);
    for (std::size_t i : active_) k1_[i] += 4.0 * f_[i];
    load_fields(s + sigma);
    for (std::size_t i : active_) u[i] += sigma * (k1_[i] + f_[i]) / 6.0;
    enforce_boundary(u);
    return;
  }
  // SSP-RK3
  load_fields(s);
  explicit_rhs(u, k1_, true);
  stage_ = u;
  for (std::size_t i : active_) stage_[i] = u[i] + sigma * k1_[i];
  enforce_boundary(stage_);
  load_fields(s + sigma);
  explicit_rhs(stage_, k2_, true);
  for (std::size_t i : active_) stage_[i] = 0.75 * u[i] + 0.25 * (stage_[i] + sigma * k2_[i]);
  enforce_boundary(stage_);
  load_fields(s + 0.5 * sigma);
  explicit_rhs(stage_, k3_, true);
  for (std::size_t i : active_) u[i] = u[i] / 3.0 + 2.0 / 3.0 * (stage_[i] + sigma * k3_[i]);
  enforce_boundary(u);
}

void Stepper::diffuse(std::vector<double>& u, double tau) {
  const bool cn = scheme_.diffusion == DiffusionScheme::crank_nicolson;
  const int d = grid_.dim;
  std::vector<double> line, work;
  for (int a = 0; a < d; ++a) {
    const auto& op = implicit_[std::size_t(a)];
    if (!op) continue;
    const std::size_t n = grid_.nx[a], s = strides_[a];
    const std::size_t m = op->size();
    const std::size_t first = periodic_ ? 0 : 1;
    const double c = 0.5 * tau / (grid_.h(a) * grid_.h(a));
    const auto sten4 = d2_stencil(scheme_.order), sten2 = d2_stencil(2);
    line.resize(m);
    work.resize(m);
    // every line start: active in the other axes, index 0 along axis a
    for (std::size_t i0 : active_) {
      if ((i0 / s) % n != first) continue;
      for (std::size_t k = 0; k < m; ++k) line[k] = u[i0 + k * s];
      if (cn) {
        // rhs = (I + c D2) line
        for (std::size_t k = 0; k < m; ++k) {
          const bool near_face = !periodic_ && scheme_.order == 4 && (k == 0 || k + 1 == m);
          const auto& st = near_face ? sten2 : sten4;
          double acc = 0.0;
          for (int o = -2; o <= 2; ++o) {
            const double coef = st[std::size_t(o + 2)];
            if (coef == 0.0) continue;
            long kk = long(k) + o;
            if (periodic_) kk = (kk + long(m)) % long(m);
            else if (kk < 0 || kk >= long(m)) continue;
            acc += coef * line[std::size_t(kk)];
          }
          work[k] = line[k] + c * acc;
        }
      } else {
        work = line;
      }
      const double res = op->solve(work);
      max_residual_ = std::max(max_residual_, res);
      if (!(res <= scheme_.residual_tol))
        throw NumericalError("solve: implicit line solve residual exceeds tolerance");
      for (std::size_t k = 0; k < m; ++k) u[i0 + k * s] = work[k];
    }
    enforce_boundary(u);
  }
}

void Stepper::enforce_boundary(std::vector<double>& u) const {
  const std::size_t ns = grid_.spatial_size();
  std::vector<std::size_t> idx(grid_.dim);
  for (std::size_t i = 0; i < ns; ++i) {
    grid_.unflat(i, idx);
    if (periodic_) {
      std::size_t src = 0;
      bool dup = false;
      for (int a = 0; a < grid_.dim; ++a) {
        std::size_t k = idx[a];
        if (k + 1 == grid_.nx[a]) {
          k = 0;
          dup = true;
        }
        src += k * strides_[a];
      }
      if (dup) u[i] = u[src];
    } else {
      for (int a = 0; a < grid_.dim; ++a)
        if (idx[a] == 0 || idx[a] + 1 == grid_.nx[a]) {
          u[i] = 0.0;
          break;
        }
    }
  }
}

void Stepper::advance(std::vector<double>& u, std::size_t j) {
  const double s0 = grid_.time(j);
  for (std::size_t k = 0; k < substeps_; ++k) {
    const double s = s0 + double(k) * tau_;
    if (scheme_.diffusion == DiffusionScheme::implicit_euler) {
      advect(u, s, tau_);
      diffuse(u, tau_);
    } else {
      advect(u, s, 0.5 * tau_);
      diffuse(u, tau_);
      advect(u, s + 0.5 * tau_, 0.5 * tau_);
    }
  }
  for (std::size_t i : active_)
    if (!std::isfinite(u[i])) throw NumericalError("solve: non-finite solution value");
}

}  // namespace detail

namespace {

GridFunction check_field(const GridFunction& f, const Grid& g, std::size_t comps, const char* what) {
  if (!f.grid().same_space(g)) throw ValidationError(std::string("solve: ") + what + " lives on a different spatial grid");
  if (f.components() != comps) throw ValidationError(std::string("solve: ") + what + " has the wrong number of components");
  if (!f.grid().is_static()) {
    const Grid& fg = f.grid();
    if (fg.nt != g.nt || fg.t0 != g.t0 || fg.t1 != g.t1)
      throw ValidationError(std::string("solve: ") + what + " must be static or share the grid's time levels");
  }
  f.require_finite("solve");
  return f;
}

std::size_t pick_substeps(const Grid& g, const SchemeOptions& sc, const GridFunction& drift) {
  double bmax = 0.0;
  const std::size_t d = std::size_t(g.dim);
  const auto v = drift.values();
  for (std::size_t i = 0; i + d <= v.size(); i += d) {
    double s = 0.0;
    for (std::size_t a = 0; a < d; ++a) s += v[i + a] * v[i + a];
    bmax = std::max(bmax, std::sqrt(s));
  }
  const double dt = g.dt();
  if (bmax == 0.0) return sc.substeps == 0 ? 1 : sc.substeps;
  const double tau_max = sc.cfl * g.min_h() / bmax;
  if (sc.substeps == 0) return std::max<std::size_t>(1, std::size_t(std::ceil(dt / tau_max - 1e-12)));
  if (dt / double(sc.substeps) > tau_max * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "solve: stability violation, internal step " << dt / double(sc.substeps) << " exceeds the CFL bound "
       << tau_max << " (max|b| = " << bmax << ")";
    throw ValidationError(os.str());
  }
  return sc.substeps;
}

}  // namespace

PdeSolution solve(const PdeProblem& pb) {
  const Grid& g = pb.grid;
  g.validate();
  require(g.nt >= 1, "solve: the grid needs nt >= 1");
  require(pb.scheme.order == 2 || pb.scheme.order == 4, "solve: stencil order must be 2 or 4");
  require(pb.scheme.cfl > 0 && pb.scheme.cfl <= 1.0, "solve: cfl factor must lie in (0, 1]");

  PdeSolution sol;
  sol.direction = pb.direction;
  sol.scheme = pb.scheme;
  if (const auto* ad = std::get_if<drift::ApproxDrift>(&pb.drift)) {
    require(ad->dim() == g.dim, "solve: drift dimension differs from the grid");
    sol.drift = ad->base().autonomous ? ad->sample(g.spatial_only().with_time(0, g.t0, g.t1)) : ad->sample(g);
  } else {
    sol.drift = check_field(std::get<GridFunction>(pb.drift), g, std::size_t(g.dim), "drift");
  }
  pb.forcing.require_scalar("solve");
  sol.forcing = check_field(pb.forcing, g, 1, "forcing");

  sol.substeps = pick_substeps(g, pb.scheme, sol.drift);
  const bool reversed = pb.direction == Direction::backward;
  detail::Stepper stepper(g, pb.scheme, sol.drift, sol.forcing, reversed, sol.substeps);
  sol.dt_internal = stepper.tau();

  sol.u = GridFunction(g, 1);
  std::vector<double> u(g.spatial_size(), 0.0);
  if (pb.initial) {
    const auto& init = *pb.initial;
    init.require_scalar("solve");
    if (!init.grid().same_space(g) || !init.grid().is_static())
      throw ValidationError("solve: initial data must be a static field on the same spatial grid");
    init.require_finite("solve");
    auto v = init.level(0);
    std::copy(v.begin(), v.end(), u.begin());
    stepper.enforce_boundary(u);
  }
  auto store = [&](std::size_t j) {
    auto dst = sol.u.level(reversed ? g.nt - j : j);
    std::copy(u.begin(), u.end(), dst.begin());
  };
  store(0);
  for (std::size_t j = 0; j < g.nt; ++j) {
    stepper.advance(u, j);
    store(j + 1);
  }
  sol.residual_norm = stepper.max_residual();
  return sol;
}

StepCertificate step_residual(const PdeSolution& sol, const GridFunction& u) {
  const Grid& g = sol.u.grid();
  require(u.grid() == g, "step_residual: field grid differs from the solution grid");
  u.require_scalar("step_residual");
  const bool reversed = sol.direction == Direction::backward;
  detail::Stepper stepper(g, sol.scheme, sol.drift, sol.forcing, reversed, sol.substeps);
  StepCertificate cert;
  cert.max_residual = -1e300;
  double umax = 0.0, fmax = 0.0;
  for (double v : u.values()) umax = std::max(umax, std::abs(v));
  for (double v : sol.forcing.values()) fmax = std::max(fmax, std::abs(v));
  cert.scale = umax / (g.t1 - g.t0) + fmax;
  std::vector<double> cur(g.spatial_size());
  for (std::size_t j = 0; j < g.nt; ++j) {
    const std::size_t a = reversed ? g.nt - j : j, b = reversed ? g.nt - j - 1 : j + 1;
    auto va = u.level(a), vb = u.level(b);
    std::copy(va.begin(), va.end(), cur.begin());
    stepper.advance(cur, j);
    for (std::size_t i = 0; i < cur.size(); ++i)
      cert.max_residual = std::max(cert.max_residual, (vb[i] - cur[i]) / g.dt());
  }
  return cert;
}

double duality_value(const PdeSolution& backward, std::span<const double> x) {
  require(backward.direction == Direction::backward, "duality_value: needs a backward solution");
  const Grid& g = backward.u.grid();
  require(int(x.size()) == g.dim, "duality_value: point dimension mismatch");
  if (!g.contains(x)) throw ValidationError("duality_value: point lies outside the box");
  return interpolate_level(backward.u, 0, x);
}

}  // namespace csde::pde
