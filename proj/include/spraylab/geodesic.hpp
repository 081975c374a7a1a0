#pragma once

// Geodesic integration of a spray with inextendibility detection, and the
// variational (Jacobi) flow alongside it.

#include "spraylab/geometry.hpp"
#include "spraylab/integrator.hpp"
#include "spraylab/spray.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spraylab {

struct IntegratorControls {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step = kInf;
  double t_max = 1e3;
  double velocity_cap = 1e8;
  double boundary_margin = 1e-6;

  void validate() const {
    if (!(rtol >= 1e-14)) throw FieldError("rtol", "must be >= 1e-14");
    if (!(atol > 0.0)) throw FieldError("atol", "must be positive");
    if (!(max_step > 0.0)) throw FieldError("max_step", "must be positive");
    if (!(t_max > 0.0)) throw FieldError("t_max", "must be positive");
    if (!(velocity_cap > 0.0)) throw FieldError("velocity_cap", "must be positive");
    if (!(boundary_margin > 0.0)) throw FieldError("boundary_margin", "must be positive");
  }

  ode::Options ode_options() const {
    ode::Options o;
    o.rtol = rtol;
    o.atol = atol;
    o.max_step = max_step;
    return o;
  }
};

enum class Termination {
  ReachedParameter,  // hit the T_max honesty cap
  DomainExit,
  VelocityBlowup,
  EscapedSet,
  TargetHit,  // reached an explicitly requested parameter below T_max
  StepUnderflow,
};

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedParameter: return "ReachedParameter";
    case Termination::DomainExit: return "DomainExit";
    case Termination::VelocityBlowup: return "VelocityBlowup";
    case Termination::EscapedSet: return "EscapedSet";
    case Termination::TargetHit: return "TargetHit";
    case Termination::StepUnderflow: return "StepUnderflow";
  }
  return "?";
}

/// Sampled geodesic. Parameters t_k are the elapsed parameter (strictly
/// increasing from 0); the curve parameter is direction * t_k.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(int dim, int direction, ode::Solution sol, Termination term, int escaped_set)
      : dim_(dim), direction_(direction), sol_(std::move(sol)), termination_(term), escaped_set_(escaped_set) {}

  int dim() const noexcept { return dim_; }
  int direction() const noexcept { return direction_; }
  Termination termination() const noexcept { return termination_; }
  int escaped_set() const noexcept { return escaped_set_; }

  std::size_t size() const { return sol_.t.size(); }
  double param(std::size_t k) const { return sol_.t[k]; }
  Vec position(std::size_t k) const { return sol_.z[k].head(dim_); }
  Vec velocity(std::size_t k) const { return velocity_from(sol_.z[k]); }
  double end() const { return sol_.t.back(); }
  Vec final_position() const { return position(size() - 1); }
  Vec final_velocity() const { return velocity(size() - 1); }

  Vec position_at(double s) const { return sol_.at(s).head(dim_); }
  Vec velocity_at(double s) const { return velocity_from(sol_.at(s)); }

  /// Dense samples on [0, end()] with at most `spacing` between neighbours,
  /// merged with the accepted-step parameters.
  std::vector<double> sample_params(double spacing) const {
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < size(); ++k) {
      const double a = sol_.t[k], b = sol_.t[k + 1];
      const int m = std::max(1, static_cast<int>(std::ceil((b - a) / spacing)));
      for (int i = 0; i < m; ++i) out.push_back(a + (b - a) * i / m);
    }
    out.push_back(end());
    return out;
  }

  const ode::Solution& solution() const noexcept { return sol_; }

  /// Fundamental matrix of the variational system, when integrated with it.
  bool has_variational() const { return !sol_.z.empty() && sol_.z.front().size() == 2 * dim_ + 4 * dim_ * dim_; }
  Mat fundamental_at(double s) const {
    const Vec z = sol_.at(s);
    return Eigen::Map<const Mat>(z.data() + 2 * dim_, 2 * dim_, 2 * dim_);
  }
  /// d x(s) / d v, the upper-right block of the fundamental matrix.
  Mat position_velocity_block(double s) const { return fundamental_at(s).block(0, dim_, dim_, dim_); }

 private:
  // d/dt of the stored state is direction * (y, Y); the stored y is the curve velocity.
  Vec velocity_from(const Vec& z) const { return z.segment(dim_, dim_); }

  int dim_ = 0;
  int direction_ = 1;
  ode::Solution sol_;
  Termination termination_ = Termination::ReachedParameter;
  int escaped_set_ = -1;
};

namespace detail {

inline std::vector<ode::Event> geodesic_events(const Spray& s, const IntegratorControls& c,
                                               const std::vector<CompactSet>& stop_sets) {
  const int n = s.dim();
  std::vector<ode::Event> ev;
  const ChartDomain* dom = &s.domain();
  const double eta = c.boundary_margin;
  auto speed = [n](const Vec& z) { return z.segment(n, n).norm(); };
  if (!dom->is_whole_space()) {
    ev.push_back({[dom, eta, n](const Vec& z) { return dom->signed_distance(z.head(n)) - eta; }, speed});
  } else {
    ev.push_back({[](const Vec&) { return 1.0; }, nullptr});
  }
  const double cap = c.velocity_cap;
  ev.push_back({[cap, n](const Vec& z) { return cap - z.segment(n, n).norm(); }, nullptr});
  for (const CompactSet& k : stop_sets) {
    ev.push_back({[k, n](const Vec& z) { return k.depth(z.head(n)) + 1e-12; }, speed});
  }
  return ev;
}

inline Trajectory finish(const Spray& s, int direction, ode::Solution sol, bool has_target) {
  Termination term = Termination::ReachedParameter;
  int set = -1;
  switch (sol.stop) {
    case ode::Stop::Reached: term = has_target ? Termination::TargetHit : Termination::ReachedParameter; break;
    case ode::Stop::StepUnderflow:
    case ode::Stop::MaxSteps: term = Termination::StepUnderflow; break;
    case ode::Stop::Event:
      if (sol.event_index == 0) {
        term = Termination::DomainExit;
      } else if (sol.event_index == 1) {
        term = Termination::VelocityBlowup;
      } else {
        term = Termination::EscapedSet;
        set = sol.event_index - 2;
      }
      break;
  }
  return Trajectory(s.dim(), direction, std::move(sol), term, set);
}

inline void check_start(const Spray& s, const Vec& x0, const Vec& v0) {
  require_dim(x0, s.dim(), "initial point");
  require_dim(v0, s.dim(), "initial velocity");
  if (!s.domain().contains(x0)) throw Error("initial point is outside the domain of " + s.name());
  if (s.degree() && *s.degree() < 1.0 && v0.norm() == 0.0) {
    throw Error("zero initial velocity is not allowed for sprays of degree < 1");
  }
}

}  // namespace detail

struct GeodesicRequest {
  std::vector<CompactSet> stop_sets;
  /// Requested end parameter; reaching it (below T_max) terminates TargetHit.
  std::optional<double> t_end;
  int direction = 1;  // -1 integrates the ODE with negated parameter
};

inline Trajectory integrate_geodesic(const Spray& s, const Vec& x0, const Vec& v0, const IntegratorControls& c,
                                     const GeodesicRequest& req = {}) {
  c.validate();
  detail::check_start(s, x0, v0);
  const int n = s.dim();
  const double dir = req.direction >= 0 ? 1.0 : -1.0;
  const bool has_target = req.t_end && *req.t_end <= c.t_max;
  const double t_end = has_target ? *req.t_end : c.t_max;

  ode::Rhs rhs = [&s, n, dir](const Vec& z) {
    Vec dz(2 * n);
    dz.head(n) = dir * z.segment(n, n);
    dz.tail(n) = dir * s.accel(z.head(n), z.segment(n, n));
    return dz;
  };
  Vec z0(2 * n);
  z0 << x0, v0;
  ode::Solution sol = ode::integrate(rhs, z0, t_end, c.ode_options(), detail::geodesic_events(s, c, req.stop_sets));
  return detail::finish(s, req.direction >= 0 ? 1 : -1, std::move(sol), has_target);
}

/// Geodesic together with the 2n x 2n fundamental matrix of
/// dδx = δy, dδy = (∂Y/∂x) δx + (∂Y/∂y) δy, Φ(0) = I.
inline Trajectory integrate_with_variational(const Spray& s, const Vec& x0, const Vec& v0,
                                             const IntegratorControls& c, std::optional<double> t_end = std::nullopt,
                                             int direction = 1) {
  c.validate();
  detail::check_start(s, x0, v0);
  const int n = s.dim();
  const int w = 2 * n;
  const double dir = direction >= 0 ? 1.0 : -1.0;
  const bool has_target = t_end && *t_end <= c.t_max;
  const double t_stop = has_target ? *t_end : c.t_max;

  ode::Rhs rhs = [&s, n, w, dir](const Vec& z) {
    const Vec x = z.head(n), y = z.segment(n, n);
    Vec dz(w + w * w);
    dz.head(n) = dir * y;
    dz.segment(n, n) = dir * s.accel(x, y);
    Mat A = Mat::Zero(w, w);
    A.block(0, n, n, n).setIdentity();
    A.block(n, 0, n, n) = s.jacobian_x(x, y);
    A.block(n, n, n, n) = s.jacobian_y(x, y);
    Eigen::Map<const Mat> phi(z.data() + w, w, w);
    Eigen::Map<Mat>(dz.data() + w, w, w) = dir * (A * phi);
    return dz;
  };
  Vec z0(w + w * w);
  z0.head(n) = x0;
  z0.segment(n, n) = v0;
  Eigen::Map<Mat>(z0.data() + w, w, w).setIdentity();
  ode::Solution sol = ode::integrate(rhs, z0, t_stop, c.ode_options(), detail::geodesic_events(s, c, {}));
  return detail::finish(s, direction >= 0 ? 1 : -1, std::move(sol), has_target);
}

}  // namespace spraylab
