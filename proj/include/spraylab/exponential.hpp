#pragma once

// Exponential map, its linearization, conjugate points and parameter-law probes.

#include "spraylab/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace spraylab {

struct ExpResult {
  std::optional<Vec> point;
  Termination reason = Termination::TargetHit;

  bool exists() const { return point.has_value(); }
};

/// exp_p(v) = c_v(1), or the reason c_v stops before parameter 1.
inline ExpResult exp_map(const Spray& s, const Vec& p, const Vec& v, const IntegratorControls& c) {
  GeodesicRequest req;
  req.t_end = 1.0;
  const Trajectory tr = integrate_geodesic(s, p, v, c, req);
  if (tr.termination() == Termination::TargetHit) return {tr.final_position(), Termination::TargetHit};
  return {std::nullopt, tr.termination()};
}

class InextendibleError : public Error {
 public:
  explicit InextendibleError(Termination t)
      : Error(std::string("geodesic is inextendible before parameter 1: ") + to_string(t)), reason(t) {}
  Termination reason;
};

/// D_v exp_p, read from the variational flow at parameter 1.
inline Mat exp_jacobian(const Spray& s, const Vec& p, const Vec& v, const IntegratorControls& c) {
  const Trajectory tr = integrate_with_variational(s, p, v, c, 1.0);
  if (tr.termination() != Termination::TargetHit) throw InextendibleError(tr.termination());
  return tr.position_velocity_block(1.0);
}

struct LocalDiffeoVerdict {
  bool nonsingular = false;
  double det = 0.0;
  double scale = 0.0;  // max row norm of the Jacobian
};

inline LocalDiffeoVerdict is_local_diffeo_at(const Spray& s, const Vec& p, const Vec& v, const IntegratorControls& c) {
  const Mat J = exp_jacobian(s, p, v, c);
  LocalDiffeoVerdict out;
  out.det = J.determinant();
  out.scale = J.rowwise().norm().maxCoeff();
  out.nonsingular = std::abs(out.det) > 1e-8 * std::pow(out.scale, static_cast<double>(J.rows()));
  return out;
}

struct ConjugateScan {
  std::optional<double> first;
  std::vector<double> t;
  std::vector<double> normalized_det;  // det / running max |det|
  Termination termination = Termination::TargetHit;
};

/// Watches d(t) = det(∂c_v(t)/∂v) along c_v and reports the first sign change
/// or near-zero (|d| < 1e-10 * running max) after t = 0.
inline ConjugateScan conjugate_scan(const Spray& s, const Vec& p, const Vec& v, double t_max,
                                    const IntegratorControls& c) {
  ConjugateScan out;
  const Trajectory tr = integrate_with_variational(s, p, v, c, t_max);
  out.termination = tr.termination();
  auto det_at = [&](double t) { return tr.position_velocity_block(t).determinant(); };

  // four dense samples per accepted step
  std::vector<double> ts;
  const auto& sol = tr.solution();
  for (std::size_t k = 0; k + 1 < sol.t.size(); ++k) {
    for (int i = 1; i <= 4; ++i) ts.push_back(sol.t[k] + (sol.t[k + 1] - sol.t[k]) * i / 4.0);
  }

  double running = 0.0;
  double prev_t = 0.0, prev_d = 0.0;
  for (double t : ts) {
    const double d = det_at(t);
    running = std::max(running, std::abs(d));
    out.t.push_back(t);
    out.normalized_det.push_back(running > 0 ? d / running : 0.0);
    if (prev_t > 0.0 && running > 0.0) {
      if ((d > 0) != (prev_d > 0) && d != 0.0 && prev_d != 0.0) {
        double a = prev_t, b = t;
        const bool pos_a = prev_d > 0;
        for (int it = 0; it < 100 && b - a > 1e-14 * std::max(1.0, b); ++it) {
          const double m = 0.5 * (a + b);
          ((det_at(m) > 0) == pos_a ? a : b) = m;
        }
        out.first = 0.5 * (a + b);
        return out;
      }
      if (std::abs(d) < 1e-10 * running) {
        // double root: refine the minimum of |d| by golden section
        double a = prev_t, b = std::min(t + (t - prev_t), tr.end());
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
          const double m1 = b - g * (b - a), m2 = a + g * (b - a);
          if (std::abs(det_at(m1)) < std::abs(det_at(m2))) {
            b = m2;
          } else {
            a = m1;
          }
        }
        out.first = 0.5 * (a + b);
        return out;
      }
    }
    prev_t = t;
    prev_d = d;
  }
  return out;
}

inline std::optional<double> first_conjugate_parameter(const Spray& s, const Vec& p, const Vec& v, double t_max,
                                                       const IntegratorControls& c) {
  return conjugate_scan(s, p, v, t_max, c).first;
}

struct RescalingReport {
  bool affine_mode = false;     // pointwise comparison (declared degree 2)
  double discrepancy = kInf;    // pointwise or one-sided Hausdorff
  double window = 0.0;          // compared parameter window of c_{λv}
  double fitted_exponent = 0.0; // k minimising max_t |c_{λv}(t) - c_v(λ^k t)|
  double fitted_discrepancy = kInf;
};

/// Compares c_{λv} with c_v. Degree 2: c_{λv}(t) against c_v(λt) pointwise.
/// Otherwise: max over samples of c_{λv} of the distance to the sampled path of c_v.
inline RescalingReport rescaling_probe(const Spray& s, const Vec& p, const Vec& v, double lambda,
                                       const IntegratorControls& c, double window = 1.0, int samples = 200) {
  if (!(lambda > 0.0)) throw Error("rescaling_probe: lambda must be positive");
  RescalingReport out;
  IntegratorControls cc = c;
  cc.t_max = std::max(1.0, lambda) * window * 1.5 + 1.0;
  GeodesicRequest r1;
  r1.t_end = std::max(1.0, lambda) * window;
  const Trajectory base = integrate_geodesic(s, p, v, cc, r1);
  GeodesicRequest r2;
  r2.t_end = window;
  const Trajectory scaled = integrate_geodesic(s, p, lambda * v, cc, r2);
  const double w = std::min({window, scaled.end(), base.end() / lambda});
  out.window = w;
  out.affine_mode = s.degree() && *s.degree() == 2.0;

  auto law_error = [&](double k) {
    const double f = std::pow(lambda, k);
    if (f * w > base.end()) return kInf;
    double e = 0.0;
    for (int i = 0; i <= samples; ++i) {
      const double t = w * i / samples;
      e = std::max(e, (scaled.position_at(t) - base.position_at(f * t)).norm());
    }
    return e;
  };

  if (out.affine_mode) {
    out.discrepancy = law_error(1.0);
  } else {
    std::vector<Vec> path;
    for (double t : base.sample_params(base.end() / (4.0 * samples))) path.push_back(base.position_at(t));
    double h = 0.0;
    for (int i = 0; i <= samples; ++i) {
      const Vec q = scaled.position_at(w * i / samples);
      double best = kInf;
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        // distance to the polyline segment
        const Vec ab = path[k + 1] - path[k];
        const double L2 = ab.squaredNorm();
        const double u = L2 > 0 ? std::clamp((q - path[k]).dot(ab) / L2, 0.0, 1.0) : 0.0;
        best = std::min(best, (q - path[k] - u * ab).norm());
      }
      h = std::max(h, best);
    }
    out.discrepancy = h;
  }

  // golden-section fit of the reparametrization exponent on [0, 3]
  double a = 0.0, b = 3.0;
  if (lambda > 1.0 && w > 0.0) b = std::min(b, std::log(base.end() / w) / std::log(lambda));
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80 && b - a > 1e-10; ++it) {
    const double m1 = b - g * (b - a), m2 = a + g * (b - a);
    if (law_error(m1) < law_error(m2)) {
      b = m2;
    } else {
      a = m1;
    }
  }
  out.fitted_exponent = 0.5 * (a + b);
  out.fitted_discrepancy = law_error(out.fitted_exponent);
  return out;
}

struct ExpScalingRow {
  double t = 0.0;
  double vs_power_law = kInf;  // |exp_p(tv) - c_v(t^m)|
  double vs_linear_law = kInf; // |exp_p(tv) - c_v(t)|
};

/// Measures exp_p(tv) against the two candidate laws c_v(t^m) and c_v(t).
inline std::vector<ExpScalingRow> exp_scaling_probe(const Spray& s, const Vec& p, const Vec& v,
                                                    const std::vector<double>& ts, const IntegratorControls& c) {
  if (!s.degree()) throw Error("exp_scaling_probe: spray has no declared degree");
  const double m = *s.degree();
  double t_far = 1.0;
  for (double t : ts) t_far = std::max({t_far, t, std::pow(t, m)});
  GeodesicRequest req;
  req.t_end = t_far;
  IntegratorControls cc = c;
  cc.t_max = std::max(c.t_max, t_far);
  const Trajectory base = integrate_geodesic(s, p, v, cc, req);
  std::vector<ExpScalingRow> rows;
  for (double t : ts) {
    ExpScalingRow r;
    r.t = t;
    const ExpResult e = exp_map(s, p, t * v, c);
    if (e.exists()) {
      if (std::pow(t, m) <= base.end()) r.vs_power_law = (*e.point - base.position_at(std::pow(t, m))).norm();
      if (t <= base.end()) r.vs_linear_law = (*e.point - base.position_at(t)).norm();
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace spraylab
