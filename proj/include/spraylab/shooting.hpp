#pragma once

// Two-point connection by shooting on the exponential map.

#include "spraylab/exponential.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace spraylab {

struct ShootingStrategy {
  int multistart = 0;     // sphere directions; raised to 2n+1 when smaller
  double damping = 1.0;   // fraction of the Newton step tried first
  int max_iters = 30;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

struct ShootingResult {
  Vec v;
  double residual = kInf;
  int iterations = 0;
  bool converged = false;
  Trajectory trajectory;
  int start_index = -1;
  int starts_attempted = 0;
};

struct StartDiagnostic {
  Vec v0;
  double best_residual = kInf;
  int iterations = 0;
  bool converged = false;
  bool start_defined = false;
};

namespace detail {

struct ShotEval {
  bool ok = false;
  Vec residual;
  Mat jacobian;
  double norm = kInf;
};

inline ShotEval shoot(const Spray& s, const Vec& p, const Vec& q, const Vec& v, const IntegratorControls& c) {
  ShotEval e;
  if (!v.allFinite()) return e;
  const Trajectory tr = integrate_with_variational(s, p, v, c, 1.0);
  if (tr.termination() != Termination::TargetHit) return e;
  e.ok = true;
  e.residual = tr.final_position() - q;
  e.norm = e.residual.norm();
  e.jacobian = tr.position_velocity_block(1.0);
  return e;
}

inline std::vector<Vec> shooting_starts(const Vec& p, const Vec& q, const ShootingStrategy& st) {
  const int n = static_cast<int>(p.size());
  const int dirs = std::max(st.multistart, 2 * n + 1);
  const double dist = (q - p).norm();
  std::vector<Vec> starts{q - p};
  Rng rng(st.seed);
  const double offset = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (const Vec& u : sphere_directions(n, dirs, offset, rng.next_u64())) {
    for (double mag : {0.5, 1.0, 2.0}) starts.push_back(mag * dist * u);
  }
  return starts;
}

}  // namespace detail

/// Damped Newton on R(v) = exp_p(v) - q with a Levenberg-Marquardt fallback,
/// from the flat chord and then a seeded grid of sphere directions with
/// magnitudes {1/2, 1, 2}|q - p|. Returns the first converged start.
inline std::optional<ShootingResult> connect(const Spray& s, const Vec& p, const Vec& q, const ShootingStrategy& st,
                                             const IntegratorControls& c,
                                             std::vector<StartDiagnostic>* diagnostics = nullptr) {
  require_dim(p, s.dim(), "connect");
  require_dim(q, s.dim(), "connect");
  if (p == q) throw Error("connect: endpoints must differ");
  const int n = s.dim();
  const std::vector<Vec> starts = detail::shooting_starts(p, q, st);

  for (std::size_t si = 0; si < starts.size(); ++si) {
    StartDiagnostic diag;
    diag.v0 = starts[si];
    Vec v = starts[si];
    detail::ShotEval cur = detail::shoot(s, p, q, v, c);
    diag.start_defined = cur.ok;
    int it = 0;
    double mu = 0.0;
    int polish = 0;
    std::vector<double> history{cur.norm};
    while (cur.ok && it < st.max_iters) {
      if (cur.norm < st.tol) {
        if (polish >= 2 || cur.norm == 0.0) break;
      }
      ++it;
      bool accepted = false;
      const bool polishing = cur.norm < st.tol;
      // Newton with backtracking
      Eigen::FullPivLU<Mat> lu(cur.jacobian);
      if (lu.isInvertible()) {
        Vec step = -(lu.solve(cur.residual));
        double frac = st.damping;
        for (int b = 0; b < (polishing ? 1 : 5) && !accepted; ++b, frac *= 0.5) {
          detail::ShotEval cand = detail::shoot(s, p, q, v + frac * step, c);
          if (cand.ok && cand.norm < cur.norm) {
            v += frac * step;
            cur = std::move(cand);
            accepted = true;
            mu = 0.0;
          }
        }
      }
      // Levenberg-Marquardt: (JᵀJ + μI) δ = -JᵀR, μ grows x10 on rejection
      if (!accepted && !polishing) {
        const Mat JtJ = cur.jacobian.transpose() * cur.jacobian;
        const Vec g = cur.jacobian.transpose() * cur.residual;
        if (mu == 0.0) mu = 1e-3 * std::max(JtJ.diagonal().maxCoeff(), 1e-12);
        for (int b = 0; b < 10 && !accepted; ++b) {
          const Vec step = -(JtJ + mu * Mat::Identity(n, n)).ldlt().solve(g);
          detail::ShotEval cand = detail::shoot(s, p, q, v + step, c);
          if (cand.ok && cand.norm < cur.norm) {
            v += step;
            cur = std::move(cand);
            accepted = true;
            mu /= 10.0;
          } else {
            mu *= 10.0;
          }
        }
      }
      if (!accepted) break;
      if (cur.norm < st.tol) {
        ++polish;
      } else {
        // stagnation: less than 1% progress over five iterations
        history.push_back(cur.norm);
        if (history.size() > 5 && cur.norm > 0.99 * history[history.size() - 6]) break;
      }
    }
    diag.best_residual = cur.ok ? cur.norm : kInf;
    diag.iterations = it;
    diag.converged = cur.ok && cur.norm < st.tol;
    if (diagnostics) diagnostics->push_back(diag);
    if (diag.converged) {
      ShootingResult r;
      r.v = v;
      r.residual = cur.norm;
      r.iterations = it;
      r.converged = true;
      GeodesicRequest req;
      req.t_end = 1.0;
      r.trajectory = integrate_geodesic(s, p, v, c, req);
      r.start_index = static_cast<int>(si);
      r.starts_attempted = static_cast<int>(si) + 1;
      return r;
    }
  }
  return std::nullopt;
}

}  // namespace spraylab
