#pragma once

// Empirical verdicts, with numeric witnesses, for pseudoconvexity,
// disprisonment, geodesic convex hulls and geodesic connectedness.
//
// None of these are proofs. PASS/FAIL are numeric predicates over finitely
// many sampled geodesics; in particular an IMPRISONED flag only says that a
// sampled geodesic stayed in the test set for the whole parameter budget.

#include "spraylab/parallel.hpp"
#include "spraylab/shooting.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace spraylab {

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

struct ProbeGrid {
  int endpoints_per_axis = 3;  // level-0 count; level l uses (c-1)*2^l + 1
  int directions = 8;          // on the h-unit sphere
  int levels = 3;
  std::uint64_t seed = 0;
  IntegratorControls controls;
  ShootingStrategy strategy;
  long max_pairs = 50'000;     // per level; exceeding it gives INCONCLUSIVE
  double witness_threshold = 1e-2;
  int threads = 1;
  /// Extra explicit initial conditions for the disprisonment probe.
  std::vector<std::pair<Vec, Vec>> initial_conditions;

  void validate() const {
    if (endpoints_per_axis < 2) throw FieldError("endpoints_per_axis", "must be >= 2");
    if (directions < 2) throw FieldError("directions", "must be >= 2");
    if (levels < 2) throw FieldError("levels", "must be >= 2");
    if (!(witness_threshold > 0.0)) throw FieldError("witness_threshold", "must be positive");
    controls.validate();
  }

  int points_per_axis(int level) const { return (endpoints_per_axis - 1) * (1 << level) + 1; }
};

// --- segments and hulls ----------------------------------------------------------

struct SegmentRecord {
  Vec p, q;
  bool found = false;
  double min_distance = kInf;  // min distance_to_complement along the segment
  Vec closest;                 // where it is attained
  Box bounds;                  // bounding box of the sampled segment
  int starts_attempted = 0;
  double residual = kInf;
};

namespace detail {

/// Minimum of the domain distance along a connecting geodesic: dense samples at
/// spacing 0.01 of the parameter length, then golden-section refinement.
inline void measure_segment(const Spray& s, const Trajectory& tr, SegmentRecord& rec) {
  const ChartDomain& d = s.domain();
  const std::vector<double> ts = tr.sample_params(0.01 * tr.end());
  rec.bounds = Box{tr.position(0), tr.position(0)};
  std::size_t arg = 0;
  double best = kInf;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Vec x = tr.position_at(ts[i]);
    rec.bounds.lo = rec.bounds.lo.cwiseMin(x);
    rec.bounds.hi = rec.bounds.hi.cwiseMax(x);
    const double dist = d.signed_distance(x);
    if (dist < best) {
      best = dist;
      arg = i;
    }
  }
  double a = ts[arg > 0 ? arg - 1 : 0], b = ts[std::min(arg + 1, ts.size() - 1)];
  if (std::isfinite(best) && b > a) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    auto f = [&](double t) { return d.signed_distance(tr.position_at(t)); };
    for (int it = 0; it < 60 && b - a > 1e-13; ++it) {
      const double m1 = b - g * (b - a), m2 = a + g * (b - a);
      if (f(m1) < f(m2)) {
        b = m2;
      } else {
        a = m1;
      }
    }
    const double tm = 0.5 * (a + b);
    if (f(tm) < best) {
      best = f(tm);
      rec.closest = tr.position_at(tm);
    } else {
      rec.closest = tr.position_at(ts[arg]);
    }
  } else {
    rec.closest = tr.position_at(ts[arg]);
  }
  rec.min_distance = best;
}

inline SegmentRecord connect_segment(const Spray& s, const Vec& p, const Vec& q, const ProbeGrid& grid) {
  SegmentRecord rec;
  rec.p = p;
  rec.q = q;
  std::vector<StartDiagnostic> diags;
  auto res = connect(s, p, q, grid.strategy, grid.controls, &diags);
  rec.starts_attempted = static_cast<int>(diags.size());
  if (res) {
    rec.found = true;
    rec.residual = res->residual;
    measure_segment(s, res->trajectory, rec);
  }
  return rec;
}

inline Box inflate_box(const Box& b, double fraction) {
  const Vec ext = b.hi - b.lo;
  return Box{b.lo - fraction * ext, b.hi + fraction * ext};
}

inline std::vector<double> key_of(const Vec& p, const Vec& q) {
  std::vector<double> k(p.data(), p.data() + p.size());
  k.insert(k.end(), q.data(), q.data() + q.size());
  return k;
}

}  // namespace detail

struct HullLevel {
  int level = 0;
  int points = 0;
  long pairs = 0;
  long found = 0;
  long starts_attempted = 0;
  Box hull;                     // inflated bounding box up to this level
  double hull_volume = 0.0;
  double min_distance = kInf;   // over all found segments up to this level
  Vec witness_p, witness_q;     // argmin pair
  Vec witness_point;
  Verdict verdict = Verdict::Inconclusive;  // verdict using levels 0..level
};

struct HullEstimate {
  CompactSet hull;
  std::vector<HullLevel> levels;
  bool budget_exhausted = false;
  Box raw_bounds;  // uninflated bounding box of K and all found segments
};

/// Bounding box of K and every connecting geodesic found between grid points of
/// K, inflated by 5% of its extent, for each refinement level.
inline HullEstimate geodesic_hull(const Spray& s, const CompactSet& K, const ProbeGrid& grid) {
  grid.validate();
  if (K.empty()) throw Error("geodesic_hull: empty compact set");
  K.validate_in(s.domain());
  HullEstimate out;
  std::map<std::vector<double>, SegmentRecord> cache;
  Box raw = K.bounding_box();
  double min_d = kInf;
  Vec wp, wq, wx;
  long starts_total = 0;

  for (int level = 0; level < grid.levels; ++level) {
    const std::vector<Vec> pts = K.grid_points(grid.points_per_axis(level));
    HullLevel lv;
    lv.level = level;
    lv.points = static_cast<int>(pts.size());
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) pairs.emplace_back(i, j);
    lv.pairs = static_cast<long>(pairs.size());
    if (lv.pairs > grid.max_pairs) {
      out.budget_exhausted = true;
      break;
    }
    std::vector<std::size_t> todo;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (!cache.count(detail::key_of(pts[pairs[k].first], pts[pairs[k].second]))) todo.push_back(k);
    }
    std::vector<SegmentRecord> fresh(todo.size());
    parallel_for(todo.size(), grid.threads, [&](std::size_t i) {
      const auto& [a, b] = pairs[todo[i]];
      fresh[i] = detail::connect_segment(s, pts[a], pts[b], grid);
    });
    for (std::size_t i = 0; i < todo.size(); ++i) {
      const auto& [a, b] = pairs[todo[i]];
      starts_total += fresh[i].starts_attempted;
      cache.emplace(detail::key_of(pts[a], pts[b]), std::move(fresh[i]));
    }
    // reduce in pair order
    for (const auto& [a, b] : pairs) {
      const SegmentRecord& r = cache.at(detail::key_of(pts[a], pts[b]));
      if (!r.found) continue;
      ++lv.found;
      raw.lo = raw.lo.cwiseMin(r.bounds.lo);
      raw.hi = raw.hi.cwiseMax(r.bounds.hi);
      if (r.min_distance < min_d) {
        min_d = r.min_distance;
        wp = r.p;
        wq = r.q;
        wx = r.closest;
      }
    }
    lv.starts_attempted = starts_total;
    lv.hull = detail::inflate_box(raw, 0.05);
    lv.hull_volume = lv.hull.volume();
    lv.min_distance = min_d;
    lv.witness_p = wp;
    lv.witness_q = wq;
    lv.witness_point = wx;
    out.levels.push_back(std::move(lv));
  }
  out.raw_bounds = raw;
  if (!out.levels.empty()) out.hull = CompactSet({out.levels.back().hull}, K.margin());
  return out;
}

// --- pseudoconvexity --------------------------------------------------------------

struct PseudoconvexityWitness {
  int level = 0;
  Vec p, q;
  double min_distance = kInf;
};

struct PseudoconvexityReport {
  Verdict verdict = Verdict::Inconclusive;
  HullEstimate hull;
  std::vector<PseudoconvexityWitness> witnesses;  // FAIL only: per-level argmin pairs
  std::string reason;
};

namespace detail {

inline Verdict pseudoconvexity_rule(const std::vector<HullLevel>& lv, std::size_t upto, double thr, std::string* why) {
  if (upto < 1) {
    if (why) *why = "need at least two levels";
    return Verdict::Inconclusive;
  }
  const HullLevel& fin = lv[upto];
  const HullLevel& prev = lv[upto - 1];
  const double ratio = fin.min_distance / prev.min_distance;
  if (fin.min_distance < thr && ratio < 0.6) {
    if (why) *why = "segment distances to the boundary shrink under refinement";
    return Verdict::Fail;
  }
  const double growth = prev.hull_volume > 0.0 ? (fin.hull_volume - prev.hull_volume) / prev.hull_volume
                                               : (fin.hull_volume > 0.0 ? kInf : 0.0);
  if (growth < 0.01 && fin.min_distance > 10.0 * thr) {
    if (why) *why = "hull stable and segments bounded away from the boundary";
    return Verdict::Pass;
  }
  if (why) *why = "neither the witness rule nor the stability rule applies";
  return Verdict::Inconclusive;
}

}  // namespace detail

/// FAIL: witness distance below threshold at the finest level and shrinking by
/// a factor < 0.6 from the previous level. PASS: hull volume growth < 1% over the
/// last refinement and all segments further than 10x threshold from the
/// boundary. Otherwise INCONCLUSIVE.
inline PseudoconvexityReport pseudoconvexity_probe(const Spray& s, const CompactSet& K, const ProbeGrid& grid) {
  PseudoconvexityReport rep;
  rep.hull = geodesic_hull(s, K, grid);
  auto& lv = rep.hull.levels;
  for (std::size_t i = 0; i < lv.size(); ++i) lv[i].verdict = detail::pseudoconvexity_rule(lv, i, grid.witness_threshold, nullptr);
  if (rep.hull.budget_exhausted || lv.size() < static_cast<std::size_t>(grid.levels)) {
    rep.verdict = Verdict::Inconclusive;
    rep.reason = "pair budget exhausted";
    return rep;
  }
  rep.verdict = detail::pseudoconvexity_rule(lv, lv.size() - 1, grid.witness_threshold, &rep.reason);
  if (rep.verdict == Verdict::Fail) {
    for (const HullLevel& l : lv) rep.witnesses.push_back({l.level, l.witness_p, l.witness_q, l.min_distance});
  }
  return rep;
}

// --- disprisonment ----------------------------------------------------------------

struct DisprisonSample {
  Vec x, v;
  Termination forward = Termination::ReachedParameter;
  Termination backward = Termination::ReachedParameter;
  double forward_exit = kInf;   // parameter of first exit (escape or termination)
  double backward_exit = kInf;
  bool imprisoned = false;
  double dwell = 0.0;
  std::optional<double> period;  // set when a closed orbit carries the flag
  double radius_min = kInf;      // of |x| along the integrated halves
  double radius_max = 0.0;
};

struct DisprisonReport {
  Verdict verdict = Verdict::Inconclusive;
  std::vector<DisprisonSample> samples;
  std::vector<std::size_t> witnesses;  // indices of imprisoned samples
  double max_escape = 0.0;
  std::string reason;
};

/// First return of the state (x, y) to its initial value within
/// tol * (1 + |z0|), after having moved away by at least 100x that.
inline std::optional<double> periodic_return(const Trajectory& tr, double tol = 1e-8) {
  const auto& sol = tr.solution();
  if (sol.t.size() < 3) return std::nullopt;
  const int w = 2 * tr.dim();
  const Vec z0 = sol.z.front().head(w);
  const double eps = tol * (1.0 + z0.norm());
  auto dist = [&](double t) { return (sol.at(t).head(w) - z0).norm(); };
  bool left = false;
  const std::vector<double> ts = tr.sample_params(kInf);
  for (std::size_t k = 1; k + 1 < ts.size(); ++k) {
    const double d = dist(ts[k]);
    if (!left) {
      left = d > 100.0 * eps;
      continue;
    }
    // bracket a local minimum over [ts[k-1], ts[k+1]]
    if (d <= dist(ts[k - 1]) && d <= dist(ts[k + 1])) {
      double a = ts[k - 1], b = ts[k + 1];
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int it = 0; it < 100 && b - a > 1e-13 * std::max(1.0, b); ++it) {
        const double m1 = b - g * (b - a), m2 = a + g * (b - a);
        if (dist(m1) < dist(m2)) {
          b = m2;
        } else {
          a = m1;
        }
      }
      const double tm = 0.5 * (a + b);
      if (dist(tm) < eps) return tm;
    }
  }
  return std::nullopt;
}

namespace detail {

inline void radius_range(const Trajectory& tr, DisprisonSample& s) {
  for (double t : tr.sample_params(0.1)) {
    const double r = tr.position_at(t).norm();
    s.radius_min = std::min(s.radius_min, r);
    s.radius_max = std::max(s.radius_max, r);
  }
}

inline DisprisonSample disprison_sample(const Spray& sp, const CompactSet& K, const Vec& x, const Vec& v,
                                        const ProbeGrid& grid) {
  DisprisonSample out;
  out.x = x;
  out.v = v;
  GeodesicRequest req;
  req.stop_sets = {K};
  const Trajectory fw = integrate_geodesic(sp, x, v, grid.controls, req);
  req.direction = -1;
  const Trajectory bw = integrate_geodesic(sp, x, v, grid.controls, req);
  out.forward = fw.termination();
  out.backward = bw.termination();
  const double T = grid.controls.t_max;
  const bool fw_stays = out.forward == Termination::ReachedParameter;
  const bool bw_stays = out.backward == Termination::ReachedParameter;
  out.forward_exit = fw_stays ? kInf : fw.end();
  out.backward_exit = bw_stays ? kInf : bw.end();
  radius_range(fw, out);
  if (fw_stays && bw_stays) {
    out.imprisoned = true;
    out.dwell = T;
    radius_range(bw, out);
  } else if (fw_stays || bw_stays) {
    // A closed orbit inside K is its own continuation in both directions; this
    // covers orbits that are repelling in the other direction, along which
    // roundoff grows too fast to integrate for the whole budget.
    const Trajectory& kept = fw_stays ? fw : bw;
    if (auto per = periodic_return(kept)) {
      out.imprisoned = true;
      out.dwell = T;
      out.period = per;
    } else if (!fw_stays) {
      radius_range(fw, out);
    }
    if (!out.imprisoned && bw_stays) radius_range(bw, out);
  }
  return out;
}

}  // namespace detail

/// Samples (x, unit direction) over the level-0 grid of K plus any explicit
/// initial conditions and integrates both parameter directions with an escape
/// event on K. FAIL when some sample is imprisoned for the whole budget.
inline DisprisonReport disprisonment_probe(const Spray& s, const CompactSet& K, const ProbeGrid& grid) {
  grid.validate();
  if (K.empty()) throw Error("disprisonment_probe: empty compact set");
  K.validate_in(s.domain());
  std::vector<std::pair<Vec, Vec>> ics;
  Rng rng(grid.seed);
  const double offset = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const auto dirs = sphere_directions(s.dim(), grid.directions, offset, rng.next_u64());
  for (const Vec& x : K.grid_points(grid.endpoints_per_axis)) {
    for (const Vec& u : dirs) ics.emplace_back(x, u);
  }
  for (const auto& ic : grid.initial_conditions) ics.push_back(ic);

  DisprisonReport rep;
  rep.samples.resize(ics.size());
  parallel_for(ics.size(), grid.threads,
               [&](std::size_t i) { rep.samples[i] = detail::disprison_sample(s, K, ics[i].first, ics[i].second, grid); });

  bool unresolved = false;
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    const auto& smp = rep.samples[i];
    if (smp.imprisoned) rep.witnesses.push_back(i);
    for (double e : {smp.forward_exit, smp.backward_exit}) {
      if (std::isfinite(e)) rep.max_escape = std::max(rep.max_escape, e);
    }
    if (smp.forward == Termination::StepUnderflow || smp.backward == Termination::StepUnderflow) unresolved = true;
  }
  if (!rep.witnesses.empty()) {
    rep.verdict = Verdict::Fail;
    rep.reason = "sampled geodesic stayed in the set for the whole parameter budget";
  } else if (unresolved) {
    rep.verdict = Verdict::Inconclusive;
    rep.reason = "integration failed for some sample";
  } else {
    rep.verdict = Verdict::Pass;
    rep.reason = "every sampled geodesic left the set or terminated";
  }
  return rep;
}

// --- connectedness ------------------------------------------------------------------

struct SurveyPair {
  Vec p, q;
  bool connected = false;
  double residual = kInf;
  int starts_attempted = 0;
};

struct ConnectednessSurvey {
  double success_rate = 0.0;
  double max_residual = 0.0;  // over connected pairs
  std::vector<SurveyPair> pairs;
  std::vector<std::size_t> failures;
};

inline ConnectednessSurvey connectedness_survey(const Spray& s, const CompactSet& region, int pair_count,
                                                std::uint64_t seed, const ShootingStrategy& strategy,
                                                const IntegratorControls& controls, int threads = 1) {
  if (pair_count < 1) throw FieldError("pairs", "must be >= 1");
  Rng rng(seed);
  ConnectednessSurvey out;
  int guard = 0;
  while (static_cast<int>(out.pairs.size()) < pair_count && guard++ < 100 * pair_count) {
    auto p = region.sample(rng);
    auto q = region.sample(rng);
    if (!p || !q || *p == *q || !s.domain().contains(*p) || !s.domain().contains(*q)) continue;
    out.pairs.push_back({*p, *q});
  }
  parallel_for(out.pairs.size(), threads, [&](std::size_t i) {
    std::vector<StartDiagnostic> diags;
    auto r = connect(s, out.pairs[i].p, out.pairs[i].q, strategy, controls, &diags);
    out.pairs[i].starts_attempted = static_cast<int>(diags.size());
    if (r) {
      out.pairs[i].connected = true;
      out.pairs[i].residual = r->residual;
    }
  });
  std::size_t ok = 0;
  for (std::size_t i = 0; i < out.pairs.size(); ++i) {
    if (out.pairs[i].connected) {
      ++ok;
      out.max_residual = std::max(out.max_residual, out.pairs[i].residual);
    } else {
      out.failures.push_back(i);
    }
  }
  out.success_rate = out.pairs.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(out.pairs.size());
  return out;
}

}  // namespace spraylab
