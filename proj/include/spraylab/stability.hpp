#pragma once

// Homogeneous bump perturbations on the unit sphere bundle and the stability
// experiments built on them.

#include "spraylab/probes.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace spraylab {

/// Fixed C^2 cutoff: 1 on [0, 1/2], 0 on [1, inf), quintic smoothstep between.
inline double cutoff(double s) {
  if (s <= 0.5) return 1.0;
  if (s >= 1.0) return 0.0;
  // 1 - P(u) = P(1 - u) for P(u) = 6u^5 - 15u^4 + 10u^3; this form keeps full
  // relative accuracy in the tail
  const double w = 2.0 * (1.0 - s);
  return w * w * w * (10.0 + w * (-15.0 + 6.0 * w));
}

struct Bump {
  Vec center;          // x_c
  double radius = 1.0; // rho_x
  Vec fiber_center;    // u_c, unit
  double fiber_radius = 1.0;
  double amplitude = 0.0;
  Vec direction;       // d

  /// b(x, u) for a unit u.
  Vec value(const Vec& x, const Vec& u) const {
    const double w = cutoff((x - center).norm() / radius) * cutoff((u - fiber_center).norm() / fiber_radius);
    return (amplitude * w) * direction;
  }
};

struct BumpPerturbation {
  std::vector<Bump> bumps;
  double degree = 2.0;

  void validate(int n) const {
    if (!(degree >= 0.0)) throw FieldError("degree", "must be nonnegative");
    for (std::size_t k = 0; k < bumps.size(); ++k) {
      const Bump& b = bumps[k];
      const std::string at = "bumps[" + std::to_string(k) + "].";
      if (b.center.size() != n) throw FieldError(at + "center", "dimension mismatch");
      if (b.fiber_center.size() != n) throw FieldError(at + "fiber_center", "dimension mismatch");
      if (b.direction.size() != n) throw FieldError(at + "direction", "dimension mismatch");
      if (!(b.radius > 0.0) || !std::isfinite(b.radius)) throw FieldError(at + "radius", "must be positive");
      if (!(b.fiber_radius > 0.0) || !std::isfinite(b.fiber_radius))
        throw FieldError(at + "fiber_radius", "must be positive");
      if (std::abs(b.fiber_center.norm() - 1.0) > 1e-9) throw FieldError(at + "fiber_center", "must be a unit vector");
      if (!std::isfinite(b.amplitude)) throw FieldError(at + "amplitude", "must be finite");
      if (!all_finite(b.center) || !all_finite(b.direction)) throw FieldError(at + "center", "must be finite");
    }
  }

  /// B(x, y) = |y|^m b(x, y/|y|), B(x, 0) = 0.
  Vec operator()(const Vec& x, const Vec& y) const {
    Vec out = Vec::Zero(x.size());
    const double r = y.norm();
    if (r == 0.0) return out;
    const Vec u = y / r;
    for (const Bump& b : bumps) out += b.value(x, u);
    return std::pow(r, degree) * out;
  }
};

/// S' with Y' = Y + B. Zero-amplitude bumps are dropped, so an all-zero
/// perturbation evaluates exactly like S.
inline Spray perturb(const Spray& s, const BumpPerturbation& p) {
  p.validate(s.dim());
  if (!s.degree()) throw Error("perturb: spray has no declared degree");
  if (*s.degree() != p.degree) throw Error("perturb: degree mismatch between spray and perturbation");
  BumpPerturbation live = p;
  std::erase_if(live.bumps, [](const Bump& b) { return b.amplitude == 0.0; });
  const std::string name = s.name() + "+bumps(" + std::to_string(live.bumps.size()) + ")";
  if (live.bumps.empty()) return s.renamed(name);

  const FiberField base = s.field();
  const Spray bump_only("bump", s.domain(), FiberField(live), p.degree);
  FiberField accel = [base, live](const Vec& x, const Vec& y) -> Vec { return base(x, y) + live(x, y); };
  Spray out(name, s.domain(), accel, s.degree());
  FiberJacobian jx, jy;
  if (s.has_jacobian_x()) {
    jx = [jb = s.analytic_jacobian_x(), bump_only](const Vec& x, const Vec& y) -> Mat {
      return jb(x, y) + bump_only.jacobian_x(x, y);
    };
  }
  if (s.has_jacobian_y()) {
    jy = [jb = s.analytic_jacobian_y(), bump_only](const Vec& x, const Vec& y) -> Mat {
      return jb(x, y) + bump_only.jacobian_y(x, y);
    };
  }
  return out.with_jacobians(jx, jy);
}

/// Re-extends the unit-sphere restriction of S homogeneously with degree m.
inline Spray reextend(const Spray& s, double m) {
  if (!(m >= 0.0)) throw Error("reextend: degree must be nonnegative");
  const FiberField base = s.field();
  FiberField f = [base, m](const Vec& x, const Vec& y) -> Vec {
    const double r = y.norm();
    if (r == 0.0) return Vec::Zero(y.size());
    return std::pow(r, m) * base(x, y / r);
  };
  return Spray(s.name() + "@m=" + std::to_string(m).substr(0, 4), s.domain(), f, m);
}

// --- C0-fine distance ------------------------------------------------------------

struct UnitSamples {
  std::vector<Vec> points;
  std::vector<Vec> directions;
};

/// Deterministic base points (a grid plus seeded points) and unit directions.
inline UnitSamples unit_bundle_samples(const CompactSet& K, int sample_count, std::uint64_t seed) {
  UnitSamples out;
  if (K.empty()) return out;
  const int n = K.dim();
  const int per_axis = std::max(2, static_cast<int>(std::ceil(std::pow(std::max(1, sample_count), 1.0 / n))));
  out.points = K.grid_points(per_axis);
  Rng rng(seed);
  for (int i = 0; i < sample_count; ++i) {
    if (auto p = K.sample(rng)) out.points.push_back(*p);
  }
  const int dirs = n == 1 ? 2 : 64;
  out.directions = sphere_directions(n, dirs, rng.uniform(0.0, 2.0 * std::numbers::pi), rng.next_u64());
  return out;
}

inline double sup_unit_distance(const Spray& a, const Spray& b, const UnitSamples& smp) {
  double sup = 0.0;
  for (const Vec& x : smp.points) {
    if (!a.domain().contains(x) || !b.domain().contains(x)) continue;
    for (const Vec& u : smp.directions) sup = std::max(sup, (b.accel(x, u) - a.accel(x, u)).norm());
  }
  return sup;
}

/// sup over sampled (x, u), x in K and |u| = 1, of |Y'(x,u) - Y(x,u)|.
inline double c0_fine_distance(const Spray& s, const Spray& s2, const CompactSet& K, int sample_count,
                               std::uint64_t seed, bool allow_cross_degree = false) {
  if (s.dim() != s2.dim()) throw Error("c0_fine_distance: dimension mismatch");
  if (!allow_cross_degree && s.degree() != s2.degree()) throw Error("c0_fine_distance: degree mismatch");
  return sup_unit_distance(s, s2, unit_bundle_samples(K, sample_count, seed));
}

struct FineNeighborhoodSpec {
  std::vector<double> epsilons;  // eps_1, eps_2, ...
  double tail = 0.0;             // eps_n beyond the list; 0 means last listed value

  void validate() const {
    if (epsilons.empty()) throw FieldError("epsilons", "must not be empty");
    for (std::size_t k = 0; k < epsilons.size(); ++k) {
      if (!(epsilons[k] > 0.0)) throw FieldError("epsilons[" + std::to_string(k) + "]", "must be positive");
      if (k > 0 && epsilons[k] > epsilons[k - 1])
        throw FieldError("epsilons[" + std::to_string(k) + "]", "sequence must be nonincreasing");
    }
    if (tail < 0.0 || (tail > 0.0 && tail > epsilons.back())) throw FieldError("tail", "must not exceed the last value");
  }
  double at(int n) const {
    if (n <= static_cast<int>(epsilons.size())) return epsilons[static_cast<std::size_t>(n - 1)];
    return tail > 0.0 ? tail : epsilons.back();
  }
};

struct ShellMargin {
  int shell = 0;         // A_n minus A_{n-1}; shell 1 is A_1
  double distance = 0.0;
  double epsilon = 0.0;
  double margin = 0.0;   // epsilon - distance
  int points = 0;
};

struct FineNeighborhoodResult {
  bool inside = true;
  std::vector<ShellMargin> shells;
};

inline FineNeighborhoodResult in_fine_neighborhood(const Spray& s, const Spray& s2, const FineNeighborhoodSpec& spec,
                                                   const ChartDomain& domain, int samples_per_shell = 400,
                                                   std::uint64_t seed = 0) {
  spec.validate();
  FineNeighborhoodResult out;
  std::optional<CompactSet> inner;
  for (int n = 1; n <= static_cast<int>(spec.epsilons.size()); ++n) {
    const CompactSet A = compact_exhaustion(domain, n);
    UnitSamples smp = unit_bundle_samples(A, samples_per_shell, seed + static_cast<std::uint64_t>(n));
    if (inner) std::erase_if(smp.points, [&](const Vec& p) { return inner->contains(p); });
    ShellMargin m;
    m.shell = n;
    m.points = static_cast<int>(smp.points.size());
    m.distance = sup_unit_distance(s, s2, smp);
    m.epsilon = spec.at(n);
    m.margin = m.epsilon - m.distance;
    if (!(m.distance < m.epsilon)) out.inside = false;
    out.shells.push_back(m);
    inner = A;
  }
  return out;
}

// --- escape persistence -------------------------------------------------------------

struct EscapeSample {
  Vec x, v;
  bool applicable = true;   // S-geodesic left K2
  double escape_parameter = kInf;
  bool perturbed_escaped = false;
  double max_distance = 0.0;
};

struct EscapeReport {
  Verdict verdict = Verdict::Inconclusive;
  double bound = 0.0;
  double max_distance = 0.0;
  std::vector<EscapeSample> samples;
  std::vector<std::size_t> inapplicable;
  std::string reason;
};

/// K1 must lie in the interior of K2. For each sampled (x, u) over K1, a_i is
/// the exit parameter of the S-geodesic from K2 inflated by exit_depth; S and S'
/// are then integrated identically on [0, a_i] and compared.
inline EscapeReport escape_persistence_experiment(const Spray& s, const Spray& s2, const CompactSet& K1,
                                                  const CompactSet& K2, const ProbeGrid& grid, double bound,
                                                  double exit_depth = 0.05) {
  grid.validate();
  if (!(bound > 0.0)) throw FieldError("bound", "must be positive");
  K1.validate_in(s.domain());
  K2.validate_in(s.domain());
  for (const Vec& p : K1.grid_points(9)) {
    if (!(K2.depth(p) >= K1.margin())) throw FieldError("K1", "must lie in the interior of K2");
  }
  const CompactSet outer = K2.inflated(exit_depth);
  Rng rng(grid.seed);
  const double offset = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<std::pair<Vec, Vec>> ics;
  for (const Vec& x : K1.grid_points(grid.endpoints_per_axis))
    for (const Vec& u : sphere_directions(s.dim(), grid.directions, offset, rng.next_u64())) ics.emplace_back(x, u);
  for (const auto& ic : grid.initial_conditions) ics.push_back(ic);

  EscapeReport rep;
  rep.bound = bound;
  rep.samples.resize(ics.size());
  parallel_for(ics.size(), grid.threads, [&](std::size_t i) {
    EscapeSample& e = rep.samples[i];
    e.x = ics[i].first;
    e.v = ics[i].second;
    GeodesicRequest probe;
    probe.stop_sets = {outer};
    const Trajectory first = integrate_geodesic(s, e.x, e.v, grid.controls, probe);
    const Termination t = first.termination();
    if (t != Termination::EscapedSet && t != Termination::DomainExit) {
      e.applicable = false;
      return;
    }
    e.escape_parameter = first.end();
    GeodesicRequest leg;
    leg.t_end = e.escape_parameter;
    const Trajectory a = integrate_geodesic(s, e.x, e.v, grid.controls, leg);
    const Trajectory b = integrate_geodesic(s2, e.x, e.v, grid.controls, leg);
    const double common = std::min(a.end(), b.end());
    for (double tt : a.sample_params(0.01)) {
      if (tt > common) break;
      e.max_distance = std::max(e.max_distance, (a.position_at(tt) - b.position_at(tt)).norm());
    }
    e.perturbed_escaped = !K2.contains(b.final_position());
  });

  bool all_escaped = true;
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    const EscapeSample& e = rep.samples[i];
    if (!e.applicable) {
      rep.inapplicable.push_back(i);
      continue;
    }
    all_escaped = all_escaped && e.perturbed_escaped;
    rep.max_distance = std::max(rep.max_distance, e.max_distance);
  }
  if (!rep.inapplicable.empty()) {
    rep.verdict = Verdict::Inconclusive;
    rep.reason = "some S-geodesics did not leave K2 within the parameter budget";
  } else if (all_escaped && rep.max_distance < bound) {
    rep.verdict = Verdict::Pass;
    rep.reason = "all perturbed geodesics escaped and stayed within the bound";
  } else {
    rep.verdict = Verdict::Fail;
    rep.reason = all_escaped ? "perturbed geodesics deviate beyond the bound" : "some perturbed geodesic is still in K2";
  }
  return rep;
}

// --- shell barrier ---------------------------------------------------------------------

struct BarrierPattern {
  int n = 0;  // 1-based exhaustion index
  std::size_t first = 0, middle = 0, last = 0;
};

/// Looks for points i < j < k with p_i in A_n, p_j in A_{n+4} minus A_{n+3} and
/// p_k in A_n. `prefix[0]` is A_1.
inline std::optional<BarrierPattern> find_barrier_pattern(const std::vector<Vec>& pts,
                                                          const std::vector<CompactSet>& prefix) {
  const int L = static_cast<int>(prefix.size());
  for (int n = 1; n + 4 <= L; ++n) {
    const CompactSet& An = prefix[static_cast<std::size_t>(n - 1)];
    const CompactSet& outer = prefix[static_cast<std::size_t>(n + 3)];
    const CompactSet& below = prefix[static_cast<std::size_t>(n + 2)];
    int stage = 0;
    BarrierPattern pat{n, 0, 0, 0};
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (stage == 0 && An.contains(pts[i])) {
        pat.first = i;
        stage = 1;
      } else if (stage == 1 && outer.contains(pts[i]) && !below.contains(pts[i])) {
        pat.middle = i;
        stage = 2;
      } else if (stage == 2 && An.contains(pts[i])) {
        pat.last = i;
        return pat;
      }
    }
  }
  return std::nullopt;
}

struct BarrierOptions {
  bool backward = true;
  double spacing = 0.05;  // parameter spacing of the scanned samples
};

struct BarrierReport {
  Verdict verdict = Verdict::Pass;
  int trajectories = 0;
  std::vector<BarrierPattern> patterns;
  std::vector<std::size_t> offending;  // sample indices
  std::vector<int> never_reached;      // n whose shell A_{n+4} minus A_{n+3} no trajectory entered
  std::vector<std::string> notes;
};

/// Scans sampled S'-geodesics started on the first nonempty A_n for the
/// forbidden in/out/in pattern.
inline BarrierReport barrier_experiment(const Spray& s, const std::vector<CompactSet>& prefix, const ProbeGrid& grid,
                                        const BarrierOptions& opt = {}) {
  grid.validate();
  if (prefix.size() < 5) throw FieldError("exhaustion", "prefix length must be >= 5");
  if (!(opt.spacing > 0.0)) throw FieldError("spacing", "must be positive");
  Rng rng(grid.seed);
  const double offset = rng.uniform(0.0, 2.0 * std::numbers::pi);
  // thin domains can have empty first sets (A_1 of the unit strip), so start
  // on the first nonempty one
  std::size_t start = 0;
  while (start < prefix.size() && prefix[start].grid_points(grid.endpoints_per_axis).empty()) ++start;
  if (start == prefix.size()) throw FieldError("exhaustion", "every set of the prefix is empty");
  std::vector<std::pair<Vec, Vec>> ics;
  for (const Vec& x : prefix[start].grid_points(grid.endpoints_per_axis))
    for (const Vec& u : sphere_directions(s.dim(), grid.directions, offset, rng.next_u64())) ics.emplace_back(x, u);
  for (const auto& ic : grid.initial_conditions) ics.push_back(ic);

  const int L = static_cast<int>(prefix.size());
  std::vector<std::optional<BarrierPattern>> found(ics.size());
  std::vector<std::vector<char>> reached(ics.size(), std::vector<char>(static_cast<std::size_t>(L + 1), 0));
  parallel_for(ics.size(), grid.threads, [&](std::size_t i) {
    const auto& [x, v] = ics[i];
    std::vector<Vec> pts;
    if (opt.backward) {
      GeodesicRequest req;
      req.direction = -1;
      const Trajectory bw = integrate_geodesic(s, x, v, grid.controls, req);
      const auto ts = bw.sample_params(opt.spacing);
      for (auto it = ts.rbegin(); it != ts.rend(); ++it) pts.push_back(bw.position_at(*it));
      pts.pop_back();  // the start point comes again from the forward leg
    }
    const Trajectory fw = integrate_geodesic(s, x, v, grid.controls, {});
    for (double t : fw.sample_params(opt.spacing)) pts.push_back(fw.position_at(t));
    found[i] = find_barrier_pattern(pts, prefix);
    for (const Vec& p : pts) {
      for (int n = 1; n + 4 <= L; ++n) {
        if (prefix[static_cast<std::size_t>(n + 3)].contains(p) && !prefix[static_cast<std::size_t>(n + 2)].contains(p))
          reached[i][static_cast<std::size_t>(n)] = 1;
      }
    }
  });

  BarrierReport rep;
  rep.trajectories = static_cast<int>(ics.size());
  if (start > 0) rep.notes.push_back("started on A_" + std::to_string(start + 1) + ", the first nonempty set");
  for (std::size_t i = 0; i < found.size(); ++i) {
    if (found[i]) {
      rep.patterns.push_back(*found[i]);
      rep.offending.push_back(i);
    }
  }
  for (int n = 1; n + 4 <= L; ++n) {
    bool any = false;
    for (const auto& r : reached) any = any || r[static_cast<std::size_t>(n)];
    if (!any) {
      rep.never_reached.push_back(n);
      rep.notes.push_back("never reached shell " + std::to_string(n + 4) + " (n = " + std::to_string(n) + ")");
    }
  }
  rep.verdict = rep.patterns.empty() ? Verdict::Pass : Verdict::Fail;
  return rep;
}

// --- joint stability ----------------------------------------------------------------------

struct EscapePlan {
  CompactSet K1, K2;
  double bound = 1.0;
};

struct StabilityPlan {
  ProbeGrid grid;
  CompactSet K;
  std::vector<Bump> bumps;          // amplitudes are scaled per row
  std::vector<double> amplitudes;
  int c0_samples = 400;
  std::optional<EscapePlan> escape;
  std::optional<std::vector<CompactSet>> barrier_prefix;
  BarrierOptions barrier_options;
};

struct StabilityRow {
  double amplitude = 0.0;
  double c0_distance = 0.0;
  PseudoconvexityReport pseudoconvexity;
  DisprisonReport disprisonment;
  std::optional<EscapeReport> escape;
  std::optional<BarrierReport> barrier;

  bool all_pass() const {
    return pseudoconvexity.verdict == Verdict::Pass && disprisonment.verdict == Verdict::Pass &&
           (!escape || escape->verdict == Verdict::Pass) && (!barrier || barrier->verdict == Verdict::Pass);
  }
};

struct StabilityReport {
  PseudoconvexityReport baseline_pseudoconvexity;
  DisprisonReport baseline_disprisonment;
  bool precondition = false;  // both baseline probes PASS
  std::vector<StabilityRow> rows;
  std::optional<double> largest_passing_amplitude;
};

/// Bump amplitudes are multiplied by each listed amplitude, so bumps in the plan
/// are usually given with amplitude 1.
inline BumpPerturbation scaled_family(const std::vector<Bump>& bumps, double amplitude, double degree) {
  BumpPerturbation p;
  p.degree = degree;
  p.bumps = bumps;
  for (Bump& b : p.bumps) b.amplitude *= amplitude;
  return p;
}

inline StabilityReport joint_stability_experiment(const Spray& s, const StabilityPlan& plan) {
  if (!s.degree()) throw Error("joint_stability_experiment: spray has no declared degree");
  if (plan.amplitudes.empty()) throw FieldError("amplitudes", "must not be empty");
  StabilityReport rep;
  rep.baseline_pseudoconvexity = pseudoconvexity_probe(s, plan.K, plan.grid);
  rep.baseline_disprisonment = disprisonment_probe(s, plan.K, plan.grid);
  rep.precondition =
      rep.baseline_pseudoconvexity.verdict == Verdict::Pass && rep.baseline_disprisonment.verdict == Verdict::Pass;
  bool prefix_ok = true;
  for (double a : plan.amplitudes) {
    StabilityRow row;
    row.amplitude = a;
    const Spray sp = perturb(s, scaled_family(plan.bumps, a, *s.degree()));
    row.c0_distance = c0_fine_distance(s, sp, plan.K, plan.c0_samples, plan.grid.seed);
    row.pseudoconvexity = pseudoconvexity_probe(sp, plan.K, plan.grid);
    row.disprisonment = disprisonment_probe(sp, plan.K, plan.grid);
    if (plan.escape) row.escape = escape_persistence_experiment(s, sp, plan.escape->K1, plan.escape->K2, plan.grid,
                                                                plan.escape->bound);
    if (plan.barrier_prefix) row.barrier = barrier_experiment(sp, *plan.barrier_prefix, plan.grid, plan.barrier_options);
    rep.rows.push_back(std::move(row));
  }
  // largest amplitude such that every amplitude up to it passes
  std::vector<std::size_t> order(rep.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(rep.rows[a].amplitude) < std::abs(rep.rows[b].amplitude); });
  for (std::size_t i : order) {
    prefix_ok = prefix_ok && rep.rows[i].all_pass();
    if (!prefix_ok) break;
    rep.largest_passing_amplitude = std::abs(rep.rows[i].amplitude);
  }
  return rep;
}

}  // namespace spraylab
