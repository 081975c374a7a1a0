#pragma once

// Report serialization ("spraylab/1" JSON) and CSV tables.

#include "spraylab/catalog.hpp"
#include "spraylab/stability.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace spraylab::io {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kSchema = "spraylab/1";

/// Finite doubles as numbers; infinities and NaN as strings so they survive JSON.
inline ojson num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline ojson to_json(const Vec& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

inline ojson to_json(const Mat& m) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vec(m.row(i).transpose())));
  return a;
}

template <class T>
ojson opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_arithmetic_v<T>) {
    return num(static_cast<double>(*v));
  } else {
    return to_json(*v);
  }
}

inline ojson to_json(const Box& b) { return ojson{{"lo", to_json(b.lo)}, {"hi", to_json(b.hi)}}; }

inline ojson to_json(const Ball& b) { return ojson{{"center", to_json(b.center)}, {"radius", num(b.radius)}}; }

inline ojson to_json(const CompactSet& k) {
  ojson boxes = ojson::array(), holes = ojson::array();
  for (const Box& b : k.boxes()) boxes.push_back(to_json(b));
  for (const Ball& h : k.holes()) holes.push_back(to_json(h));
  return ojson{{"boxes", boxes}, {"holes", holes}, {"margin", num(k.margin())}};
}

inline ojson to_json(const ChartDomain& d) {
  ojson axes = ojson::array();
  for (int i = 0; i < d.dim(); ++i) axes.push_back(ojson::array({num(d.lo()[i]), num(d.hi()[i])}));
  ojson ex = ojson::array();
  for (const Ball& b : d.exclusions()) ex.push_back(to_json(b));
  return ojson{{"axes", axes}, {"exclusions", ex}};
}

inline ojson to_json(const IntegratorControls& c) {
  return ojson{{"rtol", num(c.rtol)},         {"atol", num(c.atol)},
               {"max_step", num(c.max_step)}, {"t_max", num(c.t_max)},
               {"velocity_cap", num(c.velocity_cap)}, {"boundary_margin", num(c.boundary_margin)}};
}

inline ojson to_json(const ShootingStrategy& s) {
  return ojson{{"multistart", s.multistart}, {"damping", num(s.damping)}, {"max_iters", s.max_iters},
               {"tol", num(s.tol)},          {"seed", s.seed}};
}

inline ojson to_json(const ProbeGrid& g) {
  ojson ics = ojson::array();
  for (const auto& [x, v] : g.initial_conditions) ics.push_back(ojson{{"x", to_json(x)}, {"v", to_json(v)}});
  return ojson{{"endpoints_per_axis", g.endpoints_per_axis},
               {"directions", g.directions},
               {"levels", g.levels},
               {"max_pairs", g.max_pairs},
               {"witness_threshold", num(g.witness_threshold)},
               {"seed", g.seed},
               {"initial_conditions", ics},
               {"controls", to_json(g.controls)},
               {"strategy", to_json(g.strategy)}};
}

inline ojson spray_json(const Spray& s) {
  return ojson{{"name", s.name()},
               {"dimension", s.dim()},
               {"degree", s.degree() ? num(*s.degree()) : ojson(nullptr)},
               {"domain", to_json(s.domain())}};
}

// --- probes -------------------------------------------------------------------------

inline ojson to_json(const HullLevel& l) {
  return ojson{{"level", l.level},
               {"points", l.points},
               {"pairs", l.pairs},
               {"found", l.found},
               {"starts_attempted", l.starts_attempted},
               {"hull", to_json(l.hull)},
               {"hull_volume", num(l.hull_volume)},
               {"min_distance", num(l.min_distance)},
               {"witness_p", to_json(l.witness_p)},
               {"witness_q", to_json(l.witness_q)},
               {"witness_point", to_json(l.witness_point)},
               {"verdict", to_string(l.verdict)}};
}

inline ojson to_json(const HullEstimate& h) {
  ojson levels = ojson::array();
  for (const auto& l : h.levels) levels.push_back(to_json(l));
  return ojson{{"hull", h.hull.empty() ? ojson(nullptr) : to_json(h.hull)},
               {"raw_bounds", to_json(h.raw_bounds)},
               {"budget_exhausted", h.budget_exhausted},
               {"levels", levels}};
}

inline ojson to_json(const PseudoconvexityReport& r) {
  ojson w = ojson::array();
  for (const auto& x : r.witnesses)
    w.push_back(ojson{{"level", x.level}, {"p", to_json(x.p)}, {"q", to_json(x.q)}, {"min_distance", num(x.min_distance)}});
  ojson h = to_json(r.hull);
  ojson out{{"verdict", to_string(r.verdict)}, {"reason", r.reason}, {"witnesses", w}};
  out["levels"] = h["levels"];
  out["hull"] = h["hull"];
  out["raw_bounds"] = h["raw_bounds"];
  out["budget_exhausted"] = h["budget_exhausted"];
  return out;
}

inline ojson to_json(const DisprisonSample& s) {
  return ojson{{"x", to_json(s.x)},
               {"v", to_json(s.v)},
               {"forward", to_string(s.forward)},
               {"backward", to_string(s.backward)},
               {"forward_exit", num(s.forward_exit)},
               {"backward_exit", num(s.backward_exit)},
               {"imprisoned", s.imprisoned},
               {"dwell", num(s.dwell)},
               {"period", opt(s.period)},
               {"radius_min", num(s.radius_min)},
               {"radius_max", num(s.radius_max)}};
}

inline ojson to_json(const DisprisonReport& r) {
  ojson w = ojson::array(), samples = ojson::array();
  for (std::size_t i : r.witnesses) w.push_back(ojson{{"sample", i}, {"detail", to_json(r.samples[i])}});
  for (const auto& s : r.samples) samples.push_back(to_json(s));
  return ojson{{"verdict", to_string(r.verdict)}, {"reason", r.reason},       {"witnesses", w},
               {"levels", ojson::array()},         {"max_escape", num(r.max_escape)}, {"samples", samples}};
}

inline ojson to_json(const ConnectednessSurvey& s) {
  ojson failures = ojson::array();
  for (std::size_t i : s.failures)
    failures.push_back(ojson{{"pair", i}, {"p", to_json(s.pairs[i].p)}, {"q", to_json(s.pairs[i].q)}});
  return ojson{{"pairs", s.pairs.size()},
               {"success_rate", num(s.success_rate)},
               {"max_residual", num(s.max_residual)},
               {"failures", failures}};
}

// --- stability ------------------------------------------------------------------------

inline ojson to_json(const Bump& b) {
  return ojson{{"center", to_json(b.center)},     {"radius", num(b.radius)},       {"fiber_center", to_json(b.fiber_center)},
               {"fiber_radius", num(b.fiber_radius)}, {"amplitude", num(b.amplitude)}, {"direction", to_json(b.direction)}};
}

inline ojson to_json(const EscapeReport& r) {
  ojson inap = ojson::array(), samples = ojson::array();
  for (std::size_t i : r.inapplicable) inap.push_back(i);
  for (const auto& s : r.samples)
    samples.push_back(ojson{{"x", to_json(s.x)},
                            {"v", to_json(s.v)},
                            {"applicable", s.applicable},
                            {"escape_parameter", num(s.escape_parameter)},
                            {"perturbed_escaped", s.perturbed_escaped},
                            {"max_distance", num(s.max_distance)}});
  return ojson{{"verdict", to_string(r.verdict)}, {"reason", r.reason}, {"bound", num(r.bound)},
               {"max_distance", num(r.max_distance)}, {"inapplicable", inap}, {"samples", samples}};
}

inline ojson to_json(const BarrierReport& r) {
  ojson pats = ojson::array(), never = ojson::array();
  for (std::size_t k = 0; k < r.patterns.size(); ++k) {
    const auto& p = r.patterns[k];
    pats.push_back(ojson{{"sample", r.offending[k]}, {"n", p.n}, {"first", p.first}, {"middle", p.middle}, {"last", p.last}});
  }
  for (int n : r.never_reached) never.push_back(n);
  return ojson{{"verdict", to_string(r.verdict)}, {"trajectories", r.trajectories}, {"witnesses", pats},
               {"never_reached", never},           {"notes", r.notes}};
}

inline ojson to_json(const StabilityRow& row) {
  ojson out{{"amplitude", num(row.amplitude)},
            {"c0_distance", num(row.c0_distance)},
            {"pseudoconvexity", to_string(row.pseudoconvexity.verdict)},
            {"disprisonment", to_string(row.disprisonment.verdict)},
            {"escape_persistence", row.escape ? ojson(to_string(row.escape->verdict)) : ojson(nullptr)},
            {"barrier", row.barrier ? ojson(to_string(row.barrier->verdict)) : ojson(nullptr)},
            {"all_pass", row.all_pass()}};
  out["details"] = ojson{{"pseudoconvexity", to_json(row.pseudoconvexity)},
                         {"disprisonment", to_json(row.disprisonment)},
                         {"escape_persistence", row.escape ? to_json(*row.escape) : ojson(nullptr)},
                         {"barrier", row.barrier ? to_json(*row.barrier) : ojson(nullptr)}};
  return out;
}

// --- CSV ------------------------------------------------------------------------------

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// t, x_1..x_n, y_1..y_n, termination; one row per accepted step, the code only
/// on the last row. t is the elapsed parameter, also for backward runs.
inline std::string trajectory_csv(const Trajectory& tr) {
  std::ostringstream os;
  const int n = tr.dim();
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x_" << i;
  for (int i = 1; i <= n; ++i) os << ",y_" << i;
  os << ",termination\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    os << fmt(tr.param(k));
    const Vec x = tr.position(k), y = tr.velocity(k);
    for (int i = 0; i < n; ++i) os << ',' << fmt(x[i]);
    for (int i = 0; i < n; ++i) os << ',' << fmt(y[i]);
    os << ',';
    if (k + 1 == tr.size()) os << to_string(tr.termination());
    os << '\n';
  }
  return os.str();
}

}  // namespace spraylab::io
