#pragma once

// JSON experiment configs. Every reader checks its object for unknown keys and
// reports problems as FieldError with the full key path.

#include "spraylab/catalog.hpp"
#include "spraylab/stability.hpp"

#include <json.hpp>

#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace spraylab::io {

using json = nlohmann::json;

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
inline std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline const json& expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw FieldError(path, "expected an object");
  return j;
}

inline void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  expect_object(j, path);
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw FieldError(join(path, k), "unknown key");
  }
}

inline const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

inline const json& need(const json& j, const std::string& path, const char* key) {
  const json* v = find(j, key);
  if (!v) throw FieldError(join(path, key), "missing required key");
  return *v;
}

/// A number, or one of the strings "-inf" / "inf".
inline double as_number(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw FieldError(path, "expected a number");
}

inline double finite_number(const json& v, const std::string& path) {
  const double x = as_number(v, path);
  if (!std::isfinite(x)) throw FieldError(path, "expected a finite number");
  return x;
}

inline double number(const json& j, const std::string& path, const char* key) {
  return finite_number(need(j, path, key), join(path, key));
}

inline double number_or(const json& j, const std::string& path, const char* key, double dflt) {
  const json* v = find(j, key);
  return v ? finite_number(*v, join(path, key)) : dflt;
}

inline long integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw FieldError(path, "expected an integer");
  return v.get<long>();
}

inline long integer_or(const json& j, const std::string& path, const char* key, long dflt) {
  const json* v = find(j, key);
  return v ? integer(*v, join(path, key)) : dflt;
}

inline std::uint64_t unsigned_integer(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw FieldError(path, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

inline std::string text(const json& j, const std::string& path, const char* key) {
  const json& v = need(j, path, key);
  if (!v.is_string()) throw FieldError(join(path, key), "expected a string");
  return v.get<std::string>();
}

inline Vec vector_of(const json& v, const std::string& path, int dim = -1, bool allow_inf = false) {
  if (!v.is_array()) throw FieldError(path, "expected an array of numbers");
  if (dim >= 0 && static_cast<int>(v.size()) != dim)
    throw FieldError(path, "expected " + std::to_string(dim) + " components");
  if (v.empty()) throw FieldError(path, "must not be empty");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = allow_inf ? as_number(v[i], index(path, i)) : finite_number(v[i], index(path, i));
  return out;
}

inline Vec vec_key(const json& j, const std::string& path, const char* key, int dim = -1) {
  return vector_of(need(j, path, key), join(path, key), dim);
}

template <class F>
auto rethrow_under(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const FieldError& e) {
    throw e.prefixed(path);
  }
}

// --- geometry ---------------------------------------------------------------------

inline Ball parse_ball(const json& j, const std::string& path, int dim) {
  allow_keys(j, path, {"center", "radius"});
  Ball b;
  b.center = vec_key(j, path, "center", dim);
  b.radius = as_number(need(j, path, "radius"), join(path, "radius"));
  if (!(b.radius > 0.0) || !std::isfinite(b.radius)) throw FieldError(join(path, "radius"), "radius must be positive and finite");
  return b;
}

/// {"axes": [[lo, hi], ...], "exclusions": [{"center": [...], "radius": r}]}
inline ChartDomain parse_domain(const json& j, const std::string& path) {
  allow_keys(j, path, {"axes", "exclusions"});
  const json& axes = need(j, path, "axes");
  const std::string ap = join(path, "axes");
  if (!axes.is_array() || axes.empty()) throw FieldError(ap, "expected a nonempty array of [lo, hi] pairs");
  const int n = static_cast<int>(axes.size());
  Vec lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    const Vec b = vector_of(axes[static_cast<std::size_t>(i)], index(ap, static_cast<std::size_t>(i)), 2, true);
    lo[i] = b[0];
    hi[i] = b[1];
  }
  std::vector<Ball> ex;
  if (const json* e = find(j, "exclusions")) {
    const std::string ep = join(path, "exclusions");
    if (!e->is_array()) throw FieldError(ep, "expected an array");
    for (std::size_t k = 0; k < e->size(); ++k) {
      ex.push_back(parse_ball((*e)[k], index(ep, k), n));
    }
  }
  return rethrow_under(path, [&] { return ChartDomain(lo, hi, ex); });
}

/// Either {"lo": [...], "hi": [...], "margin": m} or
/// {"boxes": [{"lo", "hi"}, ...], "holes": [...], "margin": m}.
inline CompactSet parse_compact(const json& j, const std::string& path, int dim) {
  expect_object(j, path);
  const double margin = number_or(j, path, "margin", 1e-3);
  std::vector<Box> boxes;
  std::vector<Ball> holes;
  if (find(j, "boxes")) {
    allow_keys(j, path, {"boxes", "holes", "margin"});
    const json& bs = need(j, path, "boxes");
    const std::string bp = join(path, "boxes");
    if (!bs.is_array() || bs.empty()) throw FieldError(bp, "expected a nonempty array");
    for (std::size_t k = 0; k < bs.size(); ++k) {
      allow_keys(bs[k], index(bp, k), {"lo", "hi"});
      boxes.push_back({vec_key(bs[k], index(bp, k), "lo", dim), vec_key(bs[k], index(bp, k), "hi", dim)});
    }
    if (const json* h = find(j, "holes")) {
      if (!h->is_array()) throw FieldError(join(path, "holes"), "expected an array");
      for (std::size_t k = 0; k < h->size(); ++k) holes.push_back(parse_ball((*h)[k], index(join(path, "holes"), k), dim));
    }
  } else {
    allow_keys(j, path, {"lo", "hi", "margin"});
    boxes.push_back({vec_key(j, path, "lo", dim), vec_key(j, path, "hi", dim)});
  }
  return rethrow_under(path, [&] { return CompactSet(boxes, margin, holes); });
}

// --- sprays --------------------------------------------------------------------------

inline Spray parse_spray(const json& j, const std::string& path) {
  expect_object(j, path);
  const std::string kind = text(j, path, "kind");
  if (kind == "catalog") {
    allow_keys(j, path, {"kind", "name", "parameters"});
    const std::string name = text(j, path, "name");
    Params p;
    if (const json* ps = find(j, "parameters")) {
      expect_object(*ps, join(path, "parameters"));
      for (const auto& [k, v] : ps->items()) p[k] = finite_number(v, join(join(path, "parameters"), k));
    }
    try {
      return make_catalog_spray(name, p);
    } catch (const FieldError& e) {
      if (e.path() == "name" || e.path().starts_with("parameters.")) throw e.prefixed(path);
      throw e.prefixed(join(path, "parameters"));
    }
  }
  if (kind == "metric") {
    allow_keys(j, path, {"kind", "name", "dimension"});
    const std::string name = text(j, path, "name");
    const int n = static_cast<int>(integer_or(j, path, "dimension", 2));
    if (n < 1) throw FieldError(join(path, "dimension"), "must be >= 1");
    if (name == "euclidean") return spray_from_metric(euclidean_metric(n), ChartDomain::whole(n), "metric:euclidean");
    if (name == "minkowski") {
      if (n < 2) throw FieldError(join(path, "dimension"), "must be >= 2");
      return spray_from_metric(minkowski_metric(n), ChartDomain::whole(n), "metric:minkowski");
    }
    if (n != 2) throw FieldError(join(path, "dimension"), "this metric is two-dimensional");
    if (name == "half-plane")
      return spray_from_metric(half_plane_metric(), ChartDomain::strip(2, 1, 0.0, kInf), "metric:half-plane");
    if (name == "sphere-strip") {
      const double h = std::numbers::pi / 2;
      return spray_from_metric(sphere_strip_metric(), ChartDomain::strip(2, 0, -h, h), "metric:sphere-strip");
    }
    throw FieldError(join(path, "name"), "unknown metric '" + name + "'");
  }
  if (kind == "flow") {
    allow_keys(j, path, {"kind", "name"});
    const std::string name = text(j, path, "name");
    if (name == "rotation") return spray_from_flow(rotation_field(), ChartDomain::whole(2), "flow:rotation");
    if (name == "limit-cycle") return spray_from_flow(limit_cycle_field(), ChartDomain::whole(2), "flow:limit-cycle");
    throw FieldError(join(path, "name"), "unknown flow '" + name + "'");
  }
  if (kind == "pullback") {
    allow_keys(j, path, {"kind", "cover", "base"});
    const Spray base = parse_spray(need(j, path, "base"), join(path, "base"));
    const json& c = need(j, path, "cover");
    const std::string cp = join(path, "cover");
    expect_object(c, cp);
    const std::string ck = text(c, cp, "kind");
    if (ck == "identity") {
      allow_keys(c, cp, {"kind"});
      return pullback_spray(CoveringMap::identity(base.dim()), base);
    }
    if (ck == "cylinder") {
      allow_keys(c, cp, {"kind", "period", "axis"});
      return rethrow_under(cp, [&] {
        return pullback_spray(CoveringMap::cylinder(base.dim(), number_or(c, "", "period", 2.0 * std::numbers::pi),
                                                    static_cast<int>(integer_or(c, "", "axis", 1))),
                              base);
      });
    }
    throw FieldError(join(cp, "kind"), "unknown cover '" + ck + "'");
  }
  throw FieldError(join(path, "kind"), "unknown spray kind '" + kind + "'");
}

// --- controls, strategy, grid --------------------------------------------------------

inline IntegratorControls parse_controls(const json* j, const std::string& path) {
  IntegratorControls c;
  if (!j) return c;
  allow_keys(*j, path, {"rtol", "atol", "max_step", "t_max", "velocity_cap", "boundary_margin"});
  auto pos = [&](const char* key, double& out) {
    if (const json* v = find(*j, key)) {
      out = as_number(*v, join(path, key));
      if (!(out > 0.0)) throw FieldError(join(path, key), "must be positive");
    }
  };
  pos("rtol", c.rtol);
  pos("atol", c.atol);
  pos("max_step", c.max_step);
  pos("t_max", c.t_max);
  pos("velocity_cap", c.velocity_cap);
  pos("boundary_margin", c.boundary_margin);
  if (!std::isfinite(c.t_max)) throw FieldError(join(path, "t_max"), "must be finite");
  if (c.rtol < 1e-14) throw FieldError(join(path, "rtol"), "must be >= 1e-14");
  return c;
}

inline ShootingStrategy parse_strategy(const json* j, const std::string& path, std::uint64_t seed) {
  ShootingStrategy s;
  s.seed = seed;
  if (!j) return s;
  allow_keys(*j, path, {"multistart", "damping", "max_iters", "tol"});
  s.multistart = static_cast<int>(integer_or(*j, path, "multistart", s.multistart));
  s.damping = number_or(*j, path, "damping", s.damping);
  s.max_iters = static_cast<int>(integer_or(*j, path, "max_iters", s.max_iters));
  s.tol = number_or(*j, path, "tol", s.tol);
  if (s.multistart < 0) throw FieldError(join(path, "multistart"), "must be >= 0");
  if (!(s.damping > 0.0 && s.damping <= 1.0)) throw FieldError(join(path, "damping"), "must be in (0, 1]");
  if (s.max_iters < 1) throw FieldError(join(path, "max_iters"), "must be >= 1");
  if (!(s.tol > 0.0)) throw FieldError(join(path, "tol"), "must be positive");
  return s;
}

inline std::vector<std::pair<Vec, Vec>> parse_initial_conditions(const json& j, const std::string& path, int dim) {
  if (!j.is_array()) throw FieldError(path, "expected an array");
  std::vector<std::pair<Vec, Vec>> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string p = index(path, k);
    allow_keys(j[k], p, {"x", "v"});
    out.emplace_back(vec_key(j[k], p, "x", dim), vec_key(j[k], p, "v", dim));
  }
  return out;
}

inline ProbeGrid parse_grid(const json* j, const std::string& path, int dim, std::uint64_t seed,
                            const IntegratorControls& c, const ShootingStrategy& st, int threads) {
  ProbeGrid g;
  g.seed = seed;
  g.controls = c;
  g.strategy = st;
  g.threads = threads;
  if (j) {
    allow_keys(*j, path,
               {"endpoints_per_axis", "directions", "levels", "max_pairs", "witness_threshold", "initial_conditions"});
    g.endpoints_per_axis = static_cast<int>(integer_or(*j, path, "endpoints_per_axis", g.endpoints_per_axis));
    g.directions = static_cast<int>(integer_or(*j, path, "directions", g.directions));
    g.levels = static_cast<int>(integer_or(*j, path, "levels", g.levels));
    g.max_pairs = integer_or(*j, path, "max_pairs", g.max_pairs);
    g.witness_threshold = number_or(*j, path, "witness_threshold", g.witness_threshold);
    if (const json* ic = find(*j, "initial_conditions"))
      g.initial_conditions = parse_initial_conditions(*ic, join(path, "initial_conditions"), dim);
  }
  rethrow_under(path, [&] {
    g.validate();
    return 0;
  });
  return g;
}

inline Bump parse_bump(const json& j, const std::string& path, int dim) {
  allow_keys(j, path, {"center", "radius", "fiber_center", "fiber_radius", "amplitude", "direction"});
  Bump b;
  b.center = vec_key(j, path, "center", dim);
  b.radius = number(j, path, "radius");
  b.fiber_center = vec_key(j, path, "fiber_center", dim);
  b.fiber_radius = number(j, path, "fiber_radius");
  b.amplitude = number(j, path, "amplitude");
  b.direction = vec_key(j, path, "direction", dim);
  return b;
}

/// The "bumps" array of `parent`.
inline std::vector<Bump> parse_bumps(const json& parent, const std::string& parent_path, int dim) {
  const json& j = need(parent, parent_path, "bumps");
  const std::string path = join(parent_path, "bumps");
  if (!j.is_array()) throw FieldError(path, "expected an array");
  std::vector<Bump> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(parse_bump(j[k], index(path, k), dim));
  BumpPerturbation probe{out, 0.0};
  rethrow_under(parent_path, [&] {
    probe.validate(dim);
    return 0;
  });
  return out;
}

// --- experiment config --------------------------------------------------------------

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k{"integrate", "expmap", "connect", "conjugate", "probe-pc", "probe-dp",
                                          "hull",      "survey", "perturb", "stability", "rescale",  "identities"};
  return k;
}

inline bool sampled_kind(const std::string& kind) {
  return kind == "probe-pc" || kind == "probe-dp" || kind == "hull" || kind == "survey" || kind == "perturb" ||
         kind == "stability" || kind == "identities" || kind == "connect";
}

struct ExperimentConfig {
  std::string kind;
  std::optional<std::uint64_t> seed;
  Spray spray = make_catalog_spray("flat-plane");
  IntegratorControls controls;
  json experiment;  // kind-specific block, validated by the runner
  std::optional<std::string> output;
};

/// Top level: {"spray", "domain"?, "controls"?, "seed"?, "output"?, "experiment": {"kind", ...}}.
inline ExperimentConfig parse_config(const json& root, std::optional<std::uint64_t> seed_override = std::nullopt) {
  allow_keys(root, "", {"spray", "domain", "controls", "seed", "output", "experiment"});
  ExperimentConfig cfg;
  const json& ex = need(root, "", "experiment");
  expect_object(ex, "experiment");
  cfg.kind = text(ex, "experiment", "kind");
  if (std::find(experiment_kinds().begin(), experiment_kinds().end(), cfg.kind) == experiment_kinds().end())
    throw FieldError("experiment.kind", "unknown experiment kind '" + cfg.kind + "'");
  cfg.experiment = ex;
  if (const json* s = find(root, "seed")) cfg.seed = unsigned_integer(*s, "seed");
  if (seed_override) cfg.seed = seed_override;
  if (sampled_kind(cfg.kind) && !cfg.seed) throw FieldError("seed", "a seed is required for sampled experiments");
  if (const json* o = find(root, "output")) {
    if (!o->is_string()) throw FieldError("output", "expected a string");
    cfg.output = o->get<std::string>();
  }
  std::optional<ChartDomain> domain;
  if (const json* d = find(root, "domain")) domain = parse_domain(*d, "domain");
  cfg.spray = parse_spray(need(root, "", "spray"), "spray");
  if (domain) {
    if (domain->dim() != cfg.spray.dim()) throw FieldError("domain.axes", "dimension differs from the spray");
    cfg.spray = cfg.spray.on_domain(*domain);
  }
  cfg.controls = parse_controls(find(root, "controls"), "controls");
  return cfg;
}

}  // namespace spraylab::io
