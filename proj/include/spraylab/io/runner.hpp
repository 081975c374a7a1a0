#pragma once

// Config-driven experiment runner: dispatch, report bundle, manifest, exit codes.
// Exit codes: 0 = ran and PASS (or the kind has no verdict), 1 = FAIL or
// INCONCLUSIVE, 2 = configuration or runtime error.

#include "spraylab/io/config.hpp"
#include "spraylab/io/report.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace spraylab::io {

inline constexpr const char* kVersion = "0.1.0";

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

/// Writes via a temporary file in the same directory and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.parent_path() / ("." + path.filename().string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write " + tmp.string());
    os << content;
    if (!os.flush()) throw Error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

struct Outcome {
  ojson result = ojson::object();
  std::optional<Verdict> verdict;
  ojson witnesses = ojson::array();
  ojson levels = ojson::array();
  std::vector<std::pair<std::string, std::string>> files;  // extra CSV outputs
};

struct RunOptions {
  std::optional<std::string> out;
  int threads = 1;
  std::optional<std::uint64_t> seed;
};

namespace detail {

inline const std::string kEx = "experiment";

inline std::uint64_t seed_of(const ExperimentConfig& c) { return c.seed.value_or(0); }

inline ProbeGrid grid_of(const ExperimentConfig& c, int threads) {
  const json& ex = c.experiment;
  const ShootingStrategy st = parse_strategy(find(ex, "strategy"), join(kEx, "strategy"), seed_of(c));
  return parse_grid(find(ex, "grid"), join(kEx, "grid"), c.spray.dim(), seed_of(c), c.controls, st, threads);
}

inline int direction_of(const json& ex) {
  const long d = integer_or(ex, kEx, "direction", 1);
  if (d != 1 && d != -1) throw FieldError(join(kEx, "direction"), "must be 1 or -1");
  return static_cast<int>(d);
}

inline Outcome run_integrate(const ExperimentConfig& c) {
  const json& ex = c.experiment;
  allow_keys(ex, kEx, {"kind", "x0", "v0", "t_end", "direction", "stop_sets"});
  const int n = c.spray.dim();
  GeodesicRequest req;
  req.direction = direction_of(ex);
  if (find(ex, "t_end")) req.t_end = number(ex, kEx, "t_end");
  if (const json* ss = find(ex, "stop_sets")) {
    if (!ss->is_array()) throw FieldError(join(kEx, "stop_sets"), "expected an array");
    for (std::size_t k = 0; k < ss->size(); ++k) {
      req.stop_sets.push_back(parse_compact((*ss)[k], index(join(kEx, "stop_sets"), k), n));
      rethrow_under(index(join(kEx, "stop_sets"), k), [&] {
        req.stop_sets.back().validate_in(c.spray.domain());
        return 0;
      });
    }
  }
  const Vec x0 = vec_key(ex, kEx, "x0", n), v0 = vec_key(ex, kEx, "v0", n);
  const Trajectory tr = integrate_geodesic(c.spray, x0, v0, c.controls, req);
  Outcome o;
  o.result = ojson{{"termination", to_string(tr.termination())},
                   {"escaped_set", tr.escaped_set()},
                   {"direction", tr.direction()},
                   {"end_parameter", num(tr.end())},
                   {"steps", tr.size()},
                   {"final_position", to_json(tr.final_position())},
                   {"final_velocity", to_json(tr.final_velocity())}};
  o.files.emplace_back("trajectory.csv", trajectory_csv(tr));
  return o;
}

inline Outcome run_expmap(const ExperimentConfig& c) {
  const json& ex = c.experiment;
  allow_keys(ex, kEx, {"kind", "p", "v"});
  const int n = c.spray.dim();
  const Vec p = vec_key(ex, kEx, "p", n), v = vec_key(ex, kEx, "v", n);
  const ExpResult e = exp_map(c.spray, p, v, c.controls);
  Outcome o;
  o.result = ojson{{"exists", e.exists()}, {"reason", to_string(e.reason)}, {"point", opt(e.point)}};
  if (e.exists()) {
    const LocalDiffeoVerdict ld = is_local_diffeo_at(c.spray, p, v, c.controls);
    o.result["jacobian"] = to_json(exp_jacobian(c.spray, p, v, c.controls));
    o.result["determinant"] = num(ld.det);
    o.result["nonsingular"] = ld.nonsingular;
  }
  return o;
}

inline Outcome run_connect(const ExperimentConfig& c) {
  const json& ex = c.experiment;
  allow_keys(ex, kEx, {"kind", "p", "q", "strategy"});
  const int n = c.spray.dim();
  const Vec p = vec_key(ex, kEx, "p", n), q = vec_key(ex, kEx, "q", n);
  if (p == q) throw FieldError(join(kEx, "q"), "endpoints must differ");
  const ShootingStrategy st = parse_strategy(find(ex, "strategy"), join(kEx, "strategy"), seed_of(c));
  std::vector<StartDiagnostic> diags;
  const auto r = connect(c.spray, p, q, st, c.controls, &diags);
  Outcome o;
  ojson starts = ojson::array();
  for (const auto& d : diags)
    starts.push_back(ojson{{"v0", to_json(d.v0)},
                           {"defined", d.start_defined},
                           {"iterations", d.iterations},
                           {"best_residual", num(d.best_residual)},
                           {"converged", d.converged}});
  o.result = ojson{{"converged", r.has_value()}};
  if (r) {
    o.result["v"] = to_json(r->v);
    o.result["residual"] = num(r->residual);
    o.result["iterations"] = r->iterations;
    o.result["start_index"] = r->start_index;
    o.files.emplace_back("trajectory.csv", trajectory_csv(r->trajectory));
  }
  o.result["starts"] = starts;
  return o;
}

inline Outcome run_conjugate(const ExperimentConfig& c) {
  const json& ex = c.experiment;
  allow_keys(ex, kEx, {"kind", "p", "v", "t_max"});
  const int n = c.spray.dim();
  const Vec p = vec_key(ex, kEx, "p", n), v = vec_key(ex, kEx, "v", n);
  const double t_max = number(ex, kEx, "t_max");
  if (!(t_max > 0.0)) throw FieldError(join(kEx, "t_max"), "must be positive");
  const ConjugateScan scan = conjugate_scan(c.spray, p, v, t_max, c.controls);
  Outcome o;
  o.result = ojson{{"first_conjugate", opt(scan.first)}, {"termination", to_string(scan.termination)},
                   {"samples", scan.t.size()}};
  std::ostringstream os;
  os << "t,normalized_det\n";
  for (std::size_t k = 0; k < scan.t.size(); ++k) os << fmt(scan.t[k]) << ',' << fmt(scan.normalized_det[k]) << '\n';
  o.files.emplace_back("determinant.csv", os.str());
  return o;
}

inline CompactSet compact_in(const ExperimentConfig& c, const char* key) {
  const std::string path = join(kEx, key);
  CompactSet k = parse_compact(need(c.experiment, kEx, key), path, c.spray.dim());
  rethrow_under(path, [&] {
    k.validate_in(c.spray.domain());
    return 0;
  });
  return k;
}

inline Outcome run_probe_pc(const ExperimentConfig& c, int threads) {
  allow_keys(c.experiment, kEx, {"kind", "K", "grid", "strategy"});
  const CompactSet K = compact_in(c, "K");
  const PseudoconvexityReport r = pseudoconvexity_probe(c.spray, K, grid_of(c, threads));
  Outcome o;
  ojson j = to_json(r);
  o.verdict = r.verdict;
  o.witnesses = j["witnesses"];
  o.levels = j["levels"];
  o.result = ojson{{"reason", r.reason}, {"hull", j["hull"]}, {"raw_bounds", j["raw_bounds"]},
                   {"budget_exhausted", j["budget_exhausted"]}};
  return o;
}

inline Outcome run_probe_dp(const ExperimentConfig& c, int threads) {
  allow_keys(c.experiment, kEx, {"kind", "K", "grid"});
  const CompactSet K = compact_in(c, "K");
  const DisprisonReport r = disprisonment_probe(c.spray, K, grid_of(c, threads));
  Outcome o;
  ojson j = to_json(r);
  o.verdict = r.verdict;
  o.witnesses = j["witnesses"];
  o.result = ojson{{"reason", r.reason}, {"max_escape", j["max_escape"]}, {"samples", j["samples"]}};
  return o;
}

inline Outcome run_hull(const ExperimentConfig& c, int threads) {
  allow_keys(c.experiment, kEx, {"kind", "K", "grid", "strategy"});
  const CompactSet K = compact_in(c, "K");
  const HullEstimate h = geodesic_hull(c.spray, K, grid_of(c, threads));
  Outcome o;
  ojson j = to_json(h);
  o.levels = j["levels"];
  o.result = ojson{{"hull", j["hull"]}, {"raw_bounds", j["raw_bounds"]}, {"budget_exhausted", j["budget_exhausted"]}};
  return o;
}

inline Outcome run_survey(const ExperimentConfig& c, int threads) {
  const json& ex = c.experiment;
  allow_keys(ex, kEx, {"kind", "region", "pairs", "strategy"});
  const CompactSet region = compact_in(c, "region");
  const long pairs = integer(need(ex, kEx, "pairs"), join(kEx, "pairs"));
  if (pairs < 1) throw FieldError(join(kEx, "pairs"), "must be >= 1");
  const ShootingStrategy st = parse_strategy(find(ex, "strategy"), join(kEx, "strategy"), seed_of(c));
  const ConnectednessSurvey s =
      connectedness_survey(c.spray, region, static_cast<int>(pairs), seed_of(c), st, c.controls, threads);
  Outcome o;
  o.result = to_json(s);
  std::ostringstream os;
  const int n = c.spray.dim();
  os << "pair";
  for (int i = 1; i <= n; ++i) os << ",p_" << i;
  for (int i = 1; i <= n; ++i) os << ",q_" << i;
  os << ",connected,residual,starts\n";
  for (std::size_t k = 0; k < s.pairs.size(); ++k) {
    const auto& pr = s.pairs[k];
    os << k;
    for (int i = 0; i < n; ++i) os << ',' << fmt(pr.p[i]);
    for (int i = 0; i < n; ++i) os << ',' << fmt(pr.q[i]);
    os << ',' << (pr.connected ? 1 : 0) << ',' << (pr.connected ? fmt(pr.residual) : "") << ',' << pr.starts_attempted
       << '\n';
  }
  o.files.emplace_back("survey.csv", os.str());
  return o;
}

inline double declared_degree(const ExperimentConfig& c) {
  if (!c.spray.degree()) throw FieldError("spray", "perturbations need a spray with a declared degree");
  return *c.spray.degree();
}

inline Outcome run_perturb(const ExperimentConfig& c) {
  const json& ex = c.experiment;
  allow_keys(ex, kEx, {"kind", "bumps", "K", "samples"});
  BumpPerturbation p;
  p.degree = declared_degree(c);
  p.bumps = parse_bumps(ex, kEx, c.spray.dim());
  const int samples = static_cast<int>(integer_or(ex, kEx, "samples", 400));
  const Spray sp = perturb(c.spray, p);
  const HomogeneityReport h = check_homogeneity(sp, 200, {0.5, 2.0, 5.0}, seed_of(c));
  Outcome o;
  o.verdict = h.pass ? Verdict::Pass : Verdict::Fail;
  o.result = ojson{{"perturbed", sp.name()},
                   {"degree", num(p.degree)},
                   {"homogeneity_error", num(h.max_relative_error)}};
  if (find(ex, "K")) o.result["c0_distance"] = num(c0_fine_distance(c.spray, sp, compact_in(c, "K"), samples, seed_of(c)));
  ojson bumps = ojson::array();
  for (const Bump& b : p.bumps) bumps.push_back(to_json(b));
  o.result["bumps"] = bumps;
  return o;
}

inline Outcome run_stability(const ExperimentConfig& c, int threads) {
  const json& ex = c.experiment;
  allow_keys(ex, kEx, {"kind", "K", "grid", "strategy", "bumps", "amplitudes", "c0_samples", "escape", "barrier"});
  const int n = c.spray.dim();
  declared_degree(c);
  StabilityPlan plan;
  plan.grid = grid_of(c, threads);
  plan.K = compact_in(c, "K");
  plan.bumps = parse_bumps(ex, kEx, n);
  const json& amps = need(ex, kEx, "amplitudes");
  if (!amps.is_array() || amps.empty()) throw FieldError(join(kEx, "amplitudes"), "expected a nonempty array");
  for (std::size_t k = 0; k < amps.size(); ++k) plan.amplitudes.push_back(finite_number(amps[k], index(join(kEx, "amplitudes"), k)));
  plan.c0_samples = static_cast<int>(integer_or(ex, kEx, "c0_samples", plan.c0_samples));
  if (const json* e = find(ex, "escape")) {
    const std::string ep = join(kEx, "escape");
    allow_keys(*e, ep, {"K1", "K2", "bound"});
    EscapePlan esc;
    esc.K1 = parse_compact(need(*e, ep, "K1"), join(ep, "K1"), n);
    esc.K2 = parse_compact(need(*e, ep, "K2"), join(ep, "K2"), n);
    esc.bound = number(*e, ep, "bound");
    plan.escape = esc;
  }
  if (const json* b = find(ex, "barrier")) {
    const std::string bp = join(kEx, "barrier");
    allow_keys(*b, bp, {"scale", "count", "backward", "spacing"});
    const double scale = number_or(*b, bp, "scale", 1.0);
    const long count = integer_or(*b, bp, "count", 6);
    if (count < 5) throw FieldError(join(bp, "count"), "must be >= 5");
    if (!(scale > 0.0)) throw FieldError(join(bp, "scale"), "must be positive");
    std::vector<CompactSet> prefix;
    for (int k = 1; k <= count; ++k) prefix.push_back(compact_exhaustion(c.spray.domain(), k, scale));
    plan.barrier_prefix = prefix;
    if (const json* bw = find(*b, "backward")) {
      if (!bw->is_boolean()) throw FieldError(join(bp, "backward"), "expected a boolean");
      plan.barrier_options.backward = bw->get<bool>();
    }
    plan.barrier_options.spacing = number_or(*b, bp, "spacing", plan.barrier_options.spacing);
  }
  const StabilityReport r = rethrow_under(kEx, [&] { return joint_stability_experiment(c.spray, plan); });

  Outcome o;
  const std::string base_pc = to_json(r.baseline_pseudoconvexity).dump();
  const std::string base_dp = to_json(r.baseline_disprisonment).dump();
  ojson rows = ojson::array();
  bool all = r.precondition;
  std::ostringstream os;
  os << "amplitude,c0_distance,pseudoconvexity,disprisonment,escape_persistence,barrier\n";
  for (const auto& row : r.rows) {
    ojson j = to_json(row);
    if (row.amplitude == 0.0) {
      j["baseline_identical"] = to_json(row.pseudoconvexity).dump() == base_pc && to_json(row.disprisonment).dump() == base_dp;
      all = all && j["baseline_identical"].get<bool>();
    }
    all = all && row.all_pass();
    os << fmt(row.amplitude) << ',' << fmt(row.c0_distance) << ',' << to_string(row.pseudoconvexity.verdict) << ','
       << to_string(row.disprisonment.verdict) << ',' << (row.escape ? to_string(row.escape->verdict) : "") << ','
       << (row.barrier ? to_string(row.barrier->verdict) : "") << '\n';
    rows.push_back(std::move(j));
  }
  o.verdict = all ? Verdict::Pass : Verdict::Fail;
  o.levels = rows;
  o.result = ojson{{"precondition", r.precondition},
                   {"baseline", ojson{{"pseudoconvexity", to_string(r.baseline_pseudoconvexity.verdict)},
                                      {"disprisonment", to_string(r.baseline_disprisonment.verdict)}}},
                   {"largest_passing_amplitude", opt(r.largest_passing_amplitude)}};
  o.files.emplace_back("stability.csv", os.str());
  return o;
}

inline Outcome run_rescale(const ExperimentConfig& c) {
  const json& ex = c.experiment;
  allow_keys(ex, kEx, {"kind", "p", "v", "lambda", "window", "samples"});
  const int n = c.spray.dim();
  const double lambda = number(ex, kEx, "lambda");
  if (!(lambda > 0.0)) throw FieldError(join(kEx, "lambda"), "must be positive");
  const double window = number_or(ex, kEx, "window", 1.0);
  if (!(window > 0.0)) throw FieldError(join(kEx, "window"), "must be positive");
  const int samples = static_cast<int>(integer_or(ex, kEx, "samples", 200));
  const RescalingReport r =
      rescaling_probe(c.spray, vec_key(ex, kEx, "p", n), vec_key(ex, kEx, "v", n), lambda, c.controls, window, samples);
  Outcome o;
  o.result = ojson{{"mode", r.affine_mode ? "pointwise" : "hausdorff"},
                   {"discrepancy", num(r.discrepancy)},
                   {"window", num(r.window)},
                   {"fitted_exponent", num(r.fitted_exponent)},
                   {"fitted_discrepancy", num(r.fitted_discrepancy)}};
  return o;
}

inline Outcome run_identities(const ExperimentConfig& c) {
  const json& ex = c.experiment;
  allow_keys(ex, kEx, {"kind", "samples", "scales"});
  const int samples = static_cast<int>(integer_or(ex, kEx, "samples", 200));
  if (samples < 1) throw FieldError(join(kEx, "samples"), "must be >= 1");
  std::vector<double> scales{0.5, 2.0, 3.0};
  if (const json* s = find(ex, "scales")) {
    const Vec v = vector_of(*s, join(kEx, "scales"));
    scales.assign(v.data(), v.data() + v.size());
    for (std::size_t k = 0; k < scales.size(); ++k)
      if (!(scales[k] > 0.0)) throw FieldError(index(join(kEx, "scales"), k), "must be positive");
  }
  const IdentityReport id = check_spray_identities(c.spray, sample_tangent_vectors(c.spray.domain(), samples, seed_of(c)));
  Outcome o;
  bool pass = id.all_pass();
  o.result = ojson{{"samples", id.rows.size()}, {"identities_pass", id.all_pass()}};
  if (c.spray.degree()) {
    const HomogeneityReport h = check_homogeneity(c.spray, samples, scales, seed_of(c));
    o.result["homogeneity"] = ojson{{"degree", num(*c.spray.degree())},
                                    {"max_relative_error", num(h.max_relative_error)},
                                    {"pass", h.pass}};
    if (!h.pass) {
      o.witnesses.push_back(ojson{{"x", to_json(h.worst_x)}, {"y", to_json(h.worst_y)}, {"scale", num(h.worst_scale)},
                                  {"relative_error", num(h.max_relative_error)}});
    }
    pass = pass && h.pass;
  } else {
    o.result["homogeneity"] = nullptr;
  }
  o.verdict = pass ? Verdict::Pass : Verdict::Fail;
  return o;
}

inline Outcome dispatch(const ExperimentConfig& c, int threads) {
  const std::string& k = c.kind;
  if (k == "integrate") return run_integrate(c);
  if (k == "expmap") return run_expmap(c);
  if (k == "connect") return run_connect(c);
  if (k == "conjugate") return run_conjugate(c);
  if (k == "probe-pc") return run_probe_pc(c, threads);
  if (k == "probe-dp") return run_probe_dp(c, threads);
  if (k == "hull") return run_hull(c, threads);
  if (k == "survey") return run_survey(c, threads);
  if (k == "perturb") return run_perturb(c);
  if (k == "stability") return run_stability(c, threads);
  if (k == "rescale") return run_rescale(c);
  if (k == "identities") return run_identities(c);
  throw FieldError("experiment.kind", "unknown experiment kind '" + k + "'");
}

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FieldError("config", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace detail

/// The report document for a finished experiment.
inline ojson report_document(const ExperimentConfig& c, const json& experiment, const Outcome& o) {
  ojson params = ojson::parse(experiment.dump());
  return ojson{{"schema", kSchema},
               {"kind", c.kind},
               {"verdict", o.verdict ? ojson(to_string(*o.verdict)) : ojson(nullptr)},
               {"spray", spray_json(c.spray)},
               {"seed", c.seed ? ojson(*c.seed) : ojson(nullptr)},
               {"controls", to_json(c.controls)},
               {"parameters", params},
               {"witnesses", o.witnesses},
               {"levels", o.levels},
               {"result", o.result}};
}

inline int exit_code(const std::optional<Verdict>& v) { return !v || *v == Verdict::Pass ? 0 : 1; }

/// Runs one config file and writes report.json, manifest.json and any CSVs.
inline int run(const std::string& config_path, const RunOptions& opt, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  const auto start = std::chrono::steady_clock::now();
  try {
    const std::string bytes = detail::read_file(config_path);
    json root;
    try {
      root = json::parse(bytes);
    } catch (const json::parse_error& e) {
      throw FieldError("config", std::string("invalid JSON: ") + e.what());
    }
    if (opt.threads < 1) throw FieldError("threads", "must be >= 1");
    const ExperimentConfig cfg = parse_config(root, opt.seed);
    namespace fs = std::filesystem;
    fs::path dir = opt.out ? fs::path(*opt.out)
                           : cfg.output ? fs::path(*cfg.output)
                                        : fs::path("spraylab-out") / fs::path(config_path).stem();
    const Outcome o = detail::dispatch(cfg, opt.threads);
    fs::create_directories(dir);
    write_atomic(dir / "report.json", report_document(cfg, cfg.experiment, o).dump(2) + "\n");
    ojson outputs = ojson::array({"report.json"});
    for (const auto& [name, content] : o.files) {
      write_atomic(dir / name, content);
      outputs.push_back(name);
    }
    const int code = exit_code(o.verdict);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ojson manifest{{"schema", kSchema},
                   {"config", fs::path(config_path).filename().string()},
                   {"config_sha256", sha256_hex(bytes)},
                   {"seed_override", opt.seed ? ojson(*opt.seed) : ojson(nullptr)},
                   {"versions",
                    ojson{{"spraylab", kVersion},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                        "." + std::to_string(EIGEN_MINOR_VERSION)},
                          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                          {"compiler", __VERSION__}}},
                   {"outputs", outputs},
                   {"exit_code", code},
                   {"wall_time_seconds", wall}};
    write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    out << cfg.kind << ": " << (o.verdict ? to_string(*o.verdict) : "done") << " -> " << dir.string() << "\n";
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

// --- catalog ---------------------------------------------------------------------------

inline ojson catalog_entry_json(const CatalogEntry& e) {
  ojson params = ojson::object();
  for (const auto& [k, v] : e.defaults) params[k] = num(v);
  return ojson{{"name", e.name},
               {"summary", e.summary},
               {"formula", e.formula},
               {"domain", e.domain_text},
               {"degree", e.degree ? num(*e.degree) : ojson(nullptr)},
               {"negative_control", e.negative_control},
               {"parameters", params},
               {"provenance", e.provenance}};
}

inline std::string catalog_entry_text(const CatalogEntry& e) {
  std::ostringstream os;
  os << e.name << "\n  " << e.summary << "\n  Y: " << e.formula << "\n  domain: " << e.domain_text
     << "\n  degree: " << (e.degree ? fmt(*e.degree) : std::string("undeclared")) << "\n";
  if (!e.defaults.empty()) {
    os << "  parameters:";
    for (const auto& [k, v] : e.defaults) os << " " << k << "=" << fmt(v);
    os << "\n";
  }
  os << "  note: " << e.provenance << (e.negative_control ? " (negative control)" : "") << "\n";
  return os.str();
}

/// Lists the catalog, or describes one entry. Unknown names exit 2.
inline int catalog_command(const std::optional<std::string>& name, bool as_json, std::ostream& out = std::cout,
                           std::ostream& err = std::cerr) {
  try {
    if (name) {
      const CatalogEntry& e = catalog_entry(*name);
      out << (as_json ? catalog_entry_json(e).dump(2) + "\n" : catalog_entry_text(e));
      return 0;
    }
    if (as_json) {
      ojson all = ojson::array();
      for (const auto& e : catalog()) all.push_back(catalog_entry_json(e));
      out << all.dump(2) << "\n";
    } else {
      for (const auto& e : catalog()) out << e.name << "  " << e.summary << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace spraylab::io
