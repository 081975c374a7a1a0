#pragma once

// Shipped example sprays. Names, formulas and parameter sets are frozen per
// release; see docs/catalog.md for the same table in prose.

#include "spraylab/spray.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

namespace spraylab {

using Params = std::map<std::string, double>;

struct CatalogEntry {
  std::string name;
  std::string summary;
  std::string formula;      // fiber acceleration Y(x, y)
  std::string domain_text;
  std::string provenance;
  std::optional<double> degree;
  bool negative_control = false;
  Params defaults;
  std::function<Spray(const Params&)> build;
};

// --- metrics ------------------------------------------------------------------

inline MetricField euclidean_metric(int n) {
  MetricField m;
  m.dim = n;
  m.g = [n](const Vec&) -> Mat { return Mat::Identity(n, n); };
  m.signature.assign(static_cast<std::size_t>(n), 1);
  return m;
}

/// diag(-1, 1, ..., 1) in coordinates (t, x, ...).
inline MetricField minkowski_metric(int n) {
  MetricField m;
  m.dim = n;
  m.g = [n](const Vec&) -> Mat {
    Mat g = Mat::Identity(n, n);
    g(0, 0) = -1.0;
    return g;
  };
  m.signature.assign(static_cast<std::size_t>(n), 1);
  m.signature[0] = -1;
  return m;
}

/// (dx1^2 + dx2^2) / x2^2 on x2 > 0.
inline MetricField half_plane_metric(bool analytic_derivative = true) {
  MetricField m;
  m.dim = 2;
  m.g = [](const Vec& x) -> Mat { return Mat::Identity(2, 2) / (x[1] * x[1]); };
  m.signature = {1, 1};
  if (analytic_derivative) {
    m.dg = [](const Vec& x) {
      return std::vector<Mat>{Mat::Zero(2, 2), Mat::Identity(2, 2) * (-2.0 / (x[1] * x[1] * x[1]))};
    };
  }
  return m;
}

/// dx1^2 + cos^2(x1) dx2^2 on |x1| < pi/2: the unit sphere in latitude/longitude.
inline MetricField sphere_strip_metric(bool analytic_derivative = true) {
  MetricField m;
  m.dim = 2;
  m.g = [](const Vec& x) -> Mat {
    Mat g = Mat::Identity(2, 2);
    g(1, 1) = std::cos(x[0]) * std::cos(x[0]);
    return g;
  };
  m.signature = {1, 1};
  if (analytic_derivative) {
    m.dg = [](const Vec& x) {
      Mat d0 = Mat::Zero(2, 2);
      d0(1, 1) = -2.0 * std::sin(x[0]) * std::cos(x[0]);
      return std::vector<Mat>{d0, Mat::Zero(2, 2)};
    };
  }
  return m;
}

// --- flows ----------------------------------------------------------------------

inline VectorField rotation_field() {
  return {[](const Vec& x) { return vec({-x[1], x[0]}); },
          [](const Vec&) -> Mat {
            Mat j(2, 2);
            j << 0, -1, 1, 0;
            return j;
          }};
}

/// F(x) = (x1(1-r^2) - x2, x2(1-r^2) + x1): attracting invariant circle r = 1.
inline VectorField limit_cycle_field() {
  return {[](const Vec& x) {
            const double k = 1.0 - x.squaredNorm();
            return vec({x[0] * k - x[1], x[1] * k + x[0]});
          },
          [](const Vec& x) -> Mat {
            const double r2 = x.squaredNorm();
            Mat j(2, 2);
            j << 1 - r2 - 2 * x[0] * x[0], -2 * x[0] * x[1] - 1, -2 * x[0] * x[1] + 1, 1 - r2 - 2 * x[1] * x[1];
            return j;
          }};
}

inline Spray flat_spray(ChartDomain d, std::string name) {
  const int n = d.dim();
  FiberField zero = [n](const Vec&, const Vec&) -> Vec { return Vec::Zero(n); };
  FiberJacobian zj = [n](const Vec&, const Vec&) -> Mat { return Mat::Zero(n, n); };
  return Spray(std::move(name), std::move(d), zero, 2.0).with_jacobians(zj, zj);
}

inline double param(const Params& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) throw FieldError(key, "missing parameter");
  return it->second;
}

/// Y(x, y) = (0, sin(x2) y1^2): periodic in x2, so it lives on the cylinder.
inline Spray cylinder_periodic_spray() {
  FiberField f = [](const Vec& x, const Vec& y) { return vec({0.0, std::sin(x[1]) * y[0] * y[0]}); };
  FiberJacobian jx = [](const Vec& x, const Vec& y) -> Mat {
    Mat j = Mat::Zero(2, 2);
    j(1, 1) = std::cos(x[1]) * y[0] * y[0];
    return j;
  };
  FiberJacobian jy = [](const Vec& x, const Vec& y) -> Mat {
    Mat j = Mat::Zero(2, 2);
    j(1, 0) = 2.0 * std::sin(x[1]) * y[0];
    return j;
  };
  return Spray("cylinder-periodic", ChartDomain::whole(2), f, 2.0).with_jacobians(jx, jy);
}

inline const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = [] {
    std::vector<CatalogEntry> e;
    e.push_back({"flat-plane", "Euclidean plane; geodesics are straight lines", "Y = 0", "R^2",
                 "flat reference", 2.0, false, {},
                 [](const Params&) { return flat_spray(ChartDomain::whole(2), "flat-plane"); }});
    e.push_back({"minkowski-strip",
                 "Geodesic spray of the Minkowski metric -dt^2 + dx^2 on the open strip a < x < b",
                 "Y = 0 (metric spray of diag(-1, 1))", "R x (a, b)",
                 "pseudoconvex but not globally hyperbolic strip example", 2.0, false, {{"a", 0.0}, {"b", 1.0}},
                 [](const Params& p) {
                   const double a = param(p, "a"), b = param(p, "b");
                   return spray_from_metric(minkowski_metric(2), ChartDomain::strip(2, 1, a, b), "minkowski-strip");
                 }});
    e.push_back({"punctured-plane", "Flat plane with a closed ball removed", "Y = 0",
                 "R^2 minus closed ball(center (cx, cy), radius)",
                 "deleting a compact set destroys pseudoconvexity", 2.0, false,
                 {{"cx", 0.0}, {"cy", 0.0}, {"radius", 0.5}},
                 [](const Params& p) {
                   ChartDomain d(Vec::Constant(2, -kInf), Vec::Constant(2, kInf),
                                 {Ball{vec({param(p, "cx"), param(p, "cy")}), param(p, "radius")}});
                   return flat_spray(std::move(d), "punctured-plane");
                 }});
    e.push_back({"poincare-half-plane", "Geodesic spray of (dx1^2 + dx2^2)/x2^2",
                 "Y = (2 y1 y2 / x2, (y2^2 - y1^2) / x2)", "x2 > 0",
                 "constant curvature -1; no conjugate points", 2.0, false, {},
                 [](const Params&) {
                   return spray_from_metric(half_plane_metric(), ChartDomain::strip(2, 1, 0.0, kInf),
                                            "poincare-half-plane");
                 }});
    e.push_back({"sphere-strip", "Geodesic spray of dx1^2 + cos^2(x1) dx2^2 (unit sphere, poles removed)",
                 "Y = (-sin(x1) cos(x1) y2^2, 2 tan(x1) y1 y2)", "|x1| < pi/2",
                 "curvature +1; conjugate points at parameter pi along unit-speed geodesics", 2.0, false, {},
                 [](const Params&) {
                   const double h = std::numbers::pi / 2;
                   return spray_from_metric(sphere_strip_metric(), ChartDomain::strip(2, 0, -h, h), "sphere-strip");
                 }});
    e.push_back({"limit-cycle-flow", "Flow spray of a planar field with an attracting unit circle",
                 "Y = J_F(x) y, F = (x1(1-r^2) - x2, x2(1-r^2) + x1)", "R^2",
                 "imprisoned geodesic along the invariant circle", 1.0, false, {},
                 [](const Params&) {
                   return spray_from_flow(limit_cycle_field(), ChartDomain::whole(2), "limit-cycle-flow");
                 }});
    e.push_back({"rotation-flow", "Flow spray of the rotation field F = (-x2, x1)", "Y = (-y2, y1)", "R^2",
                 "fiber-linear example; circles are geodesics", 1.0, false, {},
                 [](const Params&) {
                   return spray_from_flow(rotation_field(), ChartDomain::whole(2), "rotation-flow");
                 }});
    e.push_back({"cylinder-periodic", "Periodic quadratic spray on the cylinder R x (R mod 2pi)",
                 "Y = (0, sin(x2) y1^2)", "R^2, 2pi-periodic in x2", "target of the cylinder cover", 2.0, false,
                 {}, [](const Params&) { return cylinder_periodic_spray(); }});
    e.push_back({"cylinder-cover", "Pullback of cylinder-periodic along the plane-to-cylinder covering",
                 "Y = (0, sin(x2 mod P) y1^2)", "R^2 (universal cover)", "covering spray of a spray", 2.0, false,
                 {{"period", 2.0 * std::numbers::pi}},
                 [](const Params& p) {
                   return pullback_spray(CoveringMap::cylinder(2, param(p, "period")), cylinder_periodic_spray())
                       .renamed("cylinder-cover");
                 }});
    e.push_back({"fractional-drag", "Speed-damping spray of fractional degree m",
                 "Y = -k |y|^(m-1) y, Y(x, 0) = 0", "R^2",
                 "homogeneous of non-integral degree; zero initial velocity is rejected", std::nullopt, false,
                 {{"k", 1.0}, {"m", 0.5}},
                 [](const Params& p) {
                   const double k = param(p, "k"), m = param(p, "m");
                   if (!(m >= 0.0)) throw FieldError("m", "degree must be nonnegative");
                   FiberField f = [k, m](const Vec&, const Vec& y) -> Vec {
                     const double r = y.norm();
                     if (r == 0.0) return Vec::Zero(y.size());
                     return -k * std::pow(r, m - 1.0) * y;
                   };
                   return Spray("fractional-drag", ChartDomain::whole(2), f, m);
                 }});
    e.push_back({"affine-offset", "Negative control: not homogeneous although degree 1 is declared",
                 "Y = y + (1, 0)", "R^2", "negative control of our own design for the homogeneity check", 1.0,
                 true, {},
                 [](const Params&) {
                   FiberField f = [](const Vec&, const Vec& y) -> Vec { return y + vec({1.0, 0.0}); };
                   return Spray("affine-offset", ChartDomain::whole(2), f, 1.0);
                 }});
    return e;
  }();
  return entries;
}

inline const CatalogEntry& catalog_entry(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name) return e;
  throw FieldError("name", "unknown catalog spray '" + name + "'");
}

/// Builds a catalog spray; unknown parameter keys are rejected.
inline Spray make_catalog_spray(const std::string& name, const Params& overrides = {}) {
  const CatalogEntry& e = catalog_entry(name);
  Params p = e.defaults;
  for (const auto& [k, v] : overrides) {
    if (!p.count(k)) throw FieldError("parameters." + k, "unknown parameter for '" + name + "'");
    p[k] = v;
  }
  return e.build(p);
}

}  // namespace spraylab
