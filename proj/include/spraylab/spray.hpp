#pragma once

// Sprays in a single chart: the second-order field (x, y) -> (x, y, y, Y(x, y)).

#include "spraylab/geometry.hpp"
#include "spraylab/linalg.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spraylab {

using FiberField = std::function<Vec(const Vec& x, const Vec& y)>;
using FiberJacobian = std::function<Mat(const Vec& x, const Vec& y)>;

/// Immutable spray value. Copies share the evaluator, which must be pure.
class Spray {
 public:
  Spray(std::string name, ChartDomain domain, FiberField accel, std::optional<double> degree = std::nullopt)
      : name_(std::move(name)), domain_(std::move(domain)), accel_(std::move(accel)), degree_(degree) {
    if (!accel_) throw Error("Spray: empty evaluator");
    if (degree_ && !(*degree_ >= 0.0)) throw Error("Spray: degree must be nonnegative");
  }

  Spray with_jacobians(FiberJacobian dx, FiberJacobian dy) const {
    Spray s = *this;
    s.jac_x_ = std::move(dx);
    s.jac_y_ = std::move(dy);
    return s;
  }
  Spray renamed(std::string name) const {
    Spray s = *this;
    s.name_ = std::move(name);
    return s;
  }
  Spray on_domain(ChartDomain domain) const {
    if (domain.dim() != dim()) throw Error("Spray::on_domain: dimension mismatch");
    Spray s = *this;
    s.domain_ = std::move(domain);
    return s;
  }
  Spray with_degree(std::optional<double> m) const {
    Spray s = *this;
    s.degree_ = m;
    return s;
  }

  const std::string& name() const noexcept { return name_; }
  const ChartDomain& domain() const noexcept { return domain_; }
  int dim() const noexcept { return domain_.dim(); }
  std::optional<double> degree() const noexcept { return degree_; }
  bool has_jacobian_x() const noexcept { return static_cast<bool>(jac_x_); }
  bool has_jacobian_y() const noexcept { return static_cast<bool>(jac_y_); }
  const FiberField& field() const noexcept { return accel_; }

  /// Y(x, y) without the domain check; integrators call this at stage points.
  Vec accel(const Vec& x, const Vec& y) const { return accel_(x, y); }

  Mat jacobian_x(const Vec& x, const Vec& y) const {
    if (jac_x_) return jac_x_(x, y);
    const int n = dim();
    Mat J(n, n);
    Vec xp = x, xm = x;
    for (int j = 0; j < n; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
      xp[j] = x[j] + h;
      xm[j] = x[j] - h;
      J.col(j) = (accel_(xp, y) - accel_(xm, y)) / (xp[j] - xm[j]);
      xp[j] = xm[j] = x[j];
    }
    return J;
  }

  Mat jacobian_y(const Vec& x, const Vec& y) const {
    if (jac_y_) return jac_y_(x, y);
    const int n = dim();
    Mat J(n, n);
    const double h = 1e-6 * std::max(1.0, y.norm());
    Vec yp = y, ym = y;
    for (int j = 0; j < n; ++j) {
      yp[j] = y[j] + h;
      ym[j] = y[j] - h;
      J.col(j) = (accel_(x, yp) - accel_(x, ym)) / (yp[j] - ym[j]);
      yp[j] = ym[j] = y[j];
    }
    return J;
  }

  const FiberJacobian& analytic_jacobian_x() const noexcept { return jac_x_; }
  const FiberJacobian& analytic_jacobian_y() const noexcept { return jac_y_; }

 private:
  std::string name_;
  ChartDomain domain_;
  FiberField accel_;
  std::optional<double> degree_;
  FiberJacobian jac_x_;
  FiberJacobian jac_y_;
};

inline Vec eval_spray(const Spray& s, const Vec& x, const Vec& y) {
  require_dim(x, s.dim(), "eval_spray");
  require_dim(y, s.dim(), "eval_spray");
  if (!s.domain().contains(x)) throw Error("eval_spray: base point outside the domain of " + s.name());
  return s.accel(x, y);
}

// --- second tangent bundle ---------------------------------------------------

/// A point (x, y, X, Y') of TTM in induced coordinates.
struct SecondTangentSample {
  Vec x, y, dx, dy;

  bool operator==(const SecondTangentSample& o) const {
    return x == o.x && y == o.y && dx == o.dx && dy == o.dy;
  }
};

/// Canonical involution J(x, y, X, Y) = (x, X, y, Y).
inline SecondTangentSample involution(const SecondTangentSample& s) { return {s.x, s.dx, s.y, s.dy}; }

/// Vertical endomorphism V(x, y, X, Y) = (x, y, 0, X).
inline SecondTangentSample vertical(const SecondTangentSample& s) {
  return {s.x, s.y, Vec::Zero(s.x.size()), s.dx};
}

/// Euler (Liouville) field C(x, y) = (x, y, 0, y).
inline SecondTangentSample euler_field(const Vec& x, const Vec& y) { return {x, y, Vec::Zero(x.size()), y}; }

inline SecondTangentSample spray_vector(const Spray& s, const Vec& x, const Vec& y) {
  return {x, y, y, s.accel(x, y)};
}

struct IdentityCheck {
  bool vs_equals_c = false;
  bool js_equals_s = false;
  bool vv_zero = false;
  bool ok() const { return vs_equals_c && js_equals_s && vv_zero; }
};

/// Checks VS = C, JS = S and V∘V = 0 on a quadruple claimed to be S(x, y).
inline IdentityCheck check_quadruple(const SecondTangentSample& s) {
  IdentityCheck c;
  c.vs_equals_c = vertical(s) == euler_field(s.x, s.y);
  c.js_equals_s = involution(s) == s;
  const SecondTangentSample vv = vertical(vertical(s));
  c.vv_zero = vv.x == s.x && vv.y == s.y && vv.dx.isZero(0.0) && vv.dy.isZero(0.0);
  return c;
}

struct IdentityReport {
  std::vector<IdentityCheck> rows;
  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.ok()) return false;
    return true;
  }
};

inline IdentityReport check_spray_identities(const Spray& s, const std::vector<std::pair<Vec, Vec>>& samples) {
  IdentityReport rep;
  for (const auto& [x, y] : samples) rep.rows.push_back(check_quadruple(spray_vector(s, x, y)));
  return rep;
}

/// First nonempty exhaustion set; used wherever a bounded sampling region of
/// the domain is needed.
inline CompactSet sampling_region(const ChartDomain& d) {
  for (int n = 2; n <= 64; n *= 2) {
    CompactSet a = compact_exhaustion(d, n);
    if (!a.empty()) return a;
  }
  throw Error("domain has no nonempty exhaustion set up to index 64");
}

/// Seeded (x, y) pairs with x in the sampling region and 0.1 <= |y| <= 2*sqrt(n).
inline std::vector<std::pair<Vec, Vec>> sample_tangent_vectors(const ChartDomain& d, int count, std::uint64_t seed) {
  const CompactSet region = sampling_region(d);
  Rng rng(seed);
  std::vector<std::pair<Vec, Vec>> out;
  int guard = 0;
  while (static_cast<int>(out.size()) < count && guard++ < 100 * count + 100) {
    auto x = region.sample(rng);
    if (!x || !d.contains(*x)) continue;
    Vec y(d.dim());
    for (int i = 0; i < d.dim(); ++i) y[i] = rng.uniform(-2.0, 2.0);
    if (y.norm() < 0.1) continue;
    out.emplace_back(std::move(*x), std::move(y));
  }
  return out;
}

struct HomogeneityReport {
  double max_relative_error = 0.0;
  bool pass = false;
  Vec worst_x, worst_y;
  double worst_scale = 1.0;
};

inline constexpr double kHomogeneityTolerance = 1e-9;

/// max |Y(x, a y) - a^m Y(x, y)| / (|Y(x, y)| + 1e-30) over seeded samples and scales.
inline HomogeneityReport check_homogeneity(const Spray& s, int sample_count, const std::vector<double>& scales,
                                           std::uint64_t seed) {
  if (!s.degree()) throw Error("check_homogeneity: spray '" + s.name() + "' has no declared degree");
  const double m = *s.degree();
  HomogeneityReport rep;
  for (const auto& [x, y] : sample_tangent_vectors(s.domain(), sample_count, seed)) {
    const Vec base = s.accel(x, y);
    for (double a : scales) {
      if (!(a > 0.0)) throw Error("check_homogeneity: scales must be positive");
      const Vec scaled = s.accel(x, a * y);
      const double err = (scaled - std::pow(a, m) * base).norm() / (base.norm() + 1e-30);
      if (!(err <= rep.max_relative_error)) {
        rep.max_relative_error = err;
        rep.worst_x = x;
        rep.worst_y = y;
        rep.worst_scale = a;
      }
    }
  }
  rep.pass = rep.max_relative_error < kHomogeneityTolerance;
  return rep;
}

// --- metric sprays -------------------------------------------------------------

struct MetricField {
  int dim = 0;
  std::function<Mat(const Vec&)> g;
  std::vector<int> signature;
  /// Optional; element k is the partial derivative of g along x_k.
  std::function<std::vector<Mat>(const Vec&)> dg;
};

inline std::vector<Mat> metric_derivatives(const MetricField& m, const Vec& x) {
  if (m.dg) return m.dg(x);
  std::vector<Mat> out;
  Vec xp = x, xm = x;
  for (int k = 0; k < m.dim; ++k) {
    const double h = std::max(1e-6, 1e-6 * std::abs(x[k]));
    xp[k] = x[k] + h;
    xm[k] = x[k] - h;
    out.push_back((m.g(xp) - m.g(xm)) / (xp[k] - xm[k]));
    xp[k] = xm[k] = x[k];
  }
  return out;
}

inline constexpr double kMinMetricDeterminant = 1e-12;

/// Christoffel symbols of the second kind; element k holds the symmetric matrix Γ^k_{ij}.
inline std::vector<Mat> christoffel(const MetricField& m, const Vec& x) {
  const Mat g = m.g(x);
  const double det = g.determinant();
  if (!(std::abs(det) > kMinMetricDeterminant)) throw Error("metric is near-singular at evaluation point");
  const Mat ginv = g.inverse();
  const std::vector<Mat> dg = metric_derivatives(m, x);
  const int n = m.dim;
  // first kind: Γ_{l,ij} = (∂_i g_{lj} + ∂_j g_{li} - ∂_l g_{ij}) / 2
  std::vector<Mat> first(static_cast<std::size_t>(n), Mat::Zero(n, n));
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) first[l](i, j) = 0.5 * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
  std::vector<Mat> out(static_cast<std::size_t>(n), Mat::Zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) out[k] += ginv(k, l) * first[l];
  return out;
}

inline double energy(const MetricField& m, const Vec& x, const Vec& v) { return 0.5 * v.dot(m.g(x) * v); }

/// Symmetric, nondegenerate, and with the declared signature at each sample.
inline bool check_metric(const MetricField& m, const std::vector<Vec>& samples) {
  for (const Vec& x : samples) {
    const Mat g = m.g(x);
    if (!g.isApprox(g.transpose(), 1e-12)) return false;
    if (!(std::abs(g.determinant()) > kMinMetricDeterminant)) return false;
    if (!m.signature.empty()) {
      Eigen::SelfAdjointEigenSolver<Mat> es(g);
      std::vector<int> sig;
      for (int i = 0; i < m.dim; ++i) sig.push_back(es.eigenvalues()[i] < 0 ? -1 : 1);
      std::vector<int> want = m.signature;
      std::sort(want.begin(), want.end());
      if (sig != want) return false;
    }
  }
  return true;
}

/// Geodesic spray of g: Y^k = -Γ^k_{ij} y^i y^j, degree 2.
inline Spray spray_from_metric(const MetricField& m, ChartDomain domain, std::string name) {
  if (m.dim != domain.dim()) throw Error("spray_from_metric: dimension mismatch");
  auto metric = std::make_shared<const MetricField>(m);
  FiberField accel = [metric](const Vec& x, const Vec& y) {
    const auto gam = christoffel(*metric, x);
    Vec out(metric->dim);
    for (int k = 0; k < metric->dim; ++k) out[k] = -y.dot(gam[k] * y);
    return out;
  };
  FiberJacobian dy = [metric](const Vec& x, const Vec& y) {
    const auto gam = christoffel(*metric, x);
    Mat J(metric->dim, metric->dim);
    for (int k = 0; k < metric->dim; ++k) J.row(k) = -2.0 * (gam[k] * y).transpose();
    return J;
  };
  return Spray(std::move(name), std::move(domain), std::move(accel), 2.0).with_jacobians(nullptr, std::move(dy));
}

// --- flow sprays ----------------------------------------------------------------

struct VectorField {
  std::function<Vec(const Vec&)> f;
  std::function<Mat(const Vec&)> jacobian;
};

/// Integral curves of F are geodesics of Y(x, y) = J_F(x) y (degree 1).
inline Spray spray_from_flow(const VectorField& F, ChartDomain domain, std::string name) {
  if (!F.jacobian) throw Error("spray_from_flow: analytic Jacobian required");
  auto jac = F.jacobian;
  FiberField accel = [jac](const Vec& x, const Vec& y) -> Vec { return jac(x) * y; };
  FiberJacobian dy = [jac](const Vec& x, const Vec&) -> Mat { return jac(x); };
  return Spray(std::move(name), std::move(domain), std::move(accel), 1.0).with_jacobians(nullptr, std::move(dy));
}

// --- covering pullback ------------------------------------------------------------

/// Ỹ(x̃, ỹ) = Y(φ(x̃), dφ ỹ); both catalog covers have dφ = I.
inline Spray pullback_spray(const CoveringMap& cov, const Spray& s) {
  if (cov.dim() != s.dim()) throw Error("pullback_spray: dimension mismatch");
  if (cov.kind() == CoverKind::Identity) return s.renamed("pullback(identity, " + s.name() + ")");
  if (cov.kind() != CoverKind::Cylinder) throw Error("pullback_spray: unsupported covering kind");
  const ChartDomain& d = s.domain();
  const int ax = cov.axis();
  if (!d.exclusions().empty() || std::isfinite(d.lo()[ax]) || std::isfinite(d.hi()[ax])) {
    throw Error("pullback_spray: cylinder cover needs a target chart unbounded along the periodic axis");
  }
  FiberField base = s.field();
  FiberField accel = [cov, base](const Vec& x, const Vec& y) { return base(cov.project(x), y); };
  Spray out(s.name() + "~", d, std::move(accel), s.degree());
  FiberJacobian jx, jy;
  if (s.has_jacobian_x()) {
    jx = [cov, f = s.analytic_jacobian_x()](const Vec& x, const Vec& y) { return f(cov.project(x), y); };
  }
  if (s.has_jacobian_y()) {
    jy = [cov, f = s.analytic_jacobian_y()](const Vec& x, const Vec& y) { return f(cov.project(x), y); };
  }
  return out.with_jacobians(std::move(jx), std::move(jy));
}

}  // namespace spraylab
