#pragma once

// Manifolds as open coordinate charts: a box (possibly unbounded) minus finitely
// many closed balls, with the Euclidean metric of the chart as auxiliary metric.

#include "spraylab/linalg.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spraylab {

/// Validation failure that knows which field of its input was wrong, so the
/// config layer can report a full key path such as "domain.exclusions[0].radius".
class FieldError : public Error {
 public:
  FieldError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)), message_(message) {}

  const std::string& path() const noexcept { return path_; }
  const std::string& message() const noexcept { return message_; }

  FieldError prefixed(const std::string& prefix) const {
    return FieldError(path_.empty() ? prefix : prefix + "." + path_, message_);
  }

 private:
  std::string path_;
  std::string message_;
};

struct Ball {
  Vec center;
  double radius = 0.0;
};

class ChartDomain {
 public:
  ChartDomain(Vec lo, Vec hi, std::vector<Ball> exclusions = {})
      : lo_(std::move(lo)), hi_(std::move(hi)), exclusions_(std::move(exclusions)) {
    if (lo_.size() == 0 || lo_.size() != hi_.size()) {
      throw FieldError("axes", "box bounds must be nonempty and of equal dimension");
    }
    for (int i = 0; i < dim(); ++i) {
      if (!(lo_[i] < hi_[i])) {
        throw FieldError("axes[" + std::to_string(i) + "]", "lower bound must be below upper bound");
      }
    }
    for (std::size_t k = 0; k < exclusions_.size(); ++k) {
      const Ball& b = exclusions_[k];
      const std::string at = "exclusions[" + std::to_string(k) + "]";
      if (b.center.size() != dim()) throw FieldError(at + ".center", "dimension mismatch");
      if (!(b.radius > 0.0) || !std::isfinite(b.radius)) {
        throw FieldError(at + ".radius", "radius must be positive and finite");
      }
      if (!in_open_box(b.center)) throw FieldError(at + ".center", "center must lie inside the box");
    }
  }

  static ChartDomain whole(int n) { return {Vec::Constant(n, -kInf), Vec::Constant(n, kInf)}; }

  /// Open strip lo < x[axis] < hi in n-space.
  static ChartDomain strip(int n, int axis, double lo, double hi) {
    Vec l = Vec::Constant(n, -kInf), h = Vec::Constant(n, kInf);
    l[axis] = lo;
    h[axis] = hi;
    return {l, h};
  }

  int dim() const noexcept { return static_cast<int>(lo_.size()); }
  const Vec& lo() const noexcept { return lo_; }
  const Vec& hi() const noexcept { return hi_; }
  const std::vector<Ball>& exclusions() const noexcept { return exclusions_; }

  bool is_whole_space() const {
    return exclusions_.empty() && (lo_.array() == -kInf).all() && (hi_.array() == kInf).all();
  }

  bool contains(const Vec& p) const {
    require_dim(p, dim(), "contains");
    if (!in_open_box(p)) return false;
    return std::all_of(exclusions_.begin(), exclusions_.end(),
                       [&](const Ball& b) { return (p - b.center).norm() > b.radius; });
  }

  /// Distance to the nearest face or exclusion surface, negative outside.
  /// Defined everywhere, which is what event detection needs.
  double signed_distance(const Vec& p) const {
    double d = kInf;
    for (int i = 0; i < dim(); ++i) {
      if (std::isfinite(lo_[i])) d = std::min(d, p[i] - lo_[i]);
      if (std::isfinite(hi_[i])) d = std::min(d, hi_[i] - p[i]);
    }
    for (const Ball& b : exclusions_) d = std::min(d, (p - b.center).norm() - b.radius);
    return d;
  }

  double distance_to_complement(const Vec& p) const {
    if (!contains(p)) throw Error("distance_to_complement: point is not in the domain");
    return signed_distance(p);
  }

 private:
  bool in_open_box(const Vec& p) const {
    for (int i = 0; i < dim(); ++i) {
      if (!(p[i] > lo_[i] && p[i] < hi_[i])) return false;
    }
    return true;
  }

  Vec lo_, hi_;
  std::vector<Ball> exclusions_;
};

struct Box {
  Vec lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  /// min over faces of the inward distance; negative outside.
  double depth(const Vec& p) const {
    return std::min((p - lo).minCoeff(), (hi - p).minCoeff());
  }
  double volume() const { return (hi - lo).prod(); }
};

/// Finite union of closed boxes minus finitely many open balls.
class CompactSet {
 public:
  CompactSet() = default;
  CompactSet(std::vector<Box> boxes, double margin, std::vector<Ball> holes = {})
      : boxes_(std::move(boxes)), holes_(std::move(holes)), margin_(margin) {
    for (std::size_t k = 0; k < boxes_.size(); ++k) {
      const Box& b = boxes_[k];
      const std::string at = "boxes[" + std::to_string(k) + "]";
      if (b.lo.size() == 0 || b.lo.size() != b.hi.size()) throw FieldError(at, "bad dimension");
      if (b.lo.size() != boxes_.front().lo.size()) throw FieldError(at, "dimension mismatch");
      if (!b.lo.allFinite() || !b.hi.allFinite()) throw FieldError(at, "bounds must be finite");
      if ((b.lo.array() > b.hi.array()).any()) throw FieldError(at, "lo must not exceed hi");
    }
    if (!(margin_ > 0.0)) throw FieldError("margin", "margin must be positive");
  }

  static CompactSet box(Vec lo, Vec hi, double margin = 1e-3) {
    return CompactSet({Box{std::move(lo), std::move(hi)}}, margin);
  }

  bool empty() const noexcept { return boxes_.empty(); }
  int dim() const { return empty() ? 0 : boxes_.front().dim(); }
  const std::vector<Box>& boxes() const noexcept { return boxes_; }
  const std::vector<Ball>& holes() const noexcept { return holes_; }
  double margin() const noexcept { return margin_; }

  bool contains(const Vec& p) const {
    bool in_box = std::any_of(boxes_.begin(), boxes_.end(), [&](const Box& b) { return b.contains(p); });
    if (!in_box) return false;
    return std::none_of(holes_.begin(), holes_.end(),
                        [&](const Ball& h) { return (p - h.center).norm() < h.radius; });
  }

  /// Positive in the interior, negative outside, 1-Lipschitz.
  double depth(const Vec& p) const {
    double d = -kInf;
    for (const Box& b : boxes_) d = std::max(d, b.depth(p));
    for (const Ball& h : holes_) d = std::min(d, (p - h.center).norm() - h.radius);
    return d;
  }

  bool interior_contains(const Vec& p) const { return depth(p) > 0.0; }

  Box bounding_box() const {
    if (empty()) throw Error("bounding_box of an empty set");
    Box bb = boxes_.front();
    for (const Box& b : boxes_) {
      bb.lo = bb.lo.cwiseMin(b.lo);
      bb.hi = bb.hi.cwiseMax(b.hi);
    }
    return bb;
  }

  CompactSet inflated(double d) const {
    std::vector<Box> bs;
    for (const Box& b : boxes_) bs.push_back({b.lo.array() - d, b.hi.array() + d});
    std::vector<Ball> hs;
    for (const Ball& h : holes_) {
      if (h.radius - d > 0.0) hs.push_back({h.center, h.radius - d});
    }
    return CompactSet(std::move(bs), margin_, std::move(hs));
  }

  /// Regular grid with `per_axis` points along each non-degenerate axis of
  /// every box, minus points inside holes. Grids of per_axis = (c-1)*2^l + 1
  /// are nested in l.
  std::vector<Vec> grid_points(int per_axis) const {
    std::vector<Vec> out;
    for (const Box& b : boxes_) {
      const int n = b.dim();
      std::vector<int> counts(static_cast<std::size_t>(n));
      long total = 1;
      for (int i = 0; i < n; ++i) {
        counts[i] = b.hi[i] > b.lo[i] ? std::max(per_axis, 2) : 1;
        total *= counts[i];
      }
      for (long idx = 0; idx < total; ++idx) {
        Vec p(n);
        long rem = idx;
        for (int i = 0; i < n; ++i) {
          const int k = static_cast<int>(rem % counts[i]);
          rem /= counts[i];
          p[i] = counts[i] == 1 ? b.lo[i] : b.lo[i] + (b.hi[i] - b.lo[i]) * k / (counts[i] - 1);
        }
        if (contains(p)) out.push_back(std::move(p));
      }
    }
    return out;
  }

  /// Uniform-per-box rejection sample; nullopt if nothing was accepted.
  std::optional<Vec> sample(Rng& rng, int max_tries = 1000) const {
    if (empty()) return std::nullopt;
    for (int t = 0; t < max_tries; ++t) {
      const auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(boxes_.size()));
      const Box& b = boxes_[std::min(k, boxes_.size() - 1)];
      Vec p(b.dim());
      for (int i = 0; i < b.dim(); ++i) p[i] = rng.uniform(b.lo[i], b.hi[i]);
      if (contains(p)) return p;
    }
    return std::nullopt;
  }

  /// Corners, face centers and a 5-per-axis grid of every box must be domain
  /// members at distance >= margin from the complement.
  void validate_in(const ChartDomain& domain) const {
    for (std::size_t k = 0; k < boxes_.size(); ++k) {
      const Box& b = boxes_[k];
      if (b.dim() != domain.dim()) {
        throw FieldError("boxes[" + std::to_string(k) + "]", "dimension differs from the domain");
      }
      std::vector<Vec> probes = CompactSet({b}, margin_).grid_points(5);
      const Vec mid = 0.5 * (b.lo + b.hi);
      for (int i = 0; i < b.dim(); ++i) {
        Vec f = mid;
        f[i] = b.lo[i];
        probes.push_back(f);
        f[i] = b.hi[i];
        probes.push_back(f);
      }
      // rounding slack: l + 1/n is not exactly 1/n away from l
      const double need = margin_ * (1.0 - 1e-12) - 1e-15;
      for (const Vec& p : probes) {
        if (!contains(p)) continue;
        if (!domain.contains(p) || domain.signed_distance(p) < need) {
          throw FieldError("boxes[" + std::to_string(k) + "]",
                           "set does not keep the required margin inside the domain");
        }
      }
    }
  }

 private:
  std::vector<Box> boxes_;
  std::vector<Ball> holes_;
  double margin_ = 1e-3;
};

/// A_n: the domain box clipped to half-width scale*n around a fixed anchor,
/// minus open 1/n-neighborhoods of all faces and exclusions.
inline CompactSet compact_exhaustion(const ChartDomain& domain, int n, double scale = 1.0) {
  if (n < 1) throw Error("compact_exhaustion: index must be >= 1");
  const int dim = domain.dim();
  const double inv = 1.0 / n;
  Vec lo(dim), hi(dim);
  for (int i = 0; i < dim; ++i) {
    const double l = domain.lo()[i], h = domain.hi()[i];
    double anchor = 0.0;
    if (std::isfinite(l) && std::isfinite(h)) {
      anchor = 0.5 * (l + h);
    } else if (std::isfinite(l) && anchor <= l) {
      anchor = l + 1.0;
    } else if (std::isfinite(h) && anchor >= h) {
      anchor = h - 1.0;
    }
    lo[i] = anchor - scale * n;
    hi[i] = anchor + scale * n;
    if (std::isfinite(l)) lo[i] = std::max(lo[i], l + inv);
    if (std::isfinite(h)) hi[i] = std::min(hi[i], h - inv);
    if (lo[i] > hi[i]) return CompactSet({}, inv);
  }
  std::vector<Ball> holes;
  for (const Ball& b : domain.exclusions()) holes.push_back({b.center, b.radius + inv});
  return CompactSet({Box{lo, hi}}, inv, std::move(holes));
}

enum class CoverKind { Identity, Cylinder };

/// Catalog covering maps of a chart: the identity, or the plane onto the
/// cylinder x[axis] mod period.
class CoveringMap {
 public:
  static CoveringMap identity(int n) { return CoveringMap(CoverKind::Identity, n, 0, 0.0); }
  static CoveringMap cylinder(int n, double period, int axis = 1) {
    if (!(period > 0.0) || !std::isfinite(period)) throw FieldError("period", "must be positive");
    if (axis < 0 || axis >= n) throw FieldError("axis", "out of range");
    return CoveringMap(CoverKind::Cylinder, n, axis, period);
  }

  CoverKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  int axis() const noexcept { return axis_; }
  double period() const noexcept { return period_; }

  Vec project(const Vec& p) const {
    require_dim(p, dim_, "cover_project");
    if (kind_ == CoverKind::Identity) return p;
    Vec q = p;
    q[axis_] = p[axis_] - period_ * std::floor(p[axis_] / period_);
    return q;
  }

  /// Both catalog covers have identity derivative.
  Vec lift_velocity(const Vec& x, const Vec& y) const {
    require_dim(x, dim_, "cover_lift_velocity");
    require_dim(y, dim_, "cover_lift_velocity");
    return y;
  }

  Vec deck_translation() const {
    Vec t = Vec::Zero(dim_);
    if (kind_ == CoverKind::Cylinder) t[axis_] = period_;
    return t;
  }

 private:
  CoveringMap(CoverKind k, int n, int axis, double period) : kind_(k), dim_(n), axis_(axis), period_(period) {}

  CoverKind kind_;
  int dim_;
  int axis_;
  double period_;
};

}  // namespace spraylab
