#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace spraylab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_dim(const Vec& v, int n, const char* what) {
  if (v.size() != n) {
    throw Error(std::string(what) + ": expected dimension " + std::to_string(n) + ", got " +
                std::to_string(v.size()));
  }
}

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

/// Seeded generator whose output does not depend on the standard library's
/// distribution implementations (those are unspecified across vendors).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller; one variate per call keeps the stream position simple to reason about.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vec unit_vector(int n) {
    Vec v(n);
    do {
      for (int i = 0; i < n; ++i) v[i] = normal();
    } while (v.norm() < 1e-12);
    return v / v.norm();
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Deterministic directions on the unit sphere of dimension n.
/// In the plane these are `count` equally spaced angles rotated by `offset`;
/// otherwise seeded Gaussian directions.
inline std::vector<Vec> sphere_directions(int n, int count, double offset, std::uint64_t seed) {
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count));
  if (n == 1) {
    for (int k = 0; k < count; ++k) out.push_back(vec({k % 2 == 0 ? 1.0 : -1.0}));
    return out;
  }
  if (n == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = offset + 2.0 * std::numbers::pi * k / count;
      out.push_back(vec({std::cos(th), std::sin(th)}));
    }
    return out;
  }
  Rng rng(seed);
  for (int k = 0; k < count; ++k) out.push_back(rng.unit_vector(n));
  return out;
}

}  // namespace spraylab
