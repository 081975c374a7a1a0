#pragma once

// Dormand-Prince 5(4) with the standard fourth-order continuous extension and
// terminal event location on the dense output.

#include "spraylab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace spraylab::ode {

/// Autonomous right-hand side dz/dt = f(z).
using Rhs = std::function<Vec(const Vec& z)>;

struct Options {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step = kInf;
  double initial_step = 0.0;  // 0 picks one automatically
  long max_steps = 5'000'000;
};

/// Terminal event: fires where g(z) <= 0 (g > 0 is the admissible side).
struct Event {
  std::function<double(const Vec&)> g;
  /// Optional bound on |d/dt g| near z. When present, sign dips inside a step
  /// are excluded rigorously (up to the interpolant) instead of by sampling.
  std::function<double(const Vec&)> rate;
};

struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  Vec r1, r2, r3, r4, r5;

  double t1() const { return t0 + h; }
  Vec at(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
};

enum class Stop { Reached, Event, StepUnderflow, MaxSteps };

struct Solution {
  Stop stop = Stop::Reached;
  int event_index = -1;
  std::vector<double> t;
  std::vector<Vec> z;
  std::vector<DenseStep> dense;  // dense[k] spans [t[k], t[k+1]]

  double t_end() const { return t.back(); }
  const Vec& z_end() const { return z.back(); }

  Vec at(double s) const {
    if (dense.empty() || s <= t.front()) return z.front();
    if (s >= t.back()) return z.back();
    auto it = std::upper_bound(t.begin(), t.end(), s);
    const auto k = static_cast<std::size_t>(std::distance(t.begin(), it)) - 1;
    return dense[std::min(k, dense.size() - 1)].at(s);
  }
};

namespace detail {

// Butcher tableau
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

inline double scaled_rms(const Vec& v, const Vec& a, const Vec& b, const Options& o) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double sc = o.atol + o.rtol * std::max(std::abs(a[i]), std::abs(b[i]));
    s += (v[i] / sc) * (v[i] / sc);
  }
  return std::sqrt(s / static_cast<double>(std::max<Eigen::Index>(1, v.size())));
}

inline double initial_step(const Rhs& f, const Vec& z0, const Vec& f0, const Options& o) {
  const double d0 = scaled_rms(z0, z0, z0, o);
  const double d1 = scaled_rms(f0, z0, z0, o);
  const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  const Vec f1 = f(z0 + h0 * f0);
  const double d2 = f1.allFinite() ? scaled_rms(f1 - f0, z0, z0, o) / h0 : kInf;
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
  return std::min(100.0 * h0, h1);
}

inline std::optional<double> bisect_root(const Event& ev, const DenseStep& st, double a, double b) {
  // invariant: g(a) > 0, g(b) <= 0
  for (int it = 0; it < 200 && b - a > 4e-16 * std::max(1.0, std::abs(b)); ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    (ev.g(st.at(m)) <= 0.0 ? b : a) = m;
  }
  return b;
}

inline std::optional<double> scan(const Event& ev, const DenseStep& st, double a, double b, double ga, double gb,
                                  const Vec& za, const Vec& zb, int depth, int& budget) {
  if (gb <= 0.0) return bisect_root(ev, st, a, b);
  if (ev.rate) {
    const double bound = (b - a) * 1.25 * std::max(ev.rate(za), ev.rate(zb));
    if (bound < ga + gb) return std::nullopt;
    if (depth >= 24 || --budget <= 0) return std::nullopt;
  } else if (depth >= 2) {
    return std::nullopt;
  }
  const double m = 0.5 * (a + b);
  const Vec zm = st.at(m);
  const double gm = ev.g(zm);
  if (gm <= 0.0) return bisect_root(ev, st, a, m);
  if (auto r = scan(ev, st, a, m, ga, gm, za, zm, depth + 1, budget)) return r;
  return scan(ev, st, m, b, gm, gb, zm, zb, depth + 1, budget);
}

}  // namespace detail

/// Earliest parameter in (t0, t1] of the step at which the event fires.
inline std::optional<double> locate_event(const Event& ev, const DenseStep& st, const Vec& z0, const Vec& z1) {
  int budget = 4096;
  return detail::scan(ev, st, st.t0, st.t1(), ev.g(z0), ev.g(z1), z0, z1, 0, budget);
}

/// Integrates dz/dt = f(z) from t = 0 towards t_end > 0.
inline Solution integrate(const Rhs& f, const Vec& z0, double t_end, const Options& opt,
                          const std::vector<Event>& events = {}) {
  using namespace detail;
  Solution sol;
  sol.t.push_back(0.0);
  sol.z.push_back(z0);

  for (std::size_t e = 0; e < events.size(); ++e) {
    if (events[e].g(z0) <= 0.0) {
      sol.stop = Stop::Event;
      sol.event_index = static_cast<int>(e);
      return sol;
    }
  }
  if (!(t_end > 0.0)) return sol;

  Vec z = z0;
  Vec k1 = f(z);
  if (!k1.allFinite()) {
    sol.stop = Stop::StepUnderflow;
    return sol;
  }
  double t = 0.0;
  double h = opt.initial_step > 0.0 ? opt.initial_step : initial_step(f, z, k1, opt);
  long steps = 0;

  while (t < t_end) {
    if (++steps > opt.max_steps) {
      sol.stop = Stop::MaxSteps;
      return sol;
    }
    h = std::min(h, opt.max_step);
    bool last = false;
    if (t + 1.01 * h >= t_end) {
      h = t_end - t;
      last = true;
    }
    if (h < 1e-14 * std::max(1.0, std::abs(t))) {
      sol.stop = Stop::StepUnderflow;
      return sol;
    }

    const Vec k2 = f(z + h * (a21 * k1));
    const Vec k3 = f(z + h * (a31 * k1 + a32 * k2));
    const Vec k4 = f(z + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 = f(z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec k6 = f(z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec z1 = z + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Vec k7 = z1.allFinite() ? f(z1) : z1;

    double err = kInf;
    if (k2.allFinite() && k3.allFinite() && k4.allFinite() && k5.allFinite() && k6.allFinite() &&
        k7.allFinite()) {
      const Vec ev = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      err = scaled_rms(ev, z, z1, opt);
    }

    if (!(err <= 1.0)) {
      h *= std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.25;
      continue;
    }

    DenseStep st;
    st.t0 = t;
    st.h = h;
    st.r1 = z;
    st.r2 = z1 - z;
    st.r3 = h * k1 - st.r2;
    st.r4 = st.r2 - h * k7 - st.r3;
    st.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    const double t1 = last ? t_end : t + h;

    int hit = -1;
    double t_hit = kInf;
    for (std::size_t e = 0; e < events.size(); ++e) {
      if (auto r = locate_event(events[e], st, z, z1); r && *r < t_hit) {
        t_hit = *r;
        hit = static_cast<int>(e);
      }
    }
    if (hit >= 0) {
      sol.t.push_back(t_hit);
      sol.z.push_back(st.at(t_hit));
      sol.dense.push_back(std::move(st));
      sol.stop = Stop::Event;
      sol.event_index = hit;
      return sol;
    }

    sol.t.push_back(t1);
    sol.z.push_back(z1);
    sol.dense.push_back(std::move(st));
    t = t1;
    z = z1;
    k1 = k7;
    h *= err == 0.0 ? 10.0 : std::min(10.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
  }
  sol.stop = Stop::Reached;
  return sol;
}

}  // namespace spraylab::ode
