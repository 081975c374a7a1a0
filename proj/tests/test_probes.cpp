#include "oracles.hpp"

#include "spraylab/catalog.hpp"
#include "spraylab/probes.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace spraylab;

namespace {

ProbeGrid small_grid(int c0, int levels) {
  ProbeGrid g;
  g.endpoints_per_axis = c0;
  g.levels = levels;
  g.seed = 17;
  return g;
}

CompactSet two_sides() {
  return CompactSet({Box{vec({-2, -1}), vec({-2, 1})}, Box{vec({2, -1}), vec({2, 1})}}, 1e-3);
}

HullLevel level(double min_distance, double volume) {
  HullLevel l;
  l.min_distance = min_distance;
  l.hull_volume = volume;
  return l;
}

}  // namespace

TEST(ProbeGrid, NestedPointCounts) {
  const ProbeGrid g = small_grid(7, 4);
  EXPECT_EQ(g.points_per_axis(0), 7);
  EXPECT_EQ(g.points_per_axis(3), 49);
}

TEST(ProbeGrid, ValidationNamesTheField) {
  ProbeGrid g;
  g.levels = 1;
  try {
    g.validate();
    FAIL();
  } catch (const FieldError& e) {
    EXPECT_EQ(e.path(), "levels");
  }
}

TEST(PseudoconvexityRule, SyntheticLevels) {
  std::string why;
  EXPECT_EQ(detail::pseudoconvexity_rule({level(0.02, 4), level(0.005, 4)}, 1, 1e-2, &why), Verdict::Fail);
  // shrinking, but not fast enough
  EXPECT_EQ(detail::pseudoconvexity_rule({level(0.008, 4), level(0.006, 4)}, 1, 1e-2, &why), Verdict::Inconclusive);
  EXPECT_EQ(detail::pseudoconvexity_rule({level(0.25, 4), level(0.25, 4.01)}, 1, 1e-2, &why), Verdict::Pass);
  // hull still growing
  EXPECT_EQ(detail::pseudoconvexity_rule({level(0.25, 4), level(0.25, 4.2)}, 1, 1e-2, &why), Verdict::Inconclusive);
  // bounded away, but not by 10x the threshold
  EXPECT_EQ(detail::pseudoconvexity_rule({level(0.05, 4), level(0.05, 4)}, 1, 1e-2, &why), Verdict::Inconclusive);
  EXPECT_EQ(detail::pseudoconvexity_rule({level(0.25, 4)}, 0, 1e-2, &why), Verdict::Inconclusive);
}

TEST(Pseudoconvexity, StripPasses) {
  const Spray s = make_catalog_spray("minkowski-strip");
  const auto rep = pseudoconvexity_probe(s, CompactSet::box(vec({-1, 0.25}), vec({1, 0.75})), small_grid(3, 3));
  EXPECT_EQ(rep.verdict, Verdict::Pass) << rep.reason;
  const Box& h = rep.hull.levels.back().hull;
  EXPECT_GE(h.lo[0], -1.1 - 1e-12);
  EXPECT_LE(h.hi[0], 1.1 + 1e-12);
  EXPECT_GE(h.lo[1], 0.2);
  EXPECT_LE(h.hi[1], 0.8);
  EXPECT_TRUE(rep.witnesses.empty());
  for (const auto& l : rep.hull.levels) EXPECT_EQ(l.found, l.pairs);
}

TEST(Pseudoconvexity, FlatPlaneHullIsInflatedBox) {
  const auto rep =
      pseudoconvexity_probe(make_catalog_spray("flat-plane"), CompactSet::box(vec({0, 0}), vec({1, 1})), small_grid(3, 2));
  EXPECT_EQ(rep.verdict, Verdict::Pass);
  const Box& h = rep.hull.levels.back().hull;
  EXPECT_LT((h.lo - vec({-0.05, -0.05})).norm(), 1e-9);
  EXPECT_LT((h.hi - vec({1.05, 1.05})).norm(), 1e-9);
}

TEST(Pseudoconvexity, PuncturedPlaneDistancesFollowGrazingChords) {
  const ProbeGrid g = small_grid(3, 3);
  const auto rep = pseudoconvexity_probe(make_catalog_spray("punctured-plane"), two_sides(), g);
  ASSERT_EQ(rep.hull.levels.size(), 3u);
  double prev = kInf;
  for (const auto& l : rep.hull.levels) {
    const double expect = oracle::punctured_grazing_distance(g.points_per_axis(l.level));
    EXPECT_NEAR(l.min_distance, expect, 1e-6) << "level " << l.level;
    EXPECT_LT(l.min_distance, prev);
    EXPECT_LT(l.found, l.pairs);
    prev = l.min_distance;
  }
  // the witness point sits next to the excluded ball
  const auto& fin = rep.hull.levels.back();
  EXPECT_NEAR(fin.witness_point.norm(), 0.5 + fin.min_distance, 1e-6);
}

TEST(Pseudoconvexity, BudgetExhaustionIsInconclusive) {
  ProbeGrid g = small_grid(3, 3);
  g.max_pairs = 50;
  const auto rep = pseudoconvexity_probe(make_catalog_spray("flat-plane"), CompactSet::box(vec({0, 0}), vec({1, 1})), g);
  EXPECT_TRUE(rep.hull.budget_exhausted);
  EXPECT_EQ(rep.verdict, Verdict::Inconclusive);
}

TEST(Pseudoconvexity, CompactSetOutsideDomainRejected) {
  EXPECT_THROW(pseudoconvexity_probe(make_catalog_spray("minkowski-strip"), CompactSet::box(vec({-1, 0}), vec({1, 0.5})),
                                     small_grid(3, 2)),
               FieldError);
}

TEST(GeodesicHull, HalfPlaneArcsBulgeUpward) {
  const CompactSet K = CompactSet::box(vec({-1, 1}), vec({1, 2}));
  const ProbeGrid g = small_grid(3, 2);
  const HullEstimate h = geodesic_hull(make_catalog_spray("poincare-half-plane"), K, g);
  ASSERT_EQ(h.levels.size(), 2u);
  for (const auto& l : h.levels) EXPECT_EQ(l.found, l.pairs);
  // an arc's lowest point is one of its endpoints, its highest the apex when
  // the centre lies between them
  const auto pts = K.grid_points(g.points_per_axis(1));
  double top = 2.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (pts[i][0] == pts[j][0]) continue;
      const auto arc = oracle::semicircle_through(pts[i], pts[j]);
      if ((arc.cx - pts[i][0]) * (arc.cx - pts[j][0]) < 0) top = std::max(top, arc.r);
    }
  EXPECT_NEAR(h.raw_bounds.hi[1], top, 1e-4);
  EXPECT_NEAR(h.raw_bounds.lo[1], 1.0, 1e-9);
  // only the inflation puts the estimate below the bottom edge of K
  EXPECT_LT(h.hull.boxes()[0].lo[1], 1.0);
  EXPECT_LT((h.levels[1].hull_volume - h.levels[0].hull_volume) / h.levels[0].hull_volume, 0.01);
}

TEST(GeodesicHull, CachedPairsAreNotRecomputed) {
  const HullEstimate h = geodesic_hull(make_catalog_spray("flat-plane"), CompactSet::box(vec({0, 0}), vec({1, 1})),
                                       small_grid(3, 2));
  // flat chords converge from the first start, so attempts count fresh pairs
  EXPECT_EQ(h.levels[0].starts_attempted, h.levels[0].pairs);
  EXPECT_EQ(h.levels[1].starts_attempted, h.levels[1].pairs);
}

TEST(Disprisonment, FlatPlaneEverythingEscapes) {
  ProbeGrid g = small_grid(3, 2);
  const auto rep = disprisonment_probe(make_catalog_spray("flat-plane"), CompactSet::box(vec({-5, -5}), vec({5, 5})), g);
  EXPECT_EQ(rep.verdict, Verdict::Pass) << rep.reason;
  EXPECT_EQ(rep.samples.size(), 9u * static_cast<std::size_t>(g.directions));
  EXPECT_LE(rep.max_escape, 10 * 10 * std::sqrt(2.0));
  for (const auto& s : rep.samples) {
    EXPECT_EQ(s.forward, Termination::EscapedSet);
    EXPECT_EQ(s.backward, Termination::EscapedSet);
  }
}

TEST(Disprisonment, StripGeodesicsEscapeOrLeaveTheDomain) {
  const auto rep = disprisonment_probe(make_catalog_spray("minkowski-strip"),
                                       CompactSet::box(vec({-5, 0.1}), vec({5, 0.9})), small_grid(3, 2));
  EXPECT_EQ(rep.verdict, Verdict::Pass) << rep.reason;
  for (const auto& s : rep.samples) {
    EXPECT_FALSE(s.imprisoned);
    for (Termination t : {s.forward, s.backward})
      EXPECT_TRUE(t == Termination::EscapedSet || t == Termination::DomainExit) << to_string(t);
  }
}

TEST(Disprisonment, LimitCycleImprisons) {
  ProbeGrid g = small_grid(3, 2);
  g.initial_conditions = {{vec({1, 0}), vec({0, 1})}};
  const auto rep = disprisonment_probe(make_catalog_spray("limit-cycle-flow"), CompactSet::box(vec({-2, -2}), vec({2, 2})), g);
  EXPECT_EQ(rep.verdict, Verdict::Fail);
  ASSERT_FALSE(rep.witnesses.empty());
  const auto& w = rep.samples[rep.witnesses.front()];
  EXPECT_EQ(w.x, vec({1, 0}));
  EXPECT_TRUE(w.imprisoned);
  EXPECT_EQ(w.dwell, 1e3);
  EXPECT_GE(w.radius_min, 0.5);
  EXPECT_LE(w.radius_max, 1.5);
  ASSERT_TRUE(w.period.has_value());
  EXPECT_NEAR(*w.period, 2 * std::numbers::pi, 1e-6);
}

TEST(Disprisonment, SeededDirectionsAreReproducible) {
  const auto K = CompactSet::box(vec({-1, -1}), vec({1, 1}));
  const auto a = disprisonment_probe(make_catalog_spray("flat-plane"), K, small_grid(3, 2));
  const auto b = disprisonment_probe(make_catalog_spray("flat-plane"), K, small_grid(3, 2));
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_EQ(a.samples[i].v, b.samples[i].v);
}

TEST(PeriodicReturn, RotationCircle) {
  IntegratorControls c;
  c.t_max = 10.0;
  const Trajectory tr = integrate_geodesic(make_catalog_spray("rotation-flow"), vec({1, 0}), vec({0, 1}), c);
  const auto p = periodic_return(tr);
  ASSERT_TRUE(p.has_value());
  EXPECT_NEAR(*p, 2 * std::numbers::pi, 1e-7);
}

TEST(PeriodicReturn, NoneForStraightLine) {
  IntegratorControls c;
  c.t_max = 10.0;
  EXPECT_FALSE(periodic_return(integrate_geodesic(make_catalog_spray("flat-plane"), vec({0, 0}), vec({1, 0}), c)));
}

TEST(Survey, FlatPlaneConnectsEverything) {
  const auto s = connectedness_survey(make_catalog_spray("flat-plane"), CompactSet::box(vec({-1, -1}), vec({1, 1})), 100,
                                      3, {}, {});
  EXPECT_EQ(s.pairs.size(), 100u);
  EXPECT_EQ(s.success_rate, 1.0);
}

TEST(Survey, HalfPlaneIsGeodesicallyConnected) {
  const auto s = connectedness_survey(make_catalog_spray("poincare-half-plane"),
                                      CompactSet::box(vec({-2, 0.5}), vec({2, 3})), 100, 5, {}, {});
  EXPECT_EQ(s.success_rate, 1.0);
  EXPECT_LT(s.max_residual, 1e-6);
  EXPECT_TRUE(s.failures.empty());
}

TEST(Survey, PuncturedPlaneListsBlockedPairs) {
  const CompactSet straddle({Box{vec({-2, -0.4}), vec({-1, 0.4})}, Box{vec({1, -0.4}), vec({2, 0.4})}}, 1e-3);
  ShootingStrategy st;
  st.multistart = 4;
  const auto s = connectedness_survey(make_catalog_spray("punctured-plane"), straddle, 30, 7, st, {});
  EXPECT_LT(s.success_rate, 1.0);
  EXPECT_FALSE(s.failures.empty());
  for (std::size_t i : s.failures) {
    // every blocked pair's chord meets the closed ball
    EXPECT_LE(oracle::origin_to_segment(s.pairs[i].p, s.pairs[i].q), 0.5 + 1e-6);
  }
}

TEST(Survey, SameSeedSamePairs) {
  const auto K = CompactSet::box(vec({-1, -1}), vec({1, 1}));
  const auto a = connectedness_survey(make_catalog_spray("flat-plane"), K, 10, 9, {}, {});
  const auto b = connectedness_survey(make_catalog_spray("flat-plane"), K, 10, 9, {}, {});
  for (std::size_t i = 0; i < a.pairs.size(); ++i) EXPECT_EQ(a.pairs[i].p, b.pairs[i].p);
}
