#include "spraylab/geometry.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace spraylab;

namespace {

ChartDomain punctured() { return ChartDomain(Vec::Constant(2, -kInf), Vec::Constant(2, kInf), {Ball{vec({0, 0}), 0.5}}); }

}  // namespace

TEST(Contains, WholePlane) { EXPECT_TRUE(ChartDomain::whole(2).contains(vec({3, 4}))); }

TEST(Contains, InsideExcludedBall) { EXPECT_FALSE(punctured().contains(vec({0.3, 0}))); }

TEST(Contains, StripBoundaryIsExcluded) {
  const auto s = ChartDomain::strip(2, 1, 0, 1);
  EXPECT_TRUE(s.contains(vec({100, 0.5})));
  EXPECT_FALSE(s.contains(vec({0, 1.0})));
}

TEST(Contains, ClosedBallSurfaceIsExcluded) { EXPECT_FALSE(punctured().contains(vec({0.5, 0}))); }

TEST(Contains, DimensionMismatchThrows) { EXPECT_THROW(ChartDomain::whole(2).contains(vec({1, 2, 3})), Error); }

TEST(DistanceToComplement, Examples) {
  EXPECT_EQ(ChartDomain::whole(2).distance_to_complement(vec({5, -2})), kInf);
  EXPECT_DOUBLE_EQ(ChartDomain::strip(2, 1, 0, 1).distance_to_complement(vec({7, 0.25})), 0.25);
  EXPECT_DOUBLE_EQ(punctured().distance_to_complement(vec({1, 0})), 0.5);
  EXPECT_THROW(punctured().distance_to_complement(vec({0.1, 0})), Error);
}

TEST(ChartDomain, RejectsBadInput) {
  EXPECT_THROW(ChartDomain(vec({0, 0}), vec({1, 0})), FieldError);
  try {
    ChartDomain(Vec::Constant(2, -kInf), Vec::Constant(2, kInf), {Ball{vec({0, 0}), -1.0}});
    FAIL();
  } catch (const FieldError& e) {
    EXPECT_EQ(e.path(), "exclusions[0].radius");
  }
  try {
    ChartDomain(vec({0, 0}), vec({1, 1}), {Ball{vec({0.5, 0.5}), 0.1}, Ball{vec({5, 5}), 0.1}});
    FAIL();
  } catch (const FieldError& e) {
    EXPECT_EQ(e.path(), "exclusions[1].center");
  }
}

TEST(CompactExhaustion, FullPlane) {
  const CompactSet a = compact_exhaustion(ChartDomain::whole(2), 2);
  ASSERT_EQ(a.boxes().size(), 1u);
  EXPECT_EQ(a.boxes()[0].lo, vec({-2, -2}));
  EXPECT_EQ(a.boxes()[0].hi, vec({2, 2}));
}

TEST(CompactExhaustion, Strip) {
  const CompactSet a = compact_exhaustion(ChartDomain::strip(2, 1, 0, 1), 4);
  EXPECT_EQ(a.boxes()[0].lo, vec({-4, 0.25}));
  EXPECT_EQ(a.boxes()[0].hi, vec({4, 0.75}));
}

TEST(CompactExhaustion, PuncturedPlane) {
  const CompactSet a = compact_exhaustion(punctured(), 10);
  EXPECT_EQ(a.boxes()[0].lo, vec({-10, -10}));
  ASSERT_EQ(a.holes().size(), 1u);
  EXPECT_NEAR(a.holes()[0].radius, 0.6, 1e-15);
  EXPECT_FALSE(a.contains(vec({0.59, 0})));
  EXPECT_TRUE(a.contains(vec({0.6, 0})));
}

TEST(CompactExhaustion, NestingProperty) {
  for (const ChartDomain& d : {ChartDomain::whole(2), ChartDomain::strip(2, 1, 0, 1), punctured(),
                               ChartDomain::strip(2, 1, 0, kInf)}) {
    for (int n = 1; n <= 20; ++n) {
      const CompactSet a = compact_exhaustion(d, n), b = compact_exhaustion(d, n + 1);
      if (a.empty()) continue;
      a.validate_in(d);
      for (const Vec& p : a.grid_points(9)) {
        ASSERT_TRUE(b.contains(p)) << "n=" << n;
        ASSERT_GT(b.depth(p), 0.0) << "n=" << n;
      }
    }
  }
}

TEST(CompactExhaustion, CoversSampledDomainPoints) {
  const ChartDomain d = punctured();
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec p = vec({rng.uniform(-30, 30), rng.uniform(-30, 30)});
    if (!d.contains(p)) continue;
    bool covered = false;
    for (int n = 1; n <= 4096 && !covered; n *= 2) covered = compact_exhaustion(d, n).contains(p);
    EXPECT_TRUE(covered) << p.transpose();
  }
}

TEST(DistanceToComplement, OneLipschitzAlongSegments) {
  const ChartDomain d(vec({-3, 0}), vec({3, 2}), {Ball{vec({0, 1}), 0.4}, Ball{vec({1, 1.2}), 0.3}});
  Rng rng(11);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    const Vec p = vec({rng.uniform(-3, 3), rng.uniform(0, 2)});
    const Vec q = vec({rng.uniform(-3, 3), rng.uniform(0, 2)});
    if (!d.contains(p) || !d.contains(q)) continue;
    for (int k = 0; k < 10; ++k) {
      const Vec a = p + (q - p) * (k / 10.0), b = p + (q - p) * ((k + 1) / 10.0);
      if (!d.contains(a) || !d.contains(b)) continue;
      EXPECT_LE(std::abs(d.distance_to_complement(a) - d.distance_to_complement(b)), (a - b).norm() + 1e-15);
      ++checked;
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(CompactSet, ValidateRejectsSetsTouchingTheBoundary) {
  const auto strip = ChartDomain::strip(2, 1, 0, 1);
  EXPECT_NO_THROW(CompactSet::box(vec({-1, 0.25}), vec({1, 0.75})).validate_in(strip));
  EXPECT_THROW(CompactSet::box(vec({-1, 0.0}), vec({1, 0.75})).validate_in(strip), FieldError);
  EXPECT_THROW(CompactSet::box(vec({-1, -1}), vec({1, 1})).validate_in(punctured()), FieldError);
}

TEST(CompactSet, GridsAreNestedAcrossLevels) {
  const CompactSet k = CompactSet::box(vec({-1, 0.25}), vec({1, 0.75}));
  for (int level = 0; level < 3; ++level) {
    const auto coarse = k.grid_points((3 - 1) * (1 << level) + 1);
    const auto fine = k.grid_points((3 - 1) * (1 << (level + 1)) + 1);
    for (const Vec& p : coarse) {
      EXPECT_TRUE(std::any_of(fine.begin(), fine.end(), [&](const Vec& q) { return q == p; }));
    }
  }
}

TEST(CoveringMap, Identity) {
  const auto c = CoveringMap::identity(2);
  EXPECT_EQ(c.project(vec({1, 2})), vec({1, 2}));
}

TEST(CoveringMap, CylinderReduction) {
  const auto c = CoveringMap::cylinder(2, 2 * std::numbers::pi);
  const Vec p = c.project(vec({0, 7}));
  EXPECT_EQ(p[0], 0.0);
  EXPECT_DOUBLE_EQ(p[1], 7 - 2 * std::numbers::pi);
  EXPECT_EQ(c.lift_velocity(vec({0, 7}), vec({1, 1})), vec({1, 1}));
}

TEST(CoveringMap, DeckTranslationInvariance) {
  const auto c = CoveringMap::cylinder(2, 2.5);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Vec p = vec({rng.uniform(-10, 10), rng.uniform(-10, 10)});
    const Vec a = c.project(p), b = c.project(p + c.deck_translation());
    EXPECT_EQ(a[0], b[0]);
    // exact up to the rounding of p + P itself
    EXPECT_NEAR(a[1], b[1], 4 * std::numeric_limits<double>::epsilon() * (std::abs(p[1]) + 2.5));
  }
}

TEST(CoveringMap, RejectsBadPeriod) { EXPECT_THROW(CoveringMap::cylinder(2, 0.0), FieldError); }
