#include "oracles.hpp"

#include "spraylab/catalog.hpp"

#include <gtest/gtest.h>

using namespace spraylab;

TEST(EvalSpray, Flat) { EXPECT_EQ(eval_spray(make_catalog_spray("flat-plane"), vec({0, 0}), vec({1, 2})), vec({0, 0})); }

TEST(EvalSpray, HalfPlaneMatchesHandChristoffel) {
  const Spray s = make_catalog_spray("poincare-half-plane");
  EXPECT_LT((eval_spray(s, vec({0, 1}), vec({1, 0})) - vec({0, -1})).norm(), 1e-12);
  EXPECT_LT((eval_spray(s, vec({0, 1}), vec({0, 1})) - vec({0, 1})).norm(), 1e-12);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec x = vec({rng.uniform(-3, 3), rng.uniform(0.2, 4)});
    const Vec y = vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
    EXPECT_LT((eval_spray(s, x, y) - oracle::half_plane_accel(x, y)).norm(), 1e-10 * (1 + y.squaredNorm() / x[1]));
  }
}

TEST(EvalSpray, HalfPlaneWithFiniteDifferenceMetricDerivative) {
  const Spray s = spray_from_metric(half_plane_metric(false), ChartDomain::strip(2, 1, 0, kInf), "hp-fd");
  const Vec x = vec({0.3, 1.7}), y = vec({1.2, -0.4});
  EXPECT_LT((eval_spray(s, x, y) - oracle::half_plane_accel(x, y)).norm(), 1e-8);
}

TEST(EvalSpray, SphereStripMatchesHandChristoffel) {
  const Spray s = make_catalog_spray("sphere-strip");
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const Vec x = vec({rng.uniform(-1.4, 1.4), rng.uniform(-3, 3)});
    const Vec y = vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
    EXPECT_LT((eval_spray(s, x, y) - oracle::sphere_strip_accel(x, y)).norm(), 1e-10 * (1 + y.squaredNorm()));
  }
}

TEST(EvalSpray, LimitCycleFlow) {
  // J_F(1,0) = [[-2,-1],[1,0]] by hand, so J_F(1,0)(0,1) = (-1,0)
  EXPECT_LT((eval_spray(make_catalog_spray("limit-cycle-flow"), vec({1, 0}), vec({0, 1})) - vec({-1, 0})).norm(), 1e-15);
}

TEST(EvalSpray, OutsideDomainThrows) {
  EXPECT_THROW(eval_spray(make_catalog_spray("poincare-half-plane"), vec({0, -1}), vec({1, 0})), Error);
  EXPECT_THROW(eval_spray(make_catalog_spray("punctured-plane"), vec({0, 0}), vec({1, 0})), Error);
}

TEST(Identities, FlatAndHalfPlane) {
  for (const char* name : {"flat-plane", "poincare-half-plane"}) {
    const Spray s = make_catalog_spray(name);
    const auto rep = check_spray_identities(s, sample_tangent_vectors(s.domain(), 50, 4));
    EXPECT_EQ(rep.rows.size(), 50u);
    EXPECT_TRUE(rep.all_pass()) << name;
  }
}

TEST(Identities, HalfPlaneVerticalEqualsEuler) {
  const Spray s = make_catalog_spray("poincare-half-plane");
  const auto q = spray_vector(s, vec({0, 1}), vec({1, 0}));
  const auto vq = vertical(q);
  EXPECT_EQ(vq.x, vec({0, 1}));
  EXPECT_EQ(vq.y, vec({1, 0}));
  EXPECT_EQ(vq.dx, vec({0, 0}));
  EXPECT_EQ(vq.dy, vec({1, 0}));
  EXPECT_TRUE(vq == euler_field(vec({0, 1}), vec({1, 0})));
}

TEST(Identities, CorruptedQuadrupleFailsInvolution) {
  const Vec x = vec({0, 1}), y = vec({1, 2});
  const SecondTangentSample bad{x, y, 2 * y, vec({0, 0})};
  const auto c = check_quadruple(bad);
  EXPECT_FALSE(c.js_equals_s);
  EXPECT_FALSE(c.ok());
}

TEST(Homogeneity, MetricDegreeTwo) {
  const auto r = check_homogeneity(make_catalog_spray("poincare-half-plane"), 100, {2.0}, 1);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.max_relative_error, 1e-14);
}

TEST(Homogeneity, FlowDegreeOne) {
  const auto r = check_homogeneity(make_catalog_spray("limit-cycle-flow"), 100, {3.0}, 1);
  EXPECT_TRUE(r.pass);
}

TEST(Homogeneity, NegativeControlFails) {
  const auto r = check_homogeneity(make_catalog_spray("affine-offset"), 100, {0.5, 2.0, 3.0}, 1);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.max_relative_error, 1e-3);
}

TEST(Homogeneity, UndeclaredDegreeThrows) {
  const Spray s = make_catalog_spray("flat-plane").with_degree(std::nullopt);
  EXPECT_THROW(check_homogeneity(s, 10, {2.0}, 0), Error);
}

TEST(Homogeneity, EveryDeclaredCatalogEntry) {
  for (const auto& e : catalog()) {
    const Spray s = e.build(e.defaults);
    if (!s.degree()) continue;
    const auto r = check_homogeneity(s, 200, {0.5, 2.0, 3.0}, 9);
    EXPECT_EQ(r.pass, !e.negative_control) << e.name << " err " << r.max_relative_error;
  }
}

TEST(Homogeneity, FractionalDegreeDeclaredAtConstruction) {
  const Spray s = make_catalog_spray("fractional-drag", {{"m", 0.5}}).with_degree(0.5);
  EXPECT_TRUE(check_homogeneity(s, 100, {0.25, 4.0}, 2).pass);
}

TEST(SprayFromMetric, ConstantMetricsGiveZero) {
  for (const Spray& s : {spray_from_metric(euclidean_metric(3), ChartDomain::whole(3), "e3"),
                         spray_from_metric(minkowski_metric(2), ChartDomain::strip(2, 1, 0, 1), "mink")}) {
    for (const auto& [x, y] : sample_tangent_vectors(s.domain(), 50, 3)) {
      EXPECT_LE(eval_spray(s, x, y).norm(), 1e-9 * y.squaredNorm());
    }
  }
}

TEST(SprayFromMetric, DegenerateMetricThrows) {
  MetricField m;
  m.dim = 2;
  m.g = [](const Vec&) -> Mat { return Mat::Zero(2, 2); };
  m.signature = {1, 1};
  const Spray s = spray_from_metric(m, ChartDomain::whole(2), "zero");
  EXPECT_THROW(s.accel(vec({0, 0}), vec({1, 0})), Error);
}

TEST(Energy, Examples) {
  EXPECT_DOUBLE_EQ(energy(euclidean_metric(2), vec({0, 0}), vec({3, 4})), 12.5);
  EXPECT_DOUBLE_EQ(energy(minkowski_metric(2), vec({0, 0}), vec({1, 1})), 0.0);
  EXPECT_DOUBLE_EQ(energy(half_plane_metric(), vec({0, 2}), vec({2, 0})), 0.5);
}

TEST(SprayFromFlow, ConstantFieldIsFlat) {
  VectorField F{[](const Vec&) { return vec({1, 2}); }, [](const Vec&) -> Mat { return Mat::Zero(2, 2); }};
  const Spray s = spray_from_flow(F, ChartDomain::whole(2), "const");
  EXPECT_EQ(eval_spray(s, vec({3, 3}), vec({5, -1})), vec({0, 0}));
}

TEST(SprayFromFlow, Rotation) {
  EXPECT_EQ(eval_spray(make_catalog_spray("rotation-flow"), vec({1, 0}), vec({3, 5})), vec({-5, 3}));
}

TEST(Pullback, IdentityCover) {
  const Spray base = make_catalog_spray("poincare-half-plane");
  const Spray s = pullback_spray(CoveringMap::identity(2), base);
  const Vec x = vec({0.2, 1.5}), y = vec({1, -1});
  EXPECT_EQ(eval_spray(s, x, y), eval_spray(base, x, y));
}

TEST(Pullback, CylinderOfFlatIsFlat) {
  const Spray s = pullback_spray(CoveringMap::cylinder(2, 3.0), make_catalog_spray("flat-plane"));
  EXPECT_EQ(eval_spray(s, vec({4, 11}), vec({1, 2})), vec({0, 0}));
}

TEST(Pullback, CylinderCommutesWithEvaluation) {
  const double P = 2 * std::numbers::pi;
  const Spray cover = make_catalog_spray("cylinder-cover");
  const Spray base = make_catalog_spray("cylinder-periodic");
  const auto cov = CoveringMap::cylinder(2, P);
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const Vec x = vec({rng.uniform(-5, 5), rng.uniform(-40, 40)});
    const Vec y = vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
    EXPECT_EQ(cover.accel(x, y), base.accel(cov.project(x), y));
    // the closed form (0, sin(x2 mod P) y1^2)
    const double r = x[1] - P * std::floor(x[1] / P);
    EXPECT_NEAR(cover.accel(x, y)[1], std::sin(r) * y[0] * y[0], 1e-15 * (1 + y[0] * y[0]));
  }
}

TEST(Pullback, CylinderRejectsBoundedPeriodicAxis) {
  const Spray s = make_catalog_spray("flat-plane").on_domain(ChartDomain::strip(2, 1, 0, 1));
  EXPECT_THROW(pullback_spray(CoveringMap::cylinder(2, 1.0), s), Error);
}

TEST(Catalog, ListsRequiredEntries) {
  EXPECT_GE(catalog().size(), 6u);
  for (const char* n : {"minkowski-strip", "punctured-plane", "poincare-half-plane"}) EXPECT_NO_THROW(catalog_entry(n));
  EXPECT_THROW(catalog_entry("bogus"), FieldError);
}

TEST(Catalog, RejectsUnknownParameters) {
  EXPECT_THROW(make_catalog_spray("punctured-plane", {{"radius", -1.0}}), FieldError);
  try {
    make_catalog_spray("minkowski-strip", {{"width", 1.0}});
    FAIL();
  } catch (const FieldError& e) {
    EXPECT_EQ(e.path(), "parameters.width");
  }
}

TEST(Catalog, AnalyticJacobiansMatchFiniteDifferences) {
  for (const auto& e : catalog()) {
    const Spray s = e.build(e.defaults);
    if (!s.has_jacobian_x() && !s.has_jacobian_y()) continue;
    const Spray fd(s.name(), s.domain(), s.field(), s.degree());
    for (const auto& [x, y] : sample_tangent_vectors(s.domain(), 20, 6)) {
      const double scale = 1 + s.jacobian_x(x, y).norm() + s.jacobian_y(x, y).norm();
      EXPECT_LT((s.jacobian_x(x, y) - fd.jacobian_x(x, y)).norm(), 1e-6 * scale) << e.name;
      EXPECT_LT((s.jacobian_y(x, y) - fd.jacobian_y(x, y)).norm(), 1e-6 * scale) << e.name;
    }
  }
}
