#include <gtest/gtest.h>

#include "conelab/geometry.hpp"

using namespace conelab;

namespace {
SpacetimePoint P(double a, double b, double c) { return {{a, b}, c}; }
}  // namespace

TEST(Distances, CircleDistanceExamples) {
  EXPECT_EQ(dist_d(P(0, 0, 1), P(0, 0, 1)), 0.0);
  EXPECT_NEAR(dist_d(P(0, 0, 1), P(0.5, 0, 0.5)), 1.0, 1e-15);
  EXPECT_NEAR(dist_d(P(0, 0, 1), P(0.1, 0, 0.95)), 0.15, 1e-15);
}

TEST(Distances, TangencyDefectExamples) {
  EXPECT_NEAR(gap_delta(P(0, 0, 1), P(0.5, 0, 0.5)), 0.0, 1e-15);
  EXPECT_NEAR(gap_delta(P(0, 0, 1), P(0.1, 0, 0.95)), 0.05, 1e-15);
  EXPECT_NEAR(gap_delta(P(0, 0, 1), P(0, 0, 0.9)), 0.1, 1e-15);
}

TEST(Cone, NearestPointExamples) {
  EXPECT_EQ(nearest_cone_point(P(2, 0, 0)), P(1, 0, 1));
  EXPECT_EQ(nearest_cone_point(P(1, 0, 1)), P(1, 0, 1));
  const SpacetimePoint w = nearest_cone_point(P(3, 0, 1));
  EXPECT_NEAR(w.xp.x, 2.0, 1e-15);
  EXPECT_NEAR(w.x3, 2.0, 1e-15);
  EXPECT_NEAR(norm(P(3, 0, 1) - w), std::sqrt(2.0), 1e-15);
  EXPECT_THROW(nearest_cone_point(P(0, 0, 3)), std::domain_error);
}

TEST(Cone, DistanceExamples) {
  EXPECT_NEAR(cone_distance(P(1, 0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(cone_distance(P(2, 0, 0)), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(cone_distance(P(0, 0, 5)), 5.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(cone_distance(P(0, 0, -5)), 5.0 / std::sqrt(2.0), 1e-14);
}

TEST(ConeProperty, NearestPointRealisesDistanceAndIsOrthogonal) {
  Rng rng(101);
  for (int i = 0; i < 1000000; ++i) {
    const double rho = rng.uniform(1e-6, 10.0);
    const double t = rng.uniform(0.0, kTwoPi);
    const SpacetimePoint x{rho * unit_from_angle(t), rng.uniform(0.0, 10.0)};
    const SpacetimePoint w = nearest_cone_point(x);
    const double d = cone_distance(x);
    ASSERT_NEAR(norm(x - w), d, 1e-9);
    const double gap = std::abs(norm(x.xp) - x.x3);
    ASSERT_LE(d, gap + 1e-12);
    ASSERT_LE(gap, 2.0 * d + 1e-12);
    // x - w is normal to the cone: orthogonal to the generator through w.
    if (norm(w) > 1e-9) ASSERT_NEAR(dot(x - w, w), 0.0, 1e-9 * (1.0 + norm(x)));
  }
}

TEST(ConeProperty, TangencyDefectIsScaledConeDistance) {
  Rng rng(102);
  for (int i = 0; i < 100000; ++i) {
    const SpacetimePoint v{{rng.uniform(0, 0.02), rng.uniform(0, 0.02)}, rng.uniform(0.99, 1.01)};
    const SpacetimePoint w{{rng.uniform(0, 0.02), rng.uniform(0, 0.02)}, rng.uniform(0.99, 1.01)};
    ASSERT_NEAR(gap_delta(v, w) / std::sqrt(2.0), cone_distance(v - w), 1e-9);
  }
}

TEST(Basis, OrthonormalAndLightlike) {
  Rng rng(103);
  for (int i = 0; i < 1000; ++i) {
    const LightlikeBasis b = LightlikeBasis::from_angle(rng.uniform(0, kTwoPi));
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) ASSERT_NEAR(dot(b.axis(a), b.axis(c)), a == c ? 1.0 : 0.0, 1e-12);
    ASSERT_NEAR(norm(b.e_l().xp), std::abs(b.e_l().x3), 1e-12);
    ASSERT_NEAR(norm(b.e_s().xp), std::abs(b.e_s().x3), 1e-12);
    ASSERT_GT(b.e_l().x3, 0.0);
  }
}

TEST(Basis, IdentityChange) {
  const LightlikeBasis b = LightlikeBasis::from_angle(0.3);
  const Mat3 M = basis_change_coefficients(b, b);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(M[i][j], i == j ? 1.0 : 0.0, 1e-12);
}

TEST(Basis, QuarterTurnRowOfShortAxis) {
  // ebar_s = -sin/sqrt2 e_m + (cos - 1)/2 e_l + (cos + 1)/2 e_s at theta = pi/2.
  const Mat3 M = basis_change_coefficients(LightlikeBasis::from_angle(0.0), LightlikeBasis::from_angle(kPi / 2));
  EXPECT_NEAR(M[kS][kM], -1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(M[kS][kL], -0.5, 1e-12);
  EXPECT_NEAR(M[kS][kS], 0.5, 1e-12);
}

TEST(BasisProperty, ChangeIsOrthogonalAndMatchesClosedForm) {
  Rng rng(104);
  for (int i = 0; i < 10000; ++i) {
    const double t0 = rng.uniform(-kPi, kPi), th = rng.uniform(-kPi, kPi);
    const Mat3 M = basis_change_coefficients(LightlikeBasis::from_angle(t0), LightlikeBasis::from_angle(t0 + th));
    const Mat3 C = basis_change_closed_form(th);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        ASSERT_NEAR(M[a][b], C[a][b], 1e-10);
        double g = 0;
        for (int k = 0; k < 3; ++k) g += M[k][a] * M[k][b];
        ASSERT_NEAR(g, a == b ? 1.0 : 0.0, 1e-10);
      }
  }
}

TEST(Plank, MembershipExamples) {
  const Lightplank pl{P(0.01, 0.01, 1.0), LightlikeBasis::from_angle(0.7), {0.001, 0.01, 0.1}, 1.0};
  EXPECT_TRUE(plank_membership(pl, pl.center, 1.0));
  const SpacetimePoint far = pl.center + (2.0 * 0.1) * pl.basis.e_l();
  EXPECT_FALSE(plank_membership(pl, far, 1.0));
  EXPECT_TRUE(plank_membership(pl, far, 2.0));
  const SpacetimePoint corner =
      pl.center + 0.001 * pl.basis.e_s() + 0.01 * pl.basis.e_m() + 0.1 * pl.basis.e_l();
  EXPECT_TRUE(plank_membership(pl, corner, 1.0));
  for (const auto& c : pl.corners(1.0)) EXPECT_NEAR(plank_dilation_needed(pl, c), 1.0, 1e-9);
}

TEST(PlankProperty, MembershipIsMonotoneInDilation) {
  Rng rng(105);
  const Lightplank pl{P(0, 0, 1), LightlikeBasis::from_angle(1.1), {0.01, 0.1, 1.0}, 1.0};
  for (int i = 0; i < 100000; ++i) {
    const SpacetimePoint x = P(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-1, 3));
    const double l = rng.uniform(1, 10), l2 = l + rng.uniform(0, 10);
    if (plank_membership(pl, x, l)) ASSERT_TRUE(plank_membership(pl, x, l2));
    const double need = plank_dilation_needed(pl, x);
    if (need <= l) ASSERT_TRUE(plank_membership(pl, x, l));
    if (need > l * (1 + 1e-6)) ASSERT_FALSE(plank_membership(pl, x, l));
  }
}

TEST(Regions, QAndBR) {
  EXPECT_TRUE(in_Q(P(0.01, 0.01, 1.0)));
  EXPECT_FALSE(in_Q(P(0.03, 0.01, 1.0)));
  EXPECT_FALSE(in_Q(P(0.01, 0.01, 1.02)));
  EXPECT_TRUE(in_BR(P(0, 16, 32), 16));
  EXPECT_FALSE(in_BR(P(0, 16, 33), 16));
}
