#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "conelab/maximal.hpp"
#include "conelab/tangency.hpp"

using namespace conelab;

namespace {

SpacetimePoint P(double a, double b, double c) { return {{a, b}, c}; }

// Internally tangent partner of v at lightlike distance D along u, pushed off by gap.
SpacetimePoint tangent_partner(const SpacetimePoint& v, Vec2 u, double D, double gap) {
  const double t = D / kSqrt2;
  return {v.xp + t * u, v.x3 - t + gap};
}

// Smallest annulus width factor (in units of delta) at which x contains every sample of r.
double needed_width(const DeltaTauRectangle& r, const SpacetimePoint& x) {
  double worst = 0.0;
  for (Vec2 p : rect_samples(r)) worst = std::max(worst, std::abs(norm(p - x.xp) - x.x3));
  return worst / r.delta;
}

}  // namespace

TEST(ClassifyPairs, TangentPairLandsInNearlyLightlikeBucket) {
  const double delta = 1.0 / 64;
  const SpacetimePoint v = P(0, 0, 1);
  const SpacetimePoint w = tangent_partner(v, {1, 0}, 0.25, 0.0);
  EXPECT_NEAR(gap_delta(v, w), 0.0, 1e-12);
  const auto classes = classify_pairs({{v, w}, delta}, 0.05);
  ASSERT_EQ(classes.size(), 1u);
  const PairClass& cls = classes.begin()->second;
  EXPECT_TRUE(cls.nearly_lightlike());
  EXPECT_EQ(cls.d_band, -2);
  EXPECT_EQ(cls.count, 2);
}

TEST(ClassifyPairs, ConcentricCirclesHaveGapEqualToDistance) {
  const SpacetimePoint v = P(0, 0, 1), w = P(0, 0, 1.3);
  EXPECT_NEAR(dist_d(v, w), 0.3, 1e-15);
  EXPECT_NEAR(gap_delta(v, w), 0.3, 1e-15);
  const auto key = pair_class_key(v, w, 1.0 / 64, 0.05);
  EXPECT_EQ(key.first, static_cast<int>(std::floor(std::log2(0.3))));
  EXPECT_EQ(key.second, key.first);
}

TEST(ClassifyPairs, CountsAllOrderedPairsSymmetrically) {
  const CircleConfig X = random_frostman_config(40, 1.0 / 256, 3);
  const std::size_t n = X.circles.size();
  const auto classes = classify_pairs(X, 0.01);
  std::int64_t total = 0;
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& [key, cls] : classes) {
    total += cls.count;
    EXPECT_EQ(static_cast<std::int64_t>(cls.pairs.size()), cls.count);
    for (auto p : cls.pairs) {
      seen.insert(p);
      EXPECT_EQ(pair_class_key(X.circles[p.first], X.circles[p.second], X.delta, 0.01), key);
      EXPECT_EQ(pair_class_key(X.circles[p.second], X.circles[p.first], X.delta, 0.01), key);
    }
  }
  EXPECT_EQ(total, static_cast<std::int64_t>(n * (n - 1)));
  for (auto p : seen) EXPECT_TRUE(seen.count({p.second, p.first}));
}

TEST(ClassifyPairs, IndependentOfWorkerCount) {
  const CircleConfig X = random_frostman_config(60, 1.0 / 256, 9);
  set_workers(1);
  const auto a = classify_pairs(X, 0.01);
  set_workers(3);
  const auto b = classify_pairs(X, 0.01);
  set_workers(1);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [key, cls] : a) {
    EXPECT_EQ(b.at(key).count, cls.count);
    EXPECT_EQ(b.at(key).pairs, cls.pairs);
  }
}

TEST(NuMultiplicity, Examples) {
  const DeltaTauRectangle r{P(0.01, 0.01, 1.0), {1, 0}, 1.0 / 256, 1.0 / 16};
  EXPECT_EQ(nu_multiplicity({{r.core}, r.delta}, r, 1.0), 1);
  // A concentric circle 3 delta out contains the arc only once the width reaches 4 delta.
  const CircleConfig X{{r.core, P(0.01, 0.01, 1.0 + 3 * r.delta)}, r.delta};
  EXPECT_EQ(nu_multiplicity(X, r, 1.0), 1);
  EXPECT_EQ(nu_multiplicity(X, r, 4.5), 2);
  EXPECT_THROW(nu_multiplicity(X, r, 0.5), std::invalid_argument);
}

TEST(NuMultiplicity, MonotoneInLambda) {
  const CircleConfig X = random_frostman_config(64, 1.0 / 128, 5);
  const auto cand = candidate_rectangles(X, std::sqrt(X.delta));
  for (std::size_t i = 0; i < cand.size(); i += 7) {
    std::int64_t prev = 0;
    for (double lambda : {1.0, 1.5, 2.0, 4.0, 8.0}) {
      const auto m = nu_multiplicity(X, cand[i], lambda);
      ASSERT_GE(m, prev);
      prev = m;
    }
    EXPECT_GE(nu_multiplicity(X, cand[i], 1.0), 1);  // its own circle
  }
}

TEST(CommonPlank, DomainErrors) {
  const double delta = 1.0 / 256;
  const SpacetimePoint v = P(0, 0, 1);
  EXPECT_THROW(common_plank(v, tangent_partner(v, {1, 0}, 4 * delta, 0.0), delta), std::domain_error);
  EXPECT_THROW(common_plank(v, P(0, 0, 1.5), delta), std::domain_error);
  EXPECT_NO_THROW(common_plank(v, tangent_partner(v, {1, 0}, 0.25, 0.0), delta));
}

TEST(CommonPlank, NearlyLightlikePairsLieInDilationEight) {
  Rng rng(311);
  const double delta = 1.0 / 1024;
  for (int i = 0; i < 1000; ++i) {
    const SpacetimePoint v{{rng.uniform(0, 0.5), rng.uniform(0, 0.5)}, rng.uniform(0.9, 1.1)};
    const double D = std::exp(rng.uniform(std::log(8 * delta), std::log(0.4)));
    const double gap = rng.uniform(-1, 1) * std::pow(delta, 0.95);
    const SpacetimePoint w = tangent_partner(v, unit_from_angle(rng.uniform(0, kTwoPi)), D, gap);
    const Lightplank pl = common_plank(v, w, delta);
    ASSERT_LE(plank_dilation_needed(pl, v), 8.0);
    ASSERT_LE(plank_dilation_needed(pl, w), 8.0);
  }
}

TEST(PairCount, SingleCircleHasNoRows) {
  const CircleConfig X{{P(0.01, 0.01, 1)}, 1.0 / 64};
  const auto rep = pair_count_bound_check(X, 0.01);
  EXPECT_TRUE(rep.rows.empty());
  EXPECT_EQ(rep.max_ratio, 0.0);
}

TEST(PairCount, DuplicationRescalesTheRatio) {
  // Duplicating every circle multiplies pairs by 4, |X| by 2 and gamma by 2, so the ratio grows by sqrt 2.
  const CircleConfig X = random_frostman_config(64, 1.0 / 256, 2);
  CircleConfig X2 = X;
  X2.circles.insert(X2.circles.end(), X.circles.begin(), X.circles.end());
  const auto a = pair_count_bound_check(X, 0.01);
  const auto b = pair_count_bound_check(X2, 0.01);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  ASSERT_FALSE(a.rows.empty());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(b.rows[i].pairs, 4 * a.rows[i].pairs);
    EXPECT_EQ(b.rows[i].gamma, 2 * a.rows[i].gamma);
    EXPECT_NEAR(b.rows[i].ratio, kSqrt2 * a.rows[i].ratio, 1e-12 * (1 + a.rows[i].ratio));
  }
}

TEST(PairCount, RowsFollowTheBoundFormula) {
  const CircleConfig X = wolff_radii_config(128, 1.0 / 256, 4);
  const auto rep = pair_count_bound_check(X, 0.01);
  const double n = static_cast<double>(X.circles.size());
  for (const auto& row : rep.rows) {
    EXPECT_GE(row.D, std::pow(X.delta, 0.9) / 2);
    EXPECT_NEAR(row.bound, std::sqrt(static_cast<double>(row.gamma) * row.D / X.delta) * n, 1e-9 * row.bound);
    if (row.bound > 0) EXPECT_NEAR(row.ratio, row.pairs / row.bound, 1e-12);
    EXPECT_LE(row.ratio, rep.max_ratio);
  }
}

TEST(MainGeom, SingleCircleIsOrderOne) {
  const CircleConfig X{{P(0.01, 0.01, 1)}, 1.0 / 256};
  const double tau = std::sqrt(X.delta);
  const auto rep = main_geom_check(X, tau, 1.2);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.rows[0].M, 1);
  EXPECT_LE(rep.max_value, 2 * kTwoPi);
  EXPECT_GE(rep.max_value, 0.5);
}

TEST(MainGeom, IdenticalCirclesGrowLikeSquareRootOfCopies) {
  const SpacetimePoint c = P(0.01, 0.01, 1);
  const double delta = 1.0 / 256, tau = std::sqrt(delta);
  const auto one = main_geom_check({{c}, delta}, tau, 1.2);
  for (int k : {2, 4, 8}) {
    const auto rep = main_geom_check({std::vector<SpacetimePoint>(k, c), delta}, tau, 1.2);
    ASSERT_EQ(rep.rows.size(), 1u);
    EXPECT_EQ(rep.rows[0].M, k);
    EXPECT_EQ(rep.kept, one.kept);
    EXPECT_NEAR(rep.max_value, std::sqrt(static_cast<double>(k)) * one.max_value, 1e-12 * rep.max_value);
  }
}

TEST(MainGeom, KeptCollectionIsIncomparable) {
  const CircleConfig X = random_frostman_config(16, 1.0 / 64, 7);
  const double A = std::pow(X.delta, -0.05);
  const auto cand = candidate_rectangles(X, std::sqrt(X.delta));
  EXPECT_TRUE(std::is_sorted(cand.begin(), cand.end(), rect_lex_less));
  const auto kept = greedy_maximal_incomparable(cand, A);
  for (std::size_t i = 0; i < kept.size(); ++i)
    for (std::size_t j = i + 1; j < kept.size(); ++j) ASSERT_FALSE(comparable(kept[i], kept[j], A).has_value());
}

TEST(BothTangency, NearlyLightlikePairsShareAKeptRectangle) {
  // For each nearly lightlike pair some rectangle of the greedy collection at tau_D sits in both annuli at A^12 delta.
  Rng rng(77);
  const double delta = 1.0 / 64, eps = 0.05, A = std::pow(delta, -eps);
  int pairs = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const SpacetimePoint v{{rng.uniform(0, 0.3), rng.uniform(0, 0.3)}, rng.uniform(0.95, 1.05)};
    const double D = std::exp(rng.uniform(std::log(8 * delta), std::log(0.5)));
    const double gap = rng.uniform(-1, 1) * std::pow(delta, 1 - eps);
    const SpacetimePoint w = tangent_partner(v, unit_from_angle(rng.uniform(0, kTwoPi)), D, gap);
    CircleConfig X{{v, w}, delta};
    for (int k = 0; k < 3; ++k)
      X.circles.push_back({{rng.uniform(0, 0.3), rng.uniform(0, 0.3)}, rng.uniform(0.95, 1.05)});
    const double tau = std::max(std::sqrt(delta), tau_D(delta, dist_d(v, w)));
    const auto kept = greedy_maximal_incomparable(candidate_rectangles(X, tau), A);
    double best = 1e300;
    for (const auto& r : kept) best = std::min(best, std::max(needed_width(r, v), needed_width(r, w)));
    ASSERT_LE(best, std::pow(A, 12)) << "trial " << trial;
    ++pairs;
  }
  EXPECT_EQ(pairs, 40);
}

TEST(PointwiseMultiplicity, SumOverCollectionIsDominatedByTheField) {
  // sum over kept Omega of nu(Omega) 1_Omega(y) <= lambda^12 g_{lambda delta}(y) with lambda = A.
  const CircleConfig X = random_frostman_config(64, 1.0 / 64, 12);
  const double A = std::pow(X.delta, -0.05);
  const auto kept = greedy_maximal_incomparable(candidate_rectangles(X, std::sqrt(X.delta)), A);
  const PlaneGrid g = multiplicity_field(X, A, X.delta / 2);
  std::vector<std::int64_t> nu(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) nu[i] = nu_multiplicity(X, kept[i], A);
  const double cap = std::pow(A, 12);
  int checked = 0;
  for (int j = 0; j < g.ny; j += 3)
    for (int i = 0; i < g.nx; i += 3) {
      const double gy = g.at(i, j);
      if (gy == 0.0) continue;
      const Vec2 y = g.cell_center(i, j);
      double lhs = 0.0;
      for (std::size_t k = 0; k < kept.size(); ++k)
        if (rect_contains(kept[k], y)) lhs += static_cast<double>(nu[k]);
      ASSERT_LE(lhs, cap * gy) << "cell " << i << "," << j;
      ++checked;
    }
  EXPECT_GT(checked, 100);
}
