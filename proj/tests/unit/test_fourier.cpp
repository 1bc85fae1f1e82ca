#include <gtest/gtest.h>

#include <cmath>

#include "conelab/fourier.hpp"

using namespace conelab;

namespace {

// Composite Simpson for 2 pi int_1^2 a(rho) rho J0(2 pi rho r) e^{2 pi i rho t} d rho.
cplx radial_oracle(double r, double t, int n = 20000) {
  cplx s = 0.0;
  const double h = 1.0 / n;
  for (int i = 0; i <= n; ++i) {
    const double rho = 1.0 + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * bump_density(rho) * rho * std::cyl_bessel_j(0.0, kTwoPi * rho * r) * std::polar(1.0, kTwoPi * rho * t);
  }
  return kTwoPi * s * h / 3.0;
}

double mass_oracle() { return radial_oracle(0.0, 0.0).real(); }

CubeMeasure cubes(int R, std::vector<Cube> c) { return CubeMeasure(R, std::move(c)); }

}  // namespace

TEST(BumpDensity, Profile) {
  EXPECT_EQ(bump_density(0.9), 0.0);
  EXPECT_EQ(bump_density(1.0), 0.0);
  EXPECT_EQ(bump_density(2.0), 0.0);
  EXPECT_EQ(bump_density(1.5), 1.0);
  EXPECT_EQ(bump_density(1.1), 1.0);
  for (double r = 1.0; r < 1.1; r += 0.001) {
    EXPECT_GE(bump_density(r), 0.0);
    EXPECT_LE(bump_density(r), 1.0);
    EXPECT_LE(bump_density(r), bump_density(r + 0.001) + 1e-15);
  }
  EXPECT_NEAR(bump_density(1.15), bump_density(1.85), 0.0);
  EXPECT_NEAR(bump_density(1.05), bump_density(1.95), 1e-12);
}

TEST(ConeQuadrature, SpacingAndMass) {
  const auto q = ConeQuadrature::for_scale(40.0, 8.0);
  EXPECT_LE(q.d_rho(), 1.0 / (8.0 * 40.0) + 1e-15);
  EXPECT_LE(2.0 * q.d_phi(), 1.0 / (8.0 * 40.0) + 1e-15);
  const double m = q.mass();
  EXPECT_NEAR(m, mass_oracle(), 1e-6 * m);
  EXPECT_NEAR(m, q.refined().mass(), 1e-6 * m);
  EXPECT_THROW(ConeQuadrature::for_scale(0.0), std::invalid_argument);
  EXPECT_THROW(ConeQuadrature::for_scale(10.0, 8.0, 0.0, 7.0), std::invalid_argument);
}

TEST(SigmaCheck, OriginIsTheMass) {
  const auto q = ConeQuadrature::for_scale(30.0);
  const auto v = sigma_check({{0, 0}, 0}, q);
  EXPECT_NEAR(v.value.real(), q.mass(), 1e-12 * q.mass());
  EXPECT_NEAR(v.value.imag(), 0.0, 1e-12);
  EXPECT_FALSE(v.under_resolved);
}

TEST(SigmaCheck, MatchesRadialReduction) {
  const auto q = ConeQuadrature::for_scale(30.0);
  const double m = q.mass();
  for (SpacetimePoint x : {SpacetimePoint{{0, 0}, 10}, SpacetimePoint{{3, 4}, 2}, SpacetimePoint{{7, 7}, 9.9},
                           SpacetimePoint{{-12, 5}, -6}}) {
    const cplx quad = sigma_check(x, q, false).value;
    EXPECT_LT(std::abs(quad - radial_oracle(norm(x.xp), x.x3)), 1e-6 * m) << x.xp.x << "," << x.xp.y << "," << x.x3;
    EXPECT_LT(std::abs(sigma_check_bessel(x) - radial_oracle(norm(x.xp), x.x3)), 1e-6 * m);
  }
}

TEST(SigmaCheck, ConjugateSymmetryAndResolutionGuard) {
  const auto q = ConeQuadrature::for_scale(30.0);
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    const SpacetimePoint x{{rng.uniform(-15, 15), rng.uniform(-15, 15)}, rng.uniform(-15, 15)};
    EXPECT_LT(std::abs(sigma_check(-1.0 * x, q, false).value - std::conj(sigma_check(x, q, false).value)), 1e-10);
  }
  EXPECT_THROW(sigma_check({{0, 0}, 31}, q), std::domain_error);
}

TEST(SigmaCheck, OnConeDecayBound) {
  const auto q = ConeQuadrature::for_scale(60.0);
  const double s0 = q.mass();
  const auto v = sigma_check({{50 / kSqrt2, 0}, 50 / kSqrt2}, q);
  EXPECT_LE(std::abs(v.value), 10 * s0 * std::pow(50.0, -0.4));
  EXPECT_LT(v.rel_change, kSelfCheckTol);
}

TEST(Extension, LinearityModulationAndSectors) {
  const auto q = ConeQuadrature::for_scale(30.0);
  const auto one = SpectralFunction::constant(q, 1.0);
  const SpacetimePoint x{{4, -3}, 7}, x0{{2, 1}, -5};
  EXPECT_LT(std::abs(extension(one, x, q) - sigma_check(x, q, false).value), 1e-10);
  const auto two = SpectralFunction::constant(q, cplx(2.0, -1.0));
  EXPECT_LT(std::abs(extension(two, x, q) - cplx(2.0, -1.0) * extension(one, x, q)), 1e-10);
  EXPECT_LT(std::abs(extension(modulation(q, x0), x, q) - sigma_check(x - x0, q, false).value), 1e-10);

  SpectralFunction half{std::vector<cplx>(q.size(), 0.0)};
  ASSERT_EQ(q.n_phi % 2, 0);
  for (int j = 0; j < q.n_phi / 2; ++j)
    for (int k = 0; k < q.n_rho; ++k) half.values[q.index(j, k)] = 1.0;
  EXPECT_NEAR(std::abs(extension(half, {{0, 0}, 0}, q)), 0.5 * q.mass(), 1e-10);
  EXPECT_THROW(extension(SpectralFunction{{1.0}}, x, q), std::invalid_argument);
}

TEST(NuHat, Examples) {
  const auto nu = cubes(16, {{1, 2, 20}, {4, 4, 25}, {9, 1, 17}});
  EXPECT_NEAR(nu_hat(nu, {{0, 0}, 0}).real(), 3.0, 1e-15);
  EXPECT_LT(std::abs(nu_hat(cubes(16, {{3, 3, 20}}), {{1, 0}, 0})), 1e-15);

  const auto two = cubes(16, {{1, 2, 20}, {4, 4, 25}});
  const SpacetimePoint d = cube_center({1, 2, 20}) - cube_center({4, 4, 25});
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const SpacetimePoint w{{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)}, rng.uniform(-0.3, 0.3)};
    const double expect = (2.0 + 2.0 * std::cos(kTwoPi * dot(d, w))) * cube_factor_sq(w);
    EXPECT_NEAR(std::norm(nu_hat(two, w)), expect, 1e-9);
    EXPECT_EQ(nu_hat(nu, -1.0 * w), std::conj(nu_hat(nu, w)));
  }
}

TEST(DecayMean, SingleCubeAndGuards) {
  const auto q = ConeQuadrature::for_scale(decay_scale(16), 2.0);
  const auto dm = decay_mean(cubes(16, {{8, 8, 24}}), q);
  EXPECT_GE(dm.value, 0.0);
  EXPECT_LE(dm.value, q.mass());
  EXPECT_FALSE(dm.under_resolved);
  EXPECT_THROW(decay_mean(cubes(16, {{8, 8, 24}}), ConeQuadrature::for_scale(20.0)), std::invalid_argument);
}

TEST(DecayMean, LightlikeCrossTermDominatesSpacelike) {
  // Cross term of two cubes = decay mean of the pair minus the two single-cube means.
  const int R = 64;
  const auto q = ConeQuadrature::for_scale(decay_scale(R), 2.0);
  const Cube a{40, 20, 80};
  const auto single = [&](Cube c) { return decay_mean(cubes(R, {c}), q, false).value; };
  const auto cross = [&](Cube b) { return std::abs(decay_mean(cubes(R, {a, b}), q, false).value - single(a) - single(b)); };
  const double light = cross({40 - 23, 20, 80 + 23});  // (-e, 1) direction, length ~ R/2
  const double space = cross({40 - 32, 20, 80});       // planar, same length
  EXPECT_GE(light, 10 * space);
}

TEST(DecayMean, AgreesWithPairKernel) {
  const auto q = ConeQuadrature::for_scale(decay_scale(16), 2.0);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(seed);
    std::vector<Cube> c;
    for (int i = 0; i < 24; ++i)
      c.push_back({static_cast<int>(rng.below(16)), static_cast<int>(rng.below(16)), 16 + static_cast<int>(rng.below(16))});
    const auto nu = cubes(16, c);
    const double dm = decay_mean(nu, q, false).value;
    const auto pk = pair_kernel(nu, q);
    EXPECT_EQ(pk.pairs.size(), nu.mass() * (nu.mass() - 1) / 2);
    EXPECT_NEAR(pk.total() / dm, 1.0, 0.02);
  }
}

TEST(WeightedL2, ZeroAndSampleConvergence) {
  const auto q = ConeQuadrature::for_scale(decay_scale(16), 2.0);
  const auto nu = cubes(16, {{3, 4, 20}, {8, 8, 24}});
  EXPECT_EQ(weighted_l2(SpectralFunction::constant(q, 0.0), nu, q), 0.0);
  const auto f = modulation(q, {{8.5, 8.5}, 24.5});
  const double a = weighted_l2(f, nu, q, 4), b = weighted_l2(f, nu, q, 8);
  EXPECT_NEAR(a / b, 1.0, 0.03);
  EXPECT_THROW(weighted_l2(f, nu, q, 1), std::invalid_argument);
  EXPECT_EQ(cube_samples(nu, 3).size(), 54u);
}

TEST(Knapp, NormMatchesSectorArea) {
  const int R = 64;
  for (double gamma : {4.0, 16.0, 64.0}) {
    const Knapp k = knapp(gamma, R, 2.0);
    // The bump is radial, so the sector carries gamma^{-1/2} / (2 pi) of the full mass.
    const double expect = std::pow(gamma, -0.5) * mass_oracle() / kTwoPi;
    EXPECT_NEAR(k.f.l2_norm_sq(k.quad) / expect, 1.0, 0.05);
    EXPECT_NEAR(k.P.half_dims[kL], 0.5 * gamma, 1e-12);
  }
  EXPECT_THROW(knapp(0.5, R), std::invalid_argument);
  EXPECT_THROW(knapp(128, R), std::invalid_argument);
}

TEST(Knapp, PacketIsLargeOnThePlank) {
  const int R = 64;
  const double gamma = 16;
  const Knapp k = knapp(gamma, R, 2.0);
  const double at_center = std::abs(extension(k.f, k.P.center, k.quad));
  EXPECT_NEAR(at_center, k.quad.mass(), 1e-9 * at_center);
  const double floor = 0.1 * std::pow(gamma, -0.5);
  for (double us : {-0.25, 0.25})
    for (double um : {-0.25, 0.0, 0.25})
      for (double ul : {-0.25, 0.0, 0.25}) {
        const SpacetimePoint x = k.P.center + (us * 2 * k.P.half_dims[kS]) * k.P.basis.e_s() +
                                 (um * 2 * k.P.half_dims[kM]) * k.P.basis.e_m() +
                                 (ul * 2 * k.P.half_dims[kL]) * k.P.basis.e_l();
        EXPECT_GE(std::abs(extension(k.f, x, k.quad)), floor);
      }
}

TEST(Knapp, TubeCarriesTheSquareRootLaw) {
  const int R = 64, gamma = 64;
  const Knapp k = knapp(gamma, R, 2.0);
  const CubeMeasure tube = knapp_tube(k, R, gamma);
  EXPECT_EQ(tube.mass(), static_cast<std::size_t>(gamma));
  const double l2 = weighted_l2(k.f, tube, k.quad, 2);
  EXPECT_GE(l2, 0.01 * std::sqrt(gamma) * k.f.l2_norm_sq(k.quad));
}

TEST(OffConePoint, NormAndDistance) {
  for (double d : {0.0, 1.0, 5.0, 20.0}) {
    const SpacetimePoint x = off_cone_point(50, d);
    EXPECT_NEAR(norm(x), 50.0, 1e-12);
    EXPECT_NEAR(cone_distance(x), d, 1e-9);
  }
  EXPECT_THROW(off_cone_point(10, 8), std::invalid_argument);
  EXPECT_THROW(off_cone_point(10, -1), std::invalid_argument);
}

TEST(StationaryPhase, SmallScaleDiagnostic) {
  const auto q = ConeQuadrature::for_scale(30.0);
  StationaryPhaseSpec spec;
  spec.on_radius = {5, 10, 20, 28};
  spec.off_radius = 20;
  spec.off_distance = {0, 1, 2, 5};
  spec.axis_t = 10;
  const auto rep = stationary_phase_diagnostic(q, spec);
  EXPECT_LT(rep.on_slope, 0.0);
  EXPECT_NEAR(rep.axis_quadrature, std::abs(radial_oracle(0.0, 10.0)), 1e-6 * q.mass());
  EXPECT_NEAR(rep.axis_quadrature, rep.axis_reference, 1e-6 * q.mass());
  EXPECT_LT(rep.off_ratio_far, 1.0);
  EXPECT_LT(rep.max_rel_change, kSelfCheckTol);
  ASSERT_EQ(rep.off_value.size(), 4u);
}
