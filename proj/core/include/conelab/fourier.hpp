#pragma once

#include <cstdint>
#include <vector>

#include "conelab/measures.hpp"

namespace conelab {

/// Radial density of sigma: 1 on [1.1, 1.9], exp(1 - 1/(1 - t^2)) across each transition band, 0 outside (1, 2).
double bump_density(double rho);

/// Tensor midpoint rule on {1 < |xi| < 2} in polar coordinates (rho, phi), restricted to the
/// angular window [phi0, phi1). Node spacing is at most 1/(q Lambda) radially and in arc length.
struct ConeQuadrature {
  double lambda = 1.0;
  double q = 8.0;
  int n_rho = 0;
  int n_phi = 0;
  double phi0 = 0.0;
  double phi1 = kTwoPi;

  static ConeQuadrature for_scale(double lambda, double q = 8.0, double phi0 = 0.0, double phi1 = kTwoPi);
  /// Same window with twice the node density in each direction.
  ConeQuadrature refined() const;

  double d_rho() const { return 1.0 / n_rho; }
  double d_phi() const { return (phi1 - phi0) / n_phi; }
  double rho(int k) const { return 1.0 + (k + 0.5) * d_rho(); }
  double phi(int j) const { return phi0 + (j + 0.5) * d_phi(); }
  /// Area element rho d_rho d_phi (the density is applied separately).
  double weight(int k) const { return rho(k) * d_rho() * d_phi(); }
  std::size_t size() const { return static_cast<std::size_t>(n_rho) * n_phi; }
  std::size_t index(int j, int k) const { return static_cast<std::size_t>(j) * n_rho + k; }
  /// sum of weight * a over all nodes.
  double mass() const;
};

/// Values on the nodes of a quadrature, indexed by ConeQuadrature::index.
struct SpectralFunction {
  std::vector<cplx> values;

  static SpectralFunction constant(const ConeQuadrature& quad, cplx c);
  /// sum weight * a * |f|^2.
  double l2_norm_sq(const ConeQuadrature& quad) const;
};

/// Relative change that flags under-resolution in the density-doubling self-check.
inline constexpr double kSelfCheckTol = 0.01;

struct ResolvedValue {
  cplx value;
  cplx refined;
  double rel_change = 0.0;
  bool under_resolved = false;
};

/// sigma-check(x) = sum weight a e^{2 pi i (x'.xi + x3 |xi|)}; throws std::domain_error if |x| > Lambda.
/// With check = true the value is recomputed at doubled density.
ResolvedValue sigma_check(const SpacetimePoint& x, const ConeQuadrature& quad, bool check = true);
std::vector<ResolvedValue> sigma_check_many(const std::vector<SpacetimePoint>& xs, const ConeQuadrature& quad,
                                            bool check = true);
/// Independent radial reduction 2 pi int a(rho) rho e^{2 pi i rho x3} J0(2 pi rho |x'|) d rho (full window only).
cplx sigma_check_bessel(const SpacetimePoint& x, int n = 100000);

cplx extension(const SpectralFunction& f, const SpacetimePoint& x, const ConeQuadrature& quad);
std::vector<cplx> extension_many(const SpectralFunction& f, const std::vector<SpacetimePoint>& xs,
                                 const ConeQuadrature& quad);

/// Exact transform of the cube measure: sum_c e^{-2 pi i c.omega} prod_j sinc(pi omega_j).
cplx nu_hat(const CubeMeasure& nu, const SpacetimePoint& omega);
/// prod_j sinc(pi omega_j)^2, the unit-cube factor of |nu_hat|^2.
double cube_factor_sq(const SpacetimePoint& omega);

/// Lambda required by decay_mean at scale R.
inline double decay_scale(double R) { return 3.0 * kSqrt2 * R; }

struct DecayMean {
  double value = 0.0;
  double refined = 0.0;
  double rel_change = 0.0;
  bool under_resolved = false;
};

/// sum weight a |nu_hat(xi, |xi|)|^2; throws std::invalid_argument if quad.lambda < 3 sqrt2 R.
DecayMean decay_mean(const CubeMeasure& nu, const ConeQuadrature& quad, bool check = true);

/// Per-pair kernel K(c_i - c_j) = sum weight a S(omega) e^{-2 pi i (c_i - c_j).omega}.
struct PairKernel {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // i < j
  std::vector<double> value;                                    // 2 Re K for each pair
  double diagonal = 0.0;                                        // mass * K(0)
  double total() const;
};
/// The quadratic-form route to the decay mean, on its own quadrature.
PairKernel pair_kernel(const CubeMeasure& nu, const ConeQuadrature& quad);

/// Sum over cubes of the average of |Ef|^2 at m^3 midpoint samples.
double weighted_l2(const SpectralFunction& f, const CubeMeasure& nu, const ConeQuadrature& quad, int m = 4);
/// The m^3 midpoint samples of every cube, cube-major.
std::vector<SpacetimePoint> cube_samples(const CubeMeasure& nu, int m);

/// e^{-2 pi i (x0'.xi + x0_3 |xi|)}, which translates Ef by x0.
SpectralFunction modulation(const ConeQuadrature& quad, const SpacetimePoint& x0);

inline SpacetimePoint knapp_center(double R) { return {{0.5 * R, 0.5 * R}, 1.5 * R}; }

struct Knapp {
  ConeQuadrature quad;  // the sector window [0, gamma^{-1/2}]
  SpectralFunction f;   // modulated indicator, centred on P
  Lightplank P;         // 1 x gamma^{1/2} x gamma, centred in B_R
  Vec2 e_planar;        // sector axis
};
/// Throws std::invalid_argument unless 1 <= gamma <= R.
Knapp knapp(double gamma, double R, double q = 8.0);
/// The gamma-cube light tube inside the Knapp plank.
CubeMeasure knapp_tube(const Knapp& k, int R, int gamma);

struct StationaryPhaseReport {
  std::vector<double> on_radius;   // |x| along the cone
  std::vector<double> on_value;    // |sigma-check|
  std::vector<double> on_rel_change;
  double on_slope = 0.0;
  std::vector<double> off_distance;
  std::vector<double> off_value;
  std::vector<double> off_rel_change;
  double off_ratio_far = 0.0;      // value at the largest distance / value at distance 0
  double axis_t = 0.0;
  double axis_quadrature = 0.0;
  double axis_reference = 0.0;
  double axis_rel_change = 0.0;
  double max_rel_change = 0.0;     // worst self-check change over all samples
};

struct StationaryPhaseSpec {
  std::vector<double> on_radius{10, 20, 50, 100, 200};
  double off_radius = 50;
  std::vector<double> off_distance{0, 1, 2, 5, 10, 20};
  double axis_t = 10;
};

StationaryPhaseReport stationary_phase_diagnostic(const ConeQuadrature& quad, const StationaryPhaseSpec& spec = {});
/// Point with |x| = r at cone distance d, moved from the upper nappe towards the positive axis.
SpacetimePoint off_cone_point(double r, double d);

}  // namespace conelab
