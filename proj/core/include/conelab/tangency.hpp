#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "conelab/measures.hpp"
#include "conelab/rect_duality.hpp"

namespace conelab {

/// Band index of the nearly lightlike bucket Delta <= delta^{1 - eps}.
inline constexpr int kNearlyLightlike = -1000;
/// D-band index of coincident circles (d = 0).
inline constexpr int kCoincident = -1000;

/// Pairs with d in [2^d_band, 2^{d_band + 1}) and Delta in the band named by delta_band.
struct PairClass {
  int d_band = 0;
  int delta_band = 0;
  std::int64_t count = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // ordered pairs, empty for count-only runs

  double D() const { return std::ldexp(1.0, d_band); }
  bool nearly_lightlike() const { return delta_band == kNearlyLightlike; }
};

using PairClassMap = std::map<std::pair<int, int>, PairClass>;

/// (d_band, delta_band) of one pair.
std::pair<int, int> pair_class_key(const SpacetimePoint& v, const SpacetimePoint& w, double delta, double eps);

/// Exhaustive classification of all ordered pairs i != j.
PairClassMap classify_pairs(const CircleConfig& X, double eps, bool keep_pairs = true);

/// |X cap C_{lambda delta}(Omega)| by sampled containment of Omega in each annulus.
std::int64_t nu_multiplicity(const CircleConfig& X, const DeltaTauRectangle& omega, double lambda);

inline double tau_D(double delta, double D) { return std::sqrt(delta / D); }

/// Plank of half-dims (delta, delta/tau_D, delta/tau_D^2) about the midpoint, long axis along v - w0 with w0 the
/// nearest point of the light cone at v to w. Throws std::domain_error when Delta > delta^{1/2} or d < 8 delta.
Lightplank common_plank(const SpacetimePoint& v, const SpacetimePoint& w, double delta);

struct PairCountRow {
  double D = 0.0;
  std::int64_t pairs = 0;  // |L_{D, nearly lightlike}|
  std::int64_t gamma = 0;  // gamma_tau at tau_D (upper bracket)
  double bound = 0.0;      // gamma^{1/2} (R D)^{1/2} |X|
  double ratio = 0.0;
};

struct PairCountReport {
  std::vector<PairCountRow> rows;
  double max_ratio = 0.0;
};

/// Rows for every D-band above delta^{1 - 10 eps}; R = 1/delta and tau_D is clamped to >= delta^{1/2}.
PairCountReport pair_count_bound_check(const CircleConfig& X, double eps);

struct MainGeomRow {
  std::int64_t M = 0;  // dyadic multiplicity class [M, 2M)
  std::int64_t rects = 0;
  double value = 0.0;  // M^{3/2} |R_M| tau / |X|
};

struct MainGeomReport {
  std::size_t candidates = 0;
  std::size_t kept = 0;
  std::vector<MainGeomRow> rows;
  double max_value = 0.0;
  double log_power = 0.0;  // k with max_value = log2(1/delta)^k
  double eps_power = 0.0;  // c with max_value = delta^{-c}
};

/// One candidate rectangle per circle and arc node (arc-length spacing tau), sorted lexicographically.
std::vector<DeltaTauRectangle> candidate_rectangles(const CircleConfig& X, double tau);
/// Greedy maximal A-incomparable collection, multiplicities at lambda = A, histogram by dyadic M.
MainGeomReport main_geom_check(const CircleConfig& X, double tau, double A);

}  // namespace conelab
