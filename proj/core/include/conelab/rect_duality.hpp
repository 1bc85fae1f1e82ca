#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "conelab/geometry.hpp"

namespace conelab {

/// The delta-neighbourhood of an arc of half-length tau on the core circle:
/// {a : ||a - v'| - v3| <= delta, |a - a0| <= tau}, a0 = v' + v3 * arc_center.
struct DeltaTauRectangle {
  SpacetimePoint core;
  Vec2 arc_center{1.0, 0.0};
  double delta = 0.0;
  double tau = 0.0;

  Vec2 a0() const { return core.xp + core.x3 * arc_center; }
  double arc_angle() const { return angle_of(arc_center); }
  /// Constructor for the canonical regime delta^{1/2} <= tau <= delta^{c_eps}; throws outside it.
  static DeltaTauRectangle canonical(const SpacetimePoint& core, double arc_angle, double delta, double tau,
                                     double c_eps = 0.0);
};

inline constexpr int kBoundarySamples = 64;
inline constexpr int kInteriorSamples = 16;
/// Decision constant for comparability: sound at A^C0, complete at A^{1/C0}.
inline constexpr double kComparabilityC0 = 6.0;

bool rect_contains(const DeltaTauRectangle& r, Vec2 a);
/// 64 boundary points (16 per side) followed by 16 interior points (4 x 4).
std::vector<Vec2> rect_samples(const DeltaTauRectangle& r);
/// Sampled containment of inner in outer.
bool rect_contains_rect(const DeltaTauRectangle& outer, const DeltaTauRectangle& inner);
/// Sampled containment of r in the annulus C_{width, x}.
bool rect_in_annulus(const DeltaTauRectangle& r, const SpacetimePoint& x, double width);

/// Tangency plank with half-dims (lambda delta, lambda delta/tau, lambda delta/tau^2).
/// Throws std::domain_error when tau < delta^{1/2}/2.
Lightplank tangency_plank(const DeltaTauRectangle& r, double lambda);
/// True when tau is close enough to delta^{1/2} that the tangency set splits into two planks.
bool in_two_plank_regime(const DeltaTauRectangle& r);
/// Both components near tau ~ delta^{1/2}: first contains the core circle, second is its
/// reflection through the arc (circles tangent to the arc from the other side).
std::pair<Lightplank, Lightplank> tangency_plank_pair(const DeltaTauRectangle& r, double lambda);

DeltaTauRectangle dual_rectangle(const Lightplank& P, double delta);

struct ComparabilityWitness {
  DeltaTauRectangle envelope;
  std::pair<std::int64_t, std::int64_t> members{0, 1};
};

/// A-comparability with a constructed (A^2 delta, A tau) envelope, verified by sampled
/// containment. Throws std::invalid_argument on mismatched (delta, tau) or A < 1.
std::optional<ComparabilityWitness> comparable(const DeltaTauRectangle& r1, const DeltaTauRectangle& r2, double A,
                                               std::pair<std::int64_t, std::int64_t> ids = {0, 1});

/// Smallest lambda such that both tangency planks fit in the lambda-dilation of the
/// (delta, delta/tau, delta/tau^2) plank centred at the midpoint of the cores.
double plank_cocontainment_dilation(const DeltaTauRectangle& r1, const DeltaTauRectangle& r2);

/// Lexicographic key (core x, core y, core r, arc angle).
bool rect_lex_less(const DeltaTauRectangle& a, const DeltaTauRectangle& b);

/// Greedy scan in input order: keep a rectangle unless it is comparable to a kept one.
/// Returns indices into the input.
std::vector<std::size_t> greedy_maximal_incomparable_indices(const std::vector<DeltaTauRectangle>& rects, double A);
std::vector<DeltaTauRectangle> greedy_maximal_incomparable(const std::vector<DeltaTauRectangle>& rects, double A);

std::size_t packing_count(const DeltaTauRectangle& envelope, const std::vector<DeltaTauRectangle>& rects);

/// Angle between tangents at an intersection point; throws std::domain_error when
/// the circles do not cross.
double intersect_angle(const SpacetimePoint& c1, const SpacetimePoint& c2);

struct AreaEstimate {
  double area = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo |C_{delta,v} cap C_{delta,w}|, sampling uniformly from C_{delta,v}.
AreaEstimate annuli_intersection_area(const SpacetimePoint& v, const SpacetimePoint& w, double delta,
                                      std::int64_t samples = 1000000, std::uint64_t seed = 0);

/// Right-hand side delta^2 / sqrt((d + delta)(Delta + delta)) of the overlap bound.
double annuli_overlap_bound(const SpacetimePoint& v, const SpacetimePoint& w, double delta);

}  // namespace conelab
