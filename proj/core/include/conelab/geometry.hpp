#pragma once

#include <array>
#include <cmath>

#include "conelab/numeric.hpp"

namespace conelab {

inline constexpr double kAlpha0 = 0.01;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
/// 90 degree counterclockwise rotation.
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline Vec2 unit_from_angle(double t) { return {std::cos(t), std::sin(t)}; }
inline double angle_of(Vec2 a) { return std::atan2(a.y, a.x); }

/// A point (x', x3) of R^2 x R. Read as a circle, x' is the center and x3 the radius.
struct SpacetimePoint {
  Vec2 xp;
  double x3 = 0.0;

  friend SpacetimePoint operator+(const SpacetimePoint& a, const SpacetimePoint& b) {
    return {a.xp + b.xp, a.x3 + b.x3};
  }
  friend SpacetimePoint operator-(const SpacetimePoint& a, const SpacetimePoint& b) {
    return {a.xp - b.xp, a.x3 - b.x3};
  }
  friend SpacetimePoint operator*(double s, const SpacetimePoint& a) { return {s * a.xp, s * a.x3}; }
  friend bool operator==(const SpacetimePoint&, const SpacetimePoint&) = default;
};

inline double dot(const SpacetimePoint& a, const SpacetimePoint& b) { return dot(a.xp, b.xp) + a.x3 * b.x3; }
inline double norm(const SpacetimePoint& a) { return std::sqrt(dot(a, a)); }

bool in_Q(const SpacetimePoint& c, double tol = kGeomTol);
bool in_BR(const SpacetimePoint& p, double R, double tol = kGeomTol);

/// Circle distance |a1-a2| + |r1-r2|.
double dist_d(const SpacetimePoint& v, const SpacetimePoint& w);
/// Tangency defect ||a1-a2| - |r1-r2||; zero exactly when v-w is lightlike.
double gap_delta(const SpacetimePoint& v, const SpacetimePoint& w);

/// Nearest point of the upper nappe to x. Requires x3 >= 0 and |x'| > 0;
/// throws std::domain_error on the axis, where the nearest point is not unique.
SpacetimePoint nearest_cone_point(const SpacetimePoint& x);
/// Nearest point of the full cone |x'| = |x3|, reflecting through x3 = 0 when x3 < 0.
SpacetimePoint nearest_cone_point_any(const SpacetimePoint& x);
/// Euclidean distance to the full cone, minimum over both nappes.
double cone_distance(const SpacetimePoint& x);

enum Axis : int { kS = 0, kM = 1, kL = 2 };

/// Orthonormal frame {e_s, e_m, e_l} attached to a planar unit vector e:
/// e_l = (-e, 1)/sqrt2, e_s = (-e, -1)/sqrt2, e_m = (e rotated +90deg, 0).
struct LightlikeBasis {
  Vec2 e_planar{1.0, 0.0};

  static LightlikeBasis from_direction(Vec2 e);
  static LightlikeBasis from_angle(double t) { return {unit_from_angle(t)}; }

  SpacetimePoint e_s() const { return {(-1.0 / kSqrt2) * e_planar, -1.0 / kSqrt2}; }
  SpacetimePoint e_m() const { return {perp(e_planar), 0.0}; }
  SpacetimePoint e_l() const { return {(-1.0 / kSqrt2) * e_planar, 1.0 / kSqrt2}; }
  SpacetimePoint axis(int a) const { return a == kS ? e_s() : (a == kM ? e_m() : e_l()); }
  /// Coordinates (s, m, l) of a displacement.
  std::array<double, 3> coords(const SpacetimePoint& u) const { return {dot(u, e_s()), dot(u, e_m()), dot(u, e_l())}; }
};

using Mat3 = std::array<std::array<double, 3>, 3>;

/// M[i][j] = <Ebar_i, E_j>, both indices ordered (s, m, l).
Mat3 basis_change_coefficients(const LightlikeBasis& E, const LightlikeBasis& Ebar);
/// Closed form in terms of the signed angle theta from e_m to ebar_m.
Mat3 basis_change_closed_form(double theta);

struct Lightplank {
  SpacetimePoint center;
  LightlikeBasis basis;
  std::array<double, 3> half_dims{1.0, 1.0, 1.0};  // (h_s, h_m, h_l)
  double dilation = 1.0;                            // recorded scale relative to the canonical plank

  Lightplank dilated(double lambda) const;
  /// The 8 vertices at the given dilation.
  std::array<SpacetimePoint, 8> corners(double lambda = 1.0) const;
};

/// Box test |<x - center, e_axis>| <= dilation * h_axis on all three axes (boundary inclusive).
bool plank_membership(const Lightplank& P, const SpacetimePoint& x, double dilation);
/// Smallest dilation at which x is a member.
double plank_dilation_needed(const Lightplank& P, const SpacetimePoint& x);

}  // namespace conelab
