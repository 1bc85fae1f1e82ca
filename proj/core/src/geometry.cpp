#include "conelab/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace conelab {

bool in_Q(const SpacetimePoint& c, double tol) {
  const double hi = 2.0 * kAlpha0 + tol;
  return c.xp.x >= -tol && c.xp.x <= hi && c.xp.y >= -tol && c.xp.y <= hi && c.x3 >= 1.0 - kAlpha0 - tol &&
         c.x3 <= 1.0 + kAlpha0 + tol;
}

bool in_BR(const SpacetimePoint& p, double R, double tol) {
  return p.xp.x >= -tol && p.xp.x <= R + tol && p.xp.y >= -tol && p.xp.y <= R + tol && p.x3 >= R - tol &&
         p.x3 <= 2.0 * R + tol;
}

double dist_d(const SpacetimePoint& v, const SpacetimePoint& w) {
  return norm(v.xp - w.xp) + std::abs(v.x3 - w.x3);
}

double gap_delta(const SpacetimePoint& v, const SpacetimePoint& w) {
  return std::abs(norm(v.xp - w.xp) - std::abs(v.x3 - w.x3));
}

SpacetimePoint nearest_cone_point(const SpacetimePoint& x) {
  const double rho = norm(x.xp);
  if (x.x3 < 0.0) throw std::domain_error("nearest_cone_point: requires x3 >= 0");
  if (rho == 0.0) throw std::domain_error("nearest_cone_point: axis point has no unique nearest point");
  const double s = 0.5 * (rho + x.x3);
  return {(s / rho) * x.xp, s};
}

SpacetimePoint nearest_cone_point_any(const SpacetimePoint& x) {
  if (x.x3 >= 0.0) return nearest_cone_point(x);
  SpacetimePoint w = nearest_cone_point({x.xp, -x.x3});
  w.x3 = -w.x3;
  return w;
}

double cone_distance(const SpacetimePoint& x) {
  // Work in the half-plane (rho, z); each nappe is a ray from the origin.
  const double rho = norm(x.xp);
  const double z = x.x3;
  const double r = std::hypot(rho, z);
  const double up = (rho + z >= 0.0) ? std::abs(rho - z) / kSqrt2 : r;
  const double down = (rho - z >= 0.0) ? std::abs(rho + z) / kSqrt2 : r;
  return std::min(up, down);
}

LightlikeBasis LightlikeBasis::from_direction(Vec2 e) {
  const double n = norm(e);
  if (n == 0.0) throw std::invalid_argument("LightlikeBasis: zero direction");
  return {(1.0 / n) * e};
}

Mat3 basis_change_coefficients(const LightlikeBasis& E, const LightlikeBasis& Ebar) {
  Mat3 m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = dot(Ebar.axis(i), E.axis(j));
  return m;
}

Mat3 basis_change_closed_form(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double q = s / kSqrt2;
  // rows ebar_s, ebar_m, ebar_l; columns e_s, e_m, e_l
  return Mat3{{{(c + 1) / 2, -q, (c - 1) / 2}, {q, c, q}, {(c - 1) / 2, -q, (c + 1) / 2}}};
}

Lightplank Lightplank::dilated(double lambda) const {
  Lightplank p = *this;
  for (double& h : p.half_dims) h *= lambda;
  p.dilation *= lambda;
  return p;
}

std::array<SpacetimePoint, 8> Lightplank::corners(double lambda) const {
  std::array<SpacetimePoint, 8> out{};
  for (int k = 0; k < 8; ++k) {
    SpacetimePoint p = center;
    for (int a = 0; a < 3; ++a) {
      const double sign = ((k >> a) & 1) ? 1.0 : -1.0;
      p = p + (sign * lambda * half_dims[a]) * basis.axis(a);
    }
    out[k] = p;
  }
  return out;
}

bool plank_membership(const Lightplank& P, const SpacetimePoint& x, double dilation) {
  const auto c = P.basis.coords(x - P.center);
  for (int a = 0; a < 3; ++a)
    if (std::abs(c[a]) > dilation * P.half_dims[a] + kGeomTol) return false;
  return true;
}

double plank_dilation_needed(const Lightplank& P, const SpacetimePoint& x) {
  const auto c = P.basis.coords(x - P.center);
  double need = 0.0;
  for (int a = 0; a < 3; ++a) need = std::max(need, std::abs(c[a]) / P.half_dims[a]);
  return need;
}

}  // namespace conelab
