#include "conelab/rect_duality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace conelab {

namespace {

// Largest angular offset psi with |a - a0| <= tau at radial offset s; negative when none.
double psi_max(double R, double s, double tau) {
  const double rs = R + s;
  if (rs <= 0.0) return -1.0;
  const double c = (rs * rs + R * R - tau * tau) / (2.0 * R * rs);
  if (c > 1.0) return -1.0;
  if (c <= -1.0) return kPi;
  return std::acos(c);
}

Vec2 polar_point(const DeltaTauRectangle& r, double s, double psi) {
  const double phi = r.arc_angle() + psi;
  return r.core.xp + (r.core.x3 + s) * unit_from_angle(phi);
}

bool same_params(const DeltaTauRectangle& a, const DeltaTauRectangle& b) {
  const auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y)); };
  return close(a.delta, b.delta) && close(a.tau, b.tau);
}

Vec2 normalized(Vec2 v, Vec2 fallback) {
  const double n = norm(v);
  return n > 0.0 ? (1.0 / n) * v : fallback;
}

}  // namespace

DeltaTauRectangle DeltaTauRectangle::canonical(const SpacetimePoint& core, double arc_angle, double delta, double tau,
                                               double c_eps) {
  if (!(delta > 0.0) || tau < std::sqrt(delta) * (1.0 - 1e-12) || tau > std::pow(delta, c_eps) * (1.0 + 1e-12))
    throw std::invalid_argument("DeltaTauRectangle: tau outside the canonical regime");
  return {core, unit_from_angle(arc_angle), delta, tau};
}

bool rect_contains(const DeltaTauRectangle& r, Vec2 a) {
  return std::abs(norm(a - r.core.xp) - r.core.x3) <= r.delta + kGeomTol && norm(a - r.a0()) <= r.tau + kGeomTol;
}

std::vector<Vec2> rect_samples(const DeltaTauRectangle& r) {
  std::vector<Vec2> out;
  out.reserve(kBoundarySamples + kInteriorSamples);
  const double R = r.core.x3;
  const double smax = std::min(r.delta, r.tau);
  constexpr int side = kBoundarySamples / 4;
  for (double s : {smax, -smax}) {
    const double pm = std::max(0.0, psi_max(R, s, r.tau));
    for (int i = 0; i < side; ++i) out.push_back(polar_point(r, s, pm * (-1.0 + 2.0 * i / (side - 1))));
  }
  for (double sign : {1.0, -1.0}) {
    for (int i = 0; i < side; ++i) {
      const double s = smax * (-1.0 + 2.0 * i / (side - 1));
      out.push_back(polar_point(r, s, sign * std::max(0.0, psi_max(R, s, r.tau))));
    }
  }
  constexpr double frac[4] = {-0.75, -0.25, 0.25, 0.75};
  for (double fs : frac) {
    const double s = fs * smax;
    const double pm = std::max(0.0, psi_max(R, s, r.tau));
    for (double fp : frac) out.push_back(polar_point(r, s, fp * pm));
  }
  return out;
}

bool rect_contains_rect(const DeltaTauRectangle& outer, const DeltaTauRectangle& inner) {
  for (Vec2 p : rect_samples(inner))
    if (!rect_contains(outer, p)) return false;
  return true;
}

bool rect_in_annulus(const DeltaTauRectangle& r, const SpacetimePoint& x, double width) {
  // The arc midpoint is a cheap first rejection.
  if (std::abs(norm(r.a0() - x.xp) - x.x3) > width + kGeomTol) return false;
  for (Vec2 p : rect_samples(r))
    if (std::abs(norm(p - x.xp) - x.x3) > width + kGeomTol) return false;
  return true;
}

Lightplank tangency_plank(const DeltaTauRectangle& r, double lambda) {
  if (r.tau < 0.5 * std::sqrt(r.delta)) throw std::domain_error("tangency_plank: sub-resolution arc (tau < delta^1/2 / 2)");
  const double hs = lambda * r.delta;
  return Lightplank{r.core, LightlikeBasis::from_direction(r.arc_center), {hs, hs / r.tau, hs / (r.tau * r.tau)}, lambda};
}

bool in_two_plank_regime(const DeltaTauRectangle& r) { return r.tau < 2.0 * std::sqrt(r.delta); }

std::pair<Lightplank, Lightplank> tangency_plank_pair(const DeltaTauRectangle& r, double lambda) {
  const double hs = lambda * r.delta;
  const double hm = lambda * std::sqrt(r.delta);
  const std::array<double, 3> dims{hs, hm, 1.0};
  Lightplank own{r.core, LightlikeBasis::from_direction(r.arc_center), dims, lambda};
  // Circles (a0 + t e, t) are tangent to the arc from outside; their lightray is (e, 1).
  const SpacetimePoint mirror{r.a0() + r.core.x3 * r.arc_center, r.core.x3};
  Lightplank other{mirror, LightlikeBasis::from_direction(-1.0 * r.arc_center), dims, lambda};
  return {own, other};
}

DeltaTauRectangle dual_rectangle(const Lightplank& P, double delta) {
  // The long-axis lightray through the centre meets x3 = 0 at center' + center3 * e_planar.
  return DeltaTauRectangle{P.center, P.basis.e_planar, delta, P.half_dims[kS] / P.half_dims[kM]};
}

std::optional<ComparabilityWitness> comparable(const DeltaTauRectangle& r1, const DeltaTauRectangle& r2, double A,
                                               std::pair<std::int64_t, std::int64_t> ids) {
  if (!same_params(r1, r2)) throw std::invalid_argument("comparable: rectangles must share delta and tau");
  if (A < 1.0) throw std::invalid_argument("comparable: A must be >= 1");
  const Vec2 a1 = r1.a0();
  const Vec2 a2 = r2.a0();
  // Both arc midpoints lie in the envelope, whose diameter is at most 2 A tau.
  if (norm(a1 - a2) > 2.0 * A * r1.tau + kGeomTol) return std::nullopt;
  const Vec2 mid = 0.5 * (a1 + a2);
  const SpacetimePoint cores[3] = {0.5 * (r1.core + r2.core), r1.core, r2.core};
  for (const SpacetimePoint& c : cores) {
    DeltaTauRectangle env{c, normalized(mid - c.xp, r1.arc_center), A * A * r1.delta, A * r1.tau};
    if (rect_contains_rect(env, r1) && rect_contains_rect(env, r2)) return ComparabilityWitness{env, ids};
  }
  return std::nullopt;
}

double plank_cocontainment_dilation(const DeltaTauRectangle& r1, const DeltaTauRectangle& r2) {
  const double d = r1.delta;
  const double t = r1.tau;
  const Vec2 e = normalized(r1.arc_center + r2.arc_center, r1.arc_center);
  const Lightplank base{0.5 * (r1.core + r2.core), LightlikeBasis{e}, {d, d / t, d / (t * t)}, 1.0};
  double need = 0.0;
  for (const auto* r : {&r1, &r2})
    for (const SpacetimePoint& p : tangency_plank(*r, 1.0).corners()) need = std::max(need, plank_dilation_needed(base, p));
  return need;
}

bool rect_lex_less(const DeltaTauRectangle& a, const DeltaTauRectangle& b) {
  return std::make_tuple(a.core.xp.x, a.core.xp.y, a.core.x3, a.arc_angle()) <
         std::make_tuple(b.core.xp.x, b.core.xp.y, b.core.x3, b.arc_angle());
}

std::vector<std::size_t> greedy_maximal_incomparable_indices(const std::vector<DeltaTauRectangle>& rects, double A) {
  std::vector<std::size_t> kept;
  if (rects.empty()) return kept;
  // Bucket kept rectangles by arc midpoint; comparable pairs have midpoints within 2 A tau.
  const double cell = 2.0 * A * rects.front().tau + 1e-12;
  const auto key = [cell](Vec2 p, int dx, int dy) {
    const auto ix = static_cast<std::int64_t>(std::floor(p.x / cell)) + dx;
    const auto iy = static_cast<std::int64_t>(std::floor(p.y / cell)) + dy;
    return (ix << 32) ^ (iy & 0xffffffff);
  };
  std::unordered_map<std::int64_t, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < rects.size(); ++i) {
    const Vec2 a = rects[i].a0();
    bool hit = false;
    for (int dx = -1; dx <= 1 && !hit; ++dx)
      for (int dy = -1; dy <= 1 && !hit; ++dy) {
        const auto it = buckets.find(key(a, dx, dy));
        if (it == buckets.end()) continue;
        for (std::size_t j : it->second)
          if (comparable(rects[i], rects[j], A)) {
            hit = true;
            break;
          }
      }
    if (!hit) {
      kept.push_back(i);
      buckets[key(a, 0, 0)].push_back(i);
    }
  }
  return kept;
}

std::vector<DeltaTauRectangle> greedy_maximal_incomparable(const std::vector<DeltaTauRectangle>& rects, double A) {
  std::vector<DeltaTauRectangle> out;
  for (std::size_t i : greedy_maximal_incomparable_indices(rects, A)) out.push_back(rects[i]);
  return out;
}

std::size_t packing_count(const DeltaTauRectangle& envelope, const std::vector<DeltaTauRectangle>& rects) {
  return static_cast<std::size_t>(
      std::count_if(rects.begin(), rects.end(), [&](const DeltaTauRectangle& r) { return rect_contains_rect(envelope, r); }));
}

double intersect_angle(const SpacetimePoint& c1, const SpacetimePoint& c2) {
  const double b = norm(c1.xp - c2.xp);
  const double r = c1.x3;
  const double s = c2.x3;
  if (!(std::abs(r - s) < b && b < r + s)) throw std::domain_error("intersect_angle: circles do not intersect");
  // b^2 = (r-s)^2 + 4 r s sin^2(phi/2), the law of cosines in a cancellation-free form.
  const double h = (b - std::abs(r - s)) * (b + std::abs(r - s)) / (4.0 * r * s);
  return 2.0 * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
}

AreaEstimate annuli_intersection_area(const SpacetimePoint& v, const SpacetimePoint& w, double delta,
                                      std::int64_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("annuli_intersection_area: need samples");
  const double lo = std::max(0.0, v.x3 - delta);
  const double hi = v.x3 + delta;
  const double annulus = kPi * (hi * hi - lo * lo);
  constexpr std::int64_t kChunk = 1 << 16;
  const auto chunks = static_cast<std::size_t>((samples + kChunk - 1) / kChunk);
  std::vector<double> hits(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      Rng rng(seed, c);
      const std::int64_t n = std::min<std::int64_t>(kChunk, samples - static_cast<std::int64_t>(c) * kChunk);
      std::int64_t h = 0;
      for (std::int64_t k = 0; k < n; ++k) {
        const double rho = std::sqrt(lo * lo + rng.uniform() * (hi * hi - lo * lo));
        const double phi = kTwoPi * rng.uniform();
        const Vec2 p = v.xp + rho * unit_from_angle(phi);
        if (std::abs(norm(p - w.xp) - w.x3) <= delta) ++h;
      }
      hits[c] = static_cast<double>(h);
    }
  });
  const double f = pairwise_sum(hits) / static_cast<double>(samples);
  return {annulus * f, annulus * std::sqrt(f * (1.0 - f) / static_cast<double>(samples))};
}

double annuli_overlap_bound(const SpacetimePoint& v, const SpacetimePoint& w, double delta) {
  return delta * delta / std::sqrt((dist_d(v, w) + delta) * (gap_delta(v, w) + delta));
}

}  // namespace conelab
