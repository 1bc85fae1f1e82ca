#include "conelab/tangency.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace conelab {

std::pair<int, int> pair_class_key(const SpacetimePoint& v, const SpacetimePoint& w, double delta, double eps) {
  const double d = dist_d(v, w);
  const double g = gap_delta(v, w);
  const int db = d > 0.0 ? static_cast<int>(std::floor(std::log2(d))) : kCoincident;
  const int gb = g <= std::pow(delta, 1.0 - eps) ? kNearlyLightlike : static_cast<int>(std::floor(std::log2(g)));
  return {db, gb};
}

PairClassMap classify_pairs(const CircleConfig& X, double eps, bool keep_pairs) {
  const auto& c = X.circles;
  const std::size_t n = c.size();
  // Each worker classifies a range of first indices; maps are merged in range order.
  const std::size_t nw = std::max<std::size_t>(1, std::min<std::size_t>(workers(), n));
  std::vector<PairClassMap> parts(nw);
  parallel_for(nw, [&](std::size_t b, std::size_t e) {
    for (std::size_t w = b; w < e; ++w) {
      auto& m = parts[w];
      for (std::size_t i = w * n / nw; i < (w + 1) * n / nw; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          // Both orders use (min, max) so symmetric pairs land identically.
          const auto key = i < j ? pair_class_key(c[i], c[j], X.delta, eps) : pair_class_key(c[j], c[i], X.delta, eps);
          auto& cls = m[key];
          cls.d_band = key.first;
          cls.delta_band = key.second;
          ++cls.count;
          if (keep_pairs) cls.pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        }
    }
  });
  PairClassMap out;
  for (auto& m : parts)
    for (auto& [key, cls] : m) {
      auto& dst = out[key];
      dst.d_band = cls.d_band;
      dst.delta_band = cls.delta_band;
      dst.count += cls.count;
      dst.pairs.insert(dst.pairs.end(), cls.pairs.begin(), cls.pairs.end());
    }
  return out;
}

std::int64_t nu_multiplicity(const CircleConfig& X, const DeltaTauRectangle& omega, double lambda) {
  if (lambda < 1.0) throw std::invalid_argument("nu_multiplicity: need lambda >= 1");
  std::int64_t n = 0;
  for (const auto& x : X.circles) n += rect_in_annulus(omega, x, lambda * omega.delta) ? 1 : 0;
  return n;
}

Lightplank common_plank(const SpacetimePoint& v, const SpacetimePoint& w, double delta) {
  const double D = dist_d(v, w);
  const double gap = gap_delta(v, w);
  if (gap > std::sqrt(delta) || D < 8.0 * delta) throw std::domain_error("common_plank: pair is not nearly lightlike");
  const SpacetimePoint z = w - v;
  Vec2 e{1.0, 0.0};
  if (norm(z.xp) > 0.0) {
    const SpacetimePoint l = nearest_cone_point_any(z);
    const double len = norm(l);
    // e_l = (-e, 1)/sqrt2 is the unit lightray with positive time component.
    if (len > 0.0) e = (l.x3 > 0.0 ? -kSqrt2 / len : kSqrt2 / len) * l.xp;
    e = (1.0 / norm(e)) * e;
  }
  const double t = tau_D(delta, D);
  return Lightplank{0.5 * (v + w), LightlikeBasis::from_direction(e), {delta, delta / t, delta / (t * t)}, 1.0};
}

PairCountReport pair_count_bound_check(const CircleConfig& X, double eps) {
  PairCountReport rep;
  if (X.circles.size() < 2) return rep;
  const double delta = X.delta;
  const auto classes = classify_pairs(X, eps, false);
  const double dmin = std::pow(delta, 1.0 - 10.0 * eps);
  std::map<int, std::int64_t> lightlike;
  for (const auto& [key, cls] : classes)
    if (cls.nearly_lightlike() && cls.d_band != kCoincident) lightlike[cls.d_band] += cls.count;
  const double n = static_cast<double>(X.circles.size());
  for (int b = static_cast<int>(std::floor(std::log2(dmin))); b <= 1; ++b) {
    const double D = std::ldexp(1.0, b);
    PairCountRow row;
    row.D = D;
    const auto it = lightlike.find(b);
    row.pairs = it == lightlike.end() ? 0 : it->second;
    row.gamma = gamma_tau(X, std::max(std::sqrt(delta), tau_D(delta, D)));
    row.bound = std::sqrt(static_cast<double>(row.gamma)) * std::sqrt(D / delta) * n;
    row.ratio = row.bound > 0.0 ? static_cast<double>(row.pairs) / row.bound : 0.0;
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    rep.rows.push_back(row);
  }
  return rep;
}

std::vector<DeltaTauRectangle> candidate_rectangles(const CircleConfig& X, double tau) {
  std::vector<DeltaTauRectangle> out;
  for (const auto& x : X.circles) {
    const int nodes = std::max(1, static_cast<int>(std::ceil(kTwoPi * x.x3 / tau)));
    for (int k = 0; k < nodes; ++k)
      out.push_back({x, unit_from_angle(-kPi + (k + 0.5) * kTwoPi / nodes), X.delta, tau});
  }
  std::stable_sort(out.begin(), out.end(), rect_lex_less);
  return out;
}

MainGeomReport main_geom_check(const CircleConfig& X, double tau, double A) {
  MainGeomReport rep;
  if (X.circles.empty()) return rep;
  const auto cand = candidate_rectangles(X, tau);
  rep.candidates = cand.size();
  const auto kept = greedy_maximal_incomparable_indices(cand, A);
  rep.kept = kept.size();
  std::vector<std::int64_t> nu(kept.size());
  parallel_for(kept.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) nu[i] = nu_multiplicity(X, cand[kept[i]], A);
  });
  std::map<int, std::int64_t> hist;
  for (auto m : nu)
    if (m > 0) ++hist[static_cast<int>(std::floor(std::log2(static_cast<double>(m))))];
  const double n = static_cast<double>(X.circles.size());
  for (const auto& [b, count] : hist) {
    MainGeomRow row;
    row.M = std::int64_t{1} << b;
    row.rects = count;
    row.value = std::pow(static_cast<double>(row.M), 1.5) * static_cast<double>(count) * tau / n;
    rep.max_value = std::max(rep.max_value, row.value);
    rep.rows.push_back(row);
  }
  const double L = std::log2(1.0 / X.delta);
  if (rep.max_value > 0.0) {
    rep.log_power = std::log(rep.max_value) / std::log(L);
    rep.eps_power = std::log(rep.max_value) / std::log(1.0 / X.delta);
  }
  return rep;
}

}  // namespace conelab
