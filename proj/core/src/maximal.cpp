#include "conelab/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <utility>

namespace conelab {

PlaneGrid PlaneGrid::covering(double h, double lo, double hi) {
  if (!(h > 0.0) || !(hi > lo)) throw std::invalid_argument("PlaneGrid: bad spacing or extents");
  PlaneGrid g;
  g.origin = {lo, lo};
  g.h = h;
  g.nx = g.ny = static_cast<int>(std::ceil((hi - lo) / h - 1e-9));
  g.values.assign(static_cast<std::size_t>(g.nx) * g.ny, 0.0);
  return g;
}

void for_each_annulus_cell(const PlaneGrid& g, Vec2 a, double r, double w, const std::function<void(std::size_t)>& fn) {
  const double ro = r + w;
  const double xmax = g.origin.x + g.nx * g.h;
  const double ymax = g.origin.y + g.ny * g.h;
  if (a.x - ro < g.origin.x || a.x + ro > xmax || a.y - ro < g.origin.y || a.y + ro > ymax)
    throw std::out_of_range("annulus leaves the grid extents");
  const double ri = r - w;
  const int j0 = std::max(0, static_cast<int>(std::floor((a.y - ro - g.origin.y) / g.h - 0.5)) - 1);
  const int j1 = std::min(g.ny - 1, static_cast<int>(std::ceil((a.y + ro - g.origin.y) / g.h - 0.5)) + 1);
  const auto range = [&](double x_lo, double x_hi) {
    return std::pair<int, int>{std::max(0, static_cast<int>(std::floor((x_lo - g.origin.x) / g.h - 0.5)) - 1),
                               std::min(g.nx - 1, static_cast<int>(std::ceil((x_hi - g.origin.x) / g.h - 0.5)) + 1)};
  };
  const auto scan = [&](int j, std::pair<int, int> rg) {
    for (int i = rg.first; i <= rg.second; ++i) {
      const Vec2 p = g.cell_center(i, j);
      if (std::abs(norm(p - a) - r) <= w) fn(static_cast<std::size_t>(j) * g.nx + i);
    }
  };
  for (int j = j0; j <= j1; ++j) {
    const double dy = g.origin.y + (j + 0.5) * g.h - a.y;
    const double o2 = ro * ro - dy * dy;
    if (o2 < 0.0) continue;
    const double xo = std::sqrt(o2);
    const double i2 = ri > 0.0 ? ri * ri - dy * dy : -1.0;
    if (i2 > 0.0) {
      // Ranges are padded by a cell; merge them when the padding makes them touch.
      const double xi = std::sqrt(i2);
      const auto left = range(a.x - xo, a.x - xi);
      const auto right = range(a.x + xi, a.x + xo);
      if (right.first <= left.second + 1) {
        scan(j, {left.first, right.second});
      } else {
        scan(j, left);
        scan(j, right);
      }
    } else {
      scan(j, range(a.x - xo, a.x + xo));
    }
  }
}

std::size_t annulus_cell_count(const PlaneGrid& g, Vec2 a, double r, double w) {
  std::size_t n = 0;
  for_each_annulus_cell(g, a, r, w, [&](std::size_t) { ++n; });
  return n;
}

double annulus_average(const PlaneGrid& f, Vec2 a, double r, double delta) {
  if (f.h > 0.5 * delta * (1.0 + 1e-12)) throw std::invalid_argument("annulus_average: grid spacing exceeds delta/2");
  double sum = 0.0;
  std::size_t n = 0;
  for_each_annulus_cell(f, a, r, delta, [&](std::size_t k) {
    sum += std::abs(f.values[k]);
    ++n;
  });
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

MaximalResult maximal_function(const PlaneGrid& f, double delta) {
  MaximalResult out;
  const int nr = static_cast<int>(std::floor(2.0 * kAlpha0 / delta + 1e-9)) + 1;
  const int nc = static_cast<int>(std::floor(2.0 * kAlpha0 / (0.5 * delta) + 1e-9)) + 1;
  out.radii.resize(nr);
  out.value.assign(nr, 0.0);
  out.value_doubled.assign(nr, 0.0);
  for (int k = 0; k < nr; ++k) out.radii[k] = 1.0 - kAlpha0 + k * delta;
  parallel_for(static_cast<std::size_t>(nr), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      for (int ci = 0; ci < nc; ++ci)
        for (int cj = 0; cj < nc; ++cj) {
          const Vec2 a{ci * 0.5 * delta, cj * 0.5 * delta};
          out.value[k] = std::max(out.value[k], annulus_average(f, a, out.radii[k], delta));
          out.value_doubled[k] = std::max(out.value_doubled[k], annulus_average(f, a, out.radii[k], 2.0 * delta));
        }
    }
  });
  return out;
}

PlaneGrid multiplicity_field(const CircleConfig& X, double lambda, double h) {
  if (h <= 0.0) h = 0.25 * X.delta;
  PlaneGrid g = PlaneGrid::covering(h);
  for (const auto& c : X.circles)
    for_each_annulus_cell(g, c.xp, c.x3, lambda * X.delta, [&](std::size_t k) { g.values[k] += 1.0; });
  return g;
}

double lp_norm(const PlaneGrid& g, double p) {
  if (p < 1.0) throw std::invalid_argument("lp_norm: need p >= 1");
  std::vector<double> t(g.values.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = std::pow(std::abs(g.values[k]), p);
  return std::pow(pairwise_sum(t) * g.cell_area(), 1.0 / p);
}

double lp_norm_1d(const std::vector<double>& v, double dx, double p) {
  std::vector<double> t(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) t[k] = std::pow(std::abs(v[k]), p);
  return std::pow(pairwise_sum(t) * dx, 1.0 / p);
}

PlaneGrid family_field(const WeightedFamily& fam, double delta, double h) {
  PlaneGrid g = PlaneGrid::covering(h);
  for (std::size_t k = 0; k < fam.radii.size(); ++k) {
    const double w = fam.weights[k];
    for_each_annulus_cell(g, fam.centers[k], fam.radii[k], delta, [&](std::size_t c) { g.values[c] += w; });
  }
  return g;
}

WolffReport wolff_example_check(const CircleConfig& X, double h) {
  WolffReport rep;
  rep.circles = X.circles.size();
  if (X.circles.empty()) return rep;
  const PlaneGrid g = multiplicity_field(X, 1.0, h);
  rep.g_norm = lp_norm(g, 1.5);
  rep.ratio_integral = rep.g_norm / std::pow(X.delta * static_cast<double>(X.circles.size()), 2.0 / 3.0);
  std::map<long, double> bins;
  for (const auto& c : X.circles) bins[std::lround(std::floor((c.x3 - 1.0 + kAlpha0) / X.delta))] += 1.0;
  std::vector<double> w;
  for (const auto& [k, v] : bins) w.push_back(v);
  rep.ratio_discrete = rep.g_norm / lp_norm_1d(w, X.delta, 1.5);
  return rep;
}

void export_grid(const PlaneGrid& g, const std::string& path) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + path);
  bin.write(reinterpret_cast<const char*>(g.values.data()), static_cast<std::streamsize>(g.values.size() * sizeof(double)));
  std::ofstream txt(path + ".txt");
  char buf[256];
  std::snprintf(buf, sizeof buf, "origin_x=%.17g\norigin_y=%.17g\nh=%.17g\nnx=%d\nny=%d\nlayout=row-major-float64\n",
                g.origin.x, g.origin.y, g.h, g.nx, g.ny);
  txt << buf;
}

}  // namespace conelab
