#pragma once

#include <functional>
#include <string>
#include <vector>

#include "conelab/measures.hpp"

namespace conelab {

/// Cell-centred raster; cell (i, j) has centre origin + ((i + 1/2) h, (j + 1/2) h), row-major in j.
struct PlaneGrid {
  Vec2 origin{-1.1, -1.1};
  double h = 0.0;
  int nx = 0;
  int ny = 0;
  std::vector<double> values;

  /// Square grid covering [lo, hi]^2.
  static PlaneGrid covering(double h, double lo = -1.1, double hi = 1.1);
  Vec2 cell_center(int i, int j) const { return {origin.x + (i + 0.5) * h, origin.y + (j + 0.5) * h}; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(j) * nx + i]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }
  double cell_area() const { return h * h; }
};

/// Calls fn(flat index) for every cell whose centre satisfies ||p - a| - r| <= w.
/// Throws std::out_of_range if the annulus leaves the grid.
void for_each_annulus_cell(const PlaneGrid& g, Vec2 a, double r, double w, const std::function<void(std::size_t)>& fn);
std::size_t annulus_cell_count(const PlaneGrid& g, Vec2 a, double r, double w);

/// Average of |f| over the rasterised annulus C_{delta,a,r}.
double annulus_average(const PlaneGrid& f, Vec2 a, double r, double delta);

struct MaximalResult {
  std::vector<double> radii;
  std::vector<double> value;          // max over the delta/2 centre grid
  std::vector<double> value_doubled;  // same centres with 2 delta annuli
};

/// Radii 1 - alpha0 + k delta across [1 - alpha0, 1 + alpha0]; centres on the delta/2 grid of [0, 2 alpha0]^2.
MaximalResult maximal_function(const PlaneGrid& f, double delta);

/// g_{lambda delta}(y) = #{x in X : y in C_{lambda delta, x}} on a grid of spacing h (default delta/4).
PlaneGrid multiplicity_field(const CircleConfig& X, double lambda, double h = 0.0);

/// (sum |v|^p h^2)^{1/p}.
double lp_norm(const PlaneGrid& g, double p);
/// (sum |v|^p dx)^{1/p} for samples on a line of spacing dx.
double lp_norm_1d(const std::vector<double>& v, double dx, double p);

struct WeightedFamily {
  std::vector<double> radii;
  std::vector<Vec2> centers;
  std::vector<double> weights;
};

/// g(y) = sum_k w_k C_{delta, a_k, r_k}(y).
PlaneGrid family_field(const WeightedFamily& fam, double delta, double h);

struct WolffReport {
  double g_norm = 0.0;          // ||g_delta||_{3/2}
  double ratio_integral = 0.0;  // ||g||_{3/2} / (delta |X|)^{2/3}
  double ratio_discrete = 0.0;  // ||g||_{3/2} / ||w||_{3/2} with w the per-radius-bin counts
  std::size_t circles = 0;
};

WolffReport wolff_example_check(const CircleConfig& X, double h = 0.0);

/// Flat row-major float64 block at path and a text sidecar at path + ".txt".
void export_grid(const PlaneGrid& g, const std::string& path);

}  // namespace conelab
