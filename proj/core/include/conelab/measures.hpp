#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "conelab/geometry.hpp"

namespace conelab {

using Cube = std::array<int, 3>;

/// Lebesgue measure on a set of distinct lattice unit cubes v + [0,1]^3 inside
/// B_R = [0,R]^2 x [R,2R]. Cubes are kept sorted; the Frostman constant is cached.
class CubeMeasure {
 public:
  CubeMeasure() = default;
  /// Sorts and deduplicates; throws std::invalid_argument if a cube leaves B_R.
  CubeMeasure(int R, std::vector<Cube> cubes);

  int R() const { return R_; }
  const std::vector<Cube>& cubes() const { return cubes_; }
  std::size_t mass() const { return cubes_.size(); }
  double frostman() const { return frostman_; }
  std::vector<SpacetimePoint> centers() const;

  /// Sub-measure on the cubes whose index is flagged.
  CubeMeasure restrict(const std::vector<bool>& keep) const;

 private:
  int R_ = 1;
  std::vector<Cube> cubes_;
  double frostman_ = 0.0;
};

inline SpacetimePoint cube_center(const Cube& c) { return {{c[0] + 0.5, c[1] + 0.5}, c[2] + 0.5}; }

/// Circles in Q at resolution delta. scale is the factor from lattice units to Q (1 if built in Q).
struct CircleConfig {
  std::vector<SpacetimePoint> circles;
  double delta = 0.0;
  double scale = 1.0;
};

/// max over dyadic r in {1, ..., 2R} and centres on the r/2-grid of nu(B(x0,r))/r.
double frostman_constant(const CubeMeasure& nu);
/// The same scan at unit scale: max of |X cap B(x0,r)| / (r/delta) over dyadic r >= delta.
double frostman_constant(const CircleConfig& X);

struct PlankBracket {
  double lower = 0.0;
  double upper = 0.0;
  Lightplank argmax;  // plank realising the lower value
};

/// Search over sampled planks of full dimensions dims = (short, mid, long): directions spaced
/// angle_step, centres on the half-dimension lattice. lower uses the planks as given,
/// upper the same family with every dimension doubled. Optional per-point weights (default 1).
PlankBracket plank_search(const std::vector<SpacetimePoint>& pts, std::array<double, 3> dims, double angle_step,
                          const std::vector<double>& weights = {});

/// Bracket of P(h nu) over 1 x R^{1/2} x R lightplanks; h is per cube, empty means h = 1.
PlankBracket max_plank_mass(const CubeMeasure& nu, const std::vector<double>& h = {});
/// Doubled-plank upper value of gamma_tau over delta x delta/tau x delta/tau^2 planks.
std::int64_t gamma_tau(const CircleConfig& X, double tau);
PlankBracket gamma_tau_bracket(const CircleConfig& X, double tau);

/// Largest cube count in one of the R^{1/2} lightlike 1 x 1 x R tubes tiling P along e_m.
double max_tube_mass_in_plank(const CubeMeasure& nu, const Lightplank& P);

/// Unit-cube self energy E|x-y|^{-alpha} for x, y uniform in [0,1]^3 (Monte-Carlo).
double self_energy_mc(double alpha, std::int64_t samples, std::uint64_t seed);
/// Cached self energy at the default 10^6 samples and fixed seed.
double self_energy(double alpha);
/// Load or save the self-energy cache as "alpha value" lines.
void load_self_energy_cache(const std::string& path);
void save_self_energy_cache(const std::string& path);

struct EnergyParts {
  double cross = 0.0;
  double self = 0.0;
  double total() const { return cross + self; }
};
/// I_alpha with cross terms on centre distances and self terms mass * s(alpha).
EnergyParts energy(const CubeMeasure& nu, double alpha);
/// Plain Monte-Carlo estimate of the full double integral (the oracle for energy()).
double energy_mc(const CubeMeasure& nu, double alpha, std::int64_t samples, std::uint64_t seed);

/// x -> x/R, then the similarity (x', x3) -> (2 alpha0 x', 1 - alpha0 + 2 alpha0 (x3 - 1)) of B_1 onto Q.
/// delta and scale are both 2 alpha0 / R, the image of the lattice unit.
CircleConfig rescale_to_Q(const CubeMeasure& nu);
SpacetimePoint to_Q(const SpacetimePoint& x, double R);

enum class GenKind { LightTube, VerticalTube, KnappPair, WolffRadii, RandomFrostman };

GenKind parse_gen_kind(const std::string& s);
std::string to_string(GenKind k);

/// param is gamma, L or n depending on the kind. Throws std::invalid_argument on infeasible input.
CubeMeasure generate(GenKind kind, int R, int param, std::uint64_t seed);
/// gamma lattice cubes along the lightray of planar direction u through the centre of B_R.
CubeMeasure light_tube(int R, int gamma, Vec2 u = {1.0, 0.0});
/// Unit-scale families built directly in Q.
CircleConfig wolff_radii_config(int n, double delta, std::uint64_t seed);
CircleConfig random_frostman_config(int n, double delta, std::uint64_t seed);

void write_measure(std::ostream& os, const CubeMeasure& nu);
CubeMeasure read_measure(std::istream& is);
void write_circles(std::ostream& os, const CircleConfig& X);
CircleConfig read_circles(std::istream& is);

}  // namespace conelab
