#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace conelab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSqrt2 = 1.41421356237309504880;

/// Absolute coordinate tolerance shared by every geometric predicate.
inline constexpr double kGeomTol = 1e-9;

/// Tree summation; the result depends only on the input order, never on
/// how the caller partitioned the work that produced it.
double pairwise_sum(std::span<const double> v);
cplx pairwise_sum(std::span<const cplx> v);

/// splitmix64 finalizer, used to derive independent substream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded generator with a portable uniform draw (the standard
/// distributions are not bit-identical across library vendors).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : eng_(mix_seed(seed, stream)) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return eng_(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }
  /// Standard normal via Box-Muller on the portable uniform.
  double normal();

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Global worker count; 0 selects hardware concurrency.
void set_workers(unsigned n);
unsigned workers();

/// Static contiguous partition of [0, n) across workers. fn(begin, end)
/// must write only to disjoint outputs; results never depend on the split.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

/// Ordinary least squares y = slope*x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_max = 0.0;
};
LineFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace conelab
