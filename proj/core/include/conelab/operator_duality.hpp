#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "conelab/fourier.hpp"

namespace conelab {

inline constexpr std::size_t kMaxOperatorRows = 4000;
inline constexpr std::size_t kMaxOperatorCols = 2000;

/// Dense E with E[r][c] = sqrt(1/m^3) sqrt(w_c a_c) e^{2 pi i x_r.omega_c}: rows are the m^3 midpoint samples of each
/// cube, columns the quadrature nodes. For g_c = sqrt(w_c a_c) f_c, |E g|^2 is weighted_l2(f, nu, quad, m).
class DiscreteExtensionOperator {
 public:
  /// Coarsens the node grid (same window) when quad has more than max_cols nodes, and lowers m (not below 2)
  /// when the samples exceed max_rows. Throws std::length_error if m = 2 still exceeds max_rows.
  DiscreteExtensionOperator(const CubeMeasure& nu, const ConeQuadrature& quad, int m = 4,
                            std::size_t max_rows = kMaxOperatorRows, std::size_t max_cols = kMaxOperatorCols);
  /// Explicit matrix; rows carry the given sample weights (the L1 weights are their squares).
  DiscreteExtensionOperator(std::size_t rows, std::size_t cols, std::vector<cplx> entries, std::vector<double> row_weight);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const ConeQuadrature& quad() const { return quad_; }
  int m() const { return m_; }
  std::size_t full_nodes() const { return full_nodes_; }
  bool subsampled() const { return full_nodes_ != cols_; }
  /// sqrt of the measure carried by each row.
  const std::vector<double>& row_weight() const { return row_weight_; }
  /// Total measure of the rows.
  double mass() const;

  std::vector<cplx> apply(const std::vector<cplx>& g) const;
  std::vector<cplx> apply_adjoint(const std::vector<cplx>& y) const;
  /// Coefficients sqrt(w a) f of a SpectralFunction on quad().
  std::vector<cplx> coefficients(const SpectralFunction& f) const;

  double frobenius_sq() const;
  /// max column sum times max row sum, an upper bound for the squared spectral norm.
  double holder_bound_sq() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<cplx> a_;  // row-major
  std::vector<double> row_weight_;
  ConeQuadrature quad_;
  int m_ = 0;
  std::size_t full_nodes_ = 0;
};

struct NormBracket {
  double lower = 0.0;  // Rayleigh quotient of the current iterate (squared norm)
  double upper = 0.0;  // min(Frobenius^2, column sum * row sum)
  int iterations = 0;
  std::vector<cplx> vector;  // unit top right singular vector estimate
  double value() const { return std::sqrt(lower); }
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, NormBracket b) : std::runtime_error(what), bracket(std::move(b)) {}
  NormBracket bracket;
};

/// Power iteration on E^H E from a seeded start until the Rayleigh quotient moves by < tol relatively.
/// Throws NonConvergence after max_iter steps.
NormBracket operator_norm(const DiscreteExtensionOperator& E, double tol = 1e-8, int max_iter = 10000,
                          std::uint64_t seed = 1);

/// sum_r row_weight_r |(E g)_r|, which is the L1(nu) norm of Ef.
double l1_of_image(const DiscreteExtensionOperator& E, const std::vector<cplx>& g);

struct L1Report {
  double best = 0.0;           // lower bracket of the L1 constant
  std::vector<cplx> argmax;    // unit vector attaining best
  bool cauchy_schwarz_ok = true;
  int trials = 0;
};

/// Random complex Gaussian unit vectors, then duality iterates g <- E^H(w sign(E g)) from the best ones.
L1Report l1_constant(const DiscreteExtensionOperator& E, int trials = 100, int duality_iters = 20,
                     std::uint64_t seed = 2, const std::vector<cplx>& extra_start = {});

struct LevelReport {
  double lambda_star = 0.0;
  double level_mass = 0.0;  // nu(|Ef| >= lambda_star)
  double l2_sq = 0.0;
  double dynamic_range = 1.0;
  double factor = 0.0;      // l2_sq / (lambda_star^2 level_mass)
  bool bound_holds = true;  // factor <= 2 + 2 log2(dynamic range)
};

/// Dyadic levels lambda_k = max|Ef| 2^{-k} down to the smallest nonzero sample.
LevelReport dyadic_level(const std::vector<double>& abs_values, const std::vector<double>& sample_mass);

struct BbcrReport {
  double u_l2 = 0.0;    // spectral norm (lower bracket)
  double u_l2_upper = 0.0;
  double u_l1 = 0.0;    // L1 constant (lower bracket)
  double ratio = 0.0;   // u_l2 / (u_l1 / mass^{1/2})
  LevelReport level;
};

BbcrReport bbcr_equivalence_check(const DiscreteExtensionOperator& E, std::uint64_t seed = 3);

struct TransferenceRow {
  double mass = 0.0;
  double mass_h = 0.0;
  double plank = 0.0;
  double plank_h = 0.0;
  double l1_max_gap = 0.0;  // max over trials of L1(h nu) - L1(nu), must be <= 0
  bool ok = true;
};

/// Checks mass, P_upper and the per-trial L1 norms under each h (values per cube in [0, 1]).
/// Throws std::invalid_argument when some h is out of range or has the wrong length.
std::vector<TransferenceRow> transference_check(const CubeMeasure& nu, const DiscreteExtensionOperator& E,
                                                const std::vector<std::vector<double>>& hs, int trials = 20,
                                                std::uint64_t seed = 4);

}  // namespace conelab
