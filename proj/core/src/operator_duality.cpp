#include "conelab/operator_duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace conelab {

namespace {

double norm2(const std::vector<cplx>& v) {
  std::vector<double> t(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) t[i] = std::norm(v[i]);
  return pairwise_sum(t);
}

void normalize(std::vector<cplx>& v) {
  const double n = std::sqrt(norm2(v));
  if (n > 0.0)
    for (auto& z : v) z /= n;
}

std::vector<cplx> random_unit(std::size_t n, Rng& rng) {
  std::vector<cplx> v(n);
  for (auto& z : v) z = {rng.normal(), rng.normal()};
  normalize(v);
  return v;
}

ConeQuadrature coarsen(const ConeQuadrature& quad, std::size_t max_cols) {
  if (quad.size() <= max_cols) return quad;
  // Keep the aspect ratio of the node grid.
  ConeQuadrature c = quad;
  const double ratio = static_cast<double>(quad.n_rho) / quad.n_phi;
  c.n_rho = std::max(2, static_cast<int>(std::floor(std::sqrt(static_cast<double>(max_cols) * ratio))));
  c.n_phi = std::max(1, static_cast<int>(max_cols / c.n_rho));
  return c;
}

}  // namespace

DiscreteExtensionOperator::DiscreteExtensionOperator(const CubeMeasure& nu, const ConeQuadrature& quad, int m,
                                                     std::size_t max_rows, std::size_t max_cols)
    : quad_(coarsen(quad, max_cols)), m_(m), full_nodes_(quad.size()) {
  while (m_ > 2 && nu.mass() * static_cast<std::size_t>(m_ * m_ * m_) > max_rows) --m_;
  if (nu.mass() * static_cast<std::size_t>(m_ * m_ * m_) > max_rows)
    throw std::length_error("DiscreteExtensionOperator: too many cube samples");
  const auto pts = cube_samples(nu, m_);
  rows_ = pts.size();
  cols_ = quad_.size();
  const double rw = 1.0 / std::sqrt(static_cast<double>(m_) * m_ * m_);
  row_weight_.assign(rows_, rw);
  std::vector<double> cw(cols_);
  std::vector<SpacetimePoint> omega(cols_);
  for (int j = 0; j < quad_.n_phi; ++j) {
    const Vec2 u = unit_from_angle(quad_.phi(j));
    for (int k = 0; k < quad_.n_rho; ++k) {
      const double rho = quad_.rho(k);
      cw[quad_.index(j, k)] = std::sqrt(quad_.weight(k) * bump_density(rho));
      omega[quad_.index(j, k)] = {rho * u, rho};
    }
  }
  a_.resize(rows_ * cols_);
  parallel_for(rows_, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r)
      for (std::size_t c = 0; c < cols_; ++c) {
        const double ph = kTwoPi * dot(pts[r], omega[c]);
        a_[r * cols_ + c] = rw * cw[c] * cplx(std::cos(ph), std::sin(ph));
      }
  });
}

DiscreteExtensionOperator::DiscreteExtensionOperator(std::size_t rows, std::size_t cols, std::vector<cplx> entries,
                                                     std::vector<double> row_weight)
    : rows_(rows), cols_(cols), a_(std::move(entries)), row_weight_(std::move(row_weight)), full_nodes_(cols) {
  if (a_.size() != rows * cols || row_weight_.size() != rows)
    throw std::invalid_argument("DiscreteExtensionOperator: shape mismatch");
}

double DiscreteExtensionOperator::mass() const {
  std::vector<double> t(rows_);
  for (std::size_t r = 0; r < rows_; ++r) t[r] = row_weight_[r] * row_weight_[r];
  return pairwise_sum(t);
}

std::vector<cplx> DiscreteExtensionOperator::apply(const std::vector<cplx>& g) const {
  if (g.size() != cols_) throw std::invalid_argument("apply: vector length");
  std::vector<cplx> y(rows_);
  parallel_for(rows_, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      const cplx* row = a_.data() + r * cols_;
      double re = 0.0, im = 0.0;
      for (std::size_t c = 0; c < cols_; ++c) {
        re += row[c].real() * g[c].real() - row[c].imag() * g[c].imag();
        im += row[c].real() * g[c].imag() + row[c].imag() * g[c].real();
      }
      y[r] = {re, im};
    }
  });
  return y;
}

std::vector<cplx> DiscreteExtensionOperator::apply_adjoint(const std::vector<cplx>& y) const {
  if (y.size() != rows_) throw std::invalid_argument("apply_adjoint: vector length");
  std::vector<double> re(cols_, 0.0), im(cols_, 0.0);
  // Column blocks keep the accumulation order independent of the partition.
  parallel_for(cols_, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = 0; r < rows_; ++r) {
      const cplx* row = a_.data() + r * cols_;
      const double yr = y[r].real(), yi = y[r].imag();
      for (std::size_t c = b; c < e; ++c) {
        re[c] += row[c].real() * yr + row[c].imag() * yi;
        im[c] += row[c].real() * yi - row[c].imag() * yr;
      }
    }
  });
  std::vector<cplx> g(cols_);
  for (std::size_t c = 0; c < cols_; ++c) g[c] = {re[c], im[c]};
  return g;
}

std::vector<cplx> DiscreteExtensionOperator::coefficients(const SpectralFunction& f) const {
  if (f.values.size() != cols_) throw std::invalid_argument("coefficients: function not on the operator nodes");
  std::vector<cplx> g(cols_);
  for (int j = 0; j < quad_.n_phi; ++j)
    for (int k = 0; k < quad_.n_rho; ++k) {
      const auto i = quad_.index(j, k);
      g[i] = std::sqrt(quad_.weight(k) * bump_density(quad_.rho(k))) * f.values[i];
    }
  return g;
}

double DiscreteExtensionOperator::frobenius_sq() const { return norm2(a_); }

double DiscreteExtensionOperator::holder_bound_sq() const {
  double row_max = 0.0;
  std::vector<double> col(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) {
      const double v = std::abs(a_[r * cols_ + c]);
      s += v;
      col[c] += v;
    }
    row_max = std::max(row_max, s);
  }
  const double col_max = cols_ == 0 ? 0.0 : *std::max_element(col.begin(), col.end());
  return row_max * col_max;
}

NormBracket operator_norm(const DiscreteExtensionOperator& E, double tol, int max_iter, std::uint64_t seed) {
  NormBracket b;
  b.upper = std::min(E.frobenius_sq(), E.holder_bound_sq());
  if (E.cols() == 0 || E.rows() == 0 || b.upper == 0.0) {
    b.vector.assign(E.cols(), cplx(0.0, 0.0));
    if (!b.vector.empty()) b.vector[0] = 1.0;
    return b;
  }
  Rng rng(seed, 0);
  std::vector<cplx> v = random_unit(E.cols(), rng);
  double prev = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    const auto y = E.apply(v);
    b.lower = std::max(b.lower, norm2(y));
    b.vector = v;
    b.iterations = it;
    if (prev >= 0.0 && std::abs(b.lower - prev) <= tol * b.lower) return b;
    prev = b.lower;
    v = E.apply_adjoint(y);
    normalize(v);
  }
  throw NonConvergence("operator_norm: no convergence", b);
}

double l1_of_image(const DiscreteExtensionOperator& E, const std::vector<cplx>& g) {
  const auto y = E.apply(g);
  std::vector<double> t(y.size());
  for (std::size_t r = 0; r < y.size(); ++r) t[r] = E.row_weight()[r] * std::abs(y[r]);
  return pairwise_sum(t);
}

L1Report l1_constant(const DiscreteExtensionOperator& E, int trials, int duality_iters, std::uint64_t seed,
                     const std::vector<cplx>& extra_start) {
  if (trials < 1) throw std::invalid_argument("l1_constant: need trials >= 1");
  L1Report rep;
  rep.trials = trials;
  if (E.cols() == 0) return rep;
  const double sqrt_mass = std::sqrt(E.mass());
  const auto consider = [&](const std::vector<cplx>& g) {
    const auto y = E.apply(g);
    std::vector<double> t(y.size());
    for (std::size_t r = 0; r < y.size(); ++r) t[r] = E.row_weight()[r] * std::abs(y[r]);
    const double l1 = pairwise_sum(t);
    const double l2 = std::sqrt(norm2(y));
    if (l1 > l2 * sqrt_mass * (1.0 + 1e-12) + 1e-300) rep.cauchy_schwarz_ok = false;
    if (l1 > rep.best) {
      rep.best = l1;
      rep.argmax = g;
    }
    return y;
  };
  Rng rng(seed, 0);
  for (int t = 0; t < trials; ++t) consider(random_unit(E.cols(), rng));
  std::vector<std::vector<cplx>> starts;
  // argmax stays empty when every trial image vanishes.
  if (!rep.argmax.empty()) starts.push_back(rep.argmax);
  if (!extra_start.empty()) starts.push_back(extra_start);
  for (auto g : starts) {
    normalize(g);
    for (int it = 0; it < duality_iters; ++it) {
      auto y = consider(g);
      for (std::size_t r = 0; r < y.size(); ++r) {
        const double a = std::abs(y[r]);
        y[r] = a > 0.0 ? E.row_weight()[r] * y[r] / a : cplx(0.0, 0.0);
      }
      g = E.apply_adjoint(y);
      normalize(g);
    }
    consider(g);
  }
  return rep;
}

LevelReport dyadic_level(const std::vector<double>& abs_values, const std::vector<double>& sample_mass) {
  LevelReport rep;
  if (abs_values.size() != sample_mass.size()) throw std::invalid_argument("dyadic_level: length mismatch");
  std::vector<double> t(abs_values.size());
  double vmax = 0.0, vmin = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = sample_mass[i] * abs_values[i] * abs_values[i];
    vmax = std::max(vmax, abs_values[i]);
    if (abs_values[i] > 0.0 && (vmin == 0.0 || abs_values[i] < vmin)) vmin = abs_values[i];
  }
  rep.l2_sq = pairwise_sum(t);
  if (vmax == 0.0) return rep;
  rep.dynamic_range = vmax / vmin;
  const int levels = static_cast<int>(std::ceil(std::log2(rep.dynamic_range))) + 1;
  double best = -1.0;
  for (int k = 0; k < levels; ++k) {
    const double lam = std::ldexp(vmax, -k);
    double mass = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (abs_values[i] >= lam) mass += sample_mass[i];
    if (lam * lam * mass > best) {
      best = lam * lam * mass;
      rep.lambda_star = lam;
      rep.level_mass = mass;
    }
  }
  rep.factor = rep.l2_sq / best;
  rep.bound_holds = rep.factor <= 2.0 + 2.0 * std::log2(rep.dynamic_range) + 1e-12;
  return rep;
}

BbcrReport bbcr_equivalence_check(const DiscreteExtensionOperator& E, std::uint64_t seed) {
  BbcrReport rep;
  const NormBracket nb = operator_norm(E, 1e-8, 10000, seed);
  rep.u_l2 = nb.value();
  rep.u_l2_upper = std::sqrt(nb.upper);
  const L1Report l1 = l1_constant(E, 100, 20, mix_seed(seed, 1), nb.vector);
  rep.u_l1 = l1.best;
  const double m = E.mass();
  rep.ratio = rep.u_l1 > 0.0 ? rep.u_l2 / (rep.u_l1 / std::sqrt(m)) : 0.0;
  const auto y = E.apply(nb.vector);
  std::vector<double> vals(y.size()), mass(y.size());
  for (std::size_t r = 0; r < y.size(); ++r) {
    const double w = E.row_weight()[r];
    vals[r] = w > 0.0 ? std::abs(y[r]) / w : 0.0;
    mass[r] = w * w;
  }
  rep.level = dyadic_level(vals, mass);
  return rep;
}

std::vector<TransferenceRow> transference_check(const CubeMeasure& nu, const DiscreteExtensionOperator& E,
                                                const std::vector<std::vector<double>>& hs, int trials,
                                                std::uint64_t seed) {
  const std::size_t per_cube = static_cast<std::size_t>(E.m()) * E.m() * E.m();
  if (E.rows() != nu.mass() * per_cube) throw std::invalid_argument("transference_check: operator not built on nu");
  for (const auto& h : hs) {
    if (h.size() != nu.mass()) throw std::invalid_argument("transference_check: h has the wrong length");
    for (double v : h)
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("transference_check: h outside [0, 1]");
  }
  const double p_full = max_plank_mass(nu).upper;
  Rng rng(seed, 0);
  std::vector<std::vector<cplx>> images;
  for (int t = 0; t < trials; ++t) images.push_back(E.apply(random_unit(E.cols(), rng)));
  std::vector<TransferenceRow> out;
  for (const auto& h : hs) {
    TransferenceRow row;
    row.mass = static_cast<double>(nu.mass());
    row.mass_h = pairwise_sum(h);
    row.plank = p_full;
    row.plank_h = max_plank_mass(nu, h).upper;
    row.l1_max_gap = -std::numeric_limits<double>::infinity();
    for (const auto& y : images) {
      std::vector<double> full(y.size()), part(y.size());
      for (std::size_t r = 0; r < y.size(); ++r) {
        full[r] = E.row_weight()[r] * std::abs(y[r]);
        part[r] = h[r / per_cube] * full[r];
      }
      row.l1_max_gap = std::max(row.l1_max_gap, pairwise_sum(part) - pairwise_sum(full));
    }
    if (images.empty()) row.l1_max_gap = 0.0;
    row.ok = row.mass_h <= row.mass + 1e-12 && row.plank_h <= row.plank + 1e-12 && row.l1_max_gap <= 1e-12;
    out.push_back(row);
  }
  return out;
}

}  // namespace conelab
