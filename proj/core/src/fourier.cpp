#include "conelab/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace conelab {

namespace {

// Phases are advanced by complex multiplication and resynchronised from sin/cos every kResync steps.
constexpr int kResync = 32;
constexpr std::size_t kLaneBlock = 256;

double band_profile(double t) { return t >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - t * t)); }

// acc[p] += sum_k c[k] e^{2 pi i (rho0 + k dr) t[p]}
void ramp_accumulate(const double* t, std::size_t np, const cplx* c, int nk, double rho0, double dr, double* acc_re,
                     double* acc_im) {
  std::vector<double> zr(np), zi(np), sr(np), si(np);
  for (std::size_t p = 0; p < np; ++p) {
    const double a = kTwoPi * dr * t[p];
    sr[p] = std::cos(a);
    si[p] = std::sin(a);
  }
  for (int k0 = 0; k0 < nk; k0 += kResync) {
    const double rho = rho0 + k0 * dr;
    for (std::size_t p = 0; p < np; ++p) {
      const double a = kTwoPi * rho * t[p];
      zr[p] = std::cos(a);
      zi[p] = std::sin(a);
    }
    const int k1 = std::min(nk, k0 + kResync);
    for (int k = k0; k < k1; ++k) {
      const double cr = c[k].real(), ci = c[k].imag();
      double* __restrict ar = acc_re;
      double* __restrict ai = acc_im;
      double* __restrict xr = zr.data();
      double* __restrict xi = zi.data();
      const double* __restrict ur = sr.data();
      const double* __restrict ui = si.data();
#pragma omp simd
      for (std::size_t p = 0; p < np; ++p) {
        ar[p] += cr * xr[p] - ci * xi[p];
        ai[p] += cr * xi[p] + ci * xr[p];
        const double nr = xr[p] * ur[p] - xi[p] * ui[p];
        xi[p] = xr[p] * ui[p] + xi[p] * ur[p];
        xr[p] = nr;
      }
    }
  }
}

// s[k] = sum_p e^{2 pi i (rho0 + k dr) t[p]}
void ramp_sums(const double* t, std::size_t np, int nk, double rho0, double dr, cplx* s) {
  std::vector<double> zr(np), zi(np), sr(np), si(np);
  for (std::size_t p = 0; p < np; ++p) {
    const double a = kTwoPi * dr * t[p];
    sr[p] = std::cos(a);
    si[p] = std::sin(a);
  }
  for (int k0 = 0; k0 < nk; k0 += kResync) {
    const double rho = rho0 + k0 * dr;
    for (std::size_t p = 0; p < np; ++p) {
      const double a = kTwoPi * rho * t[p];
      zr[p] = std::cos(a);
      zi[p] = std::sin(a);
    }
    const int k1 = std::min(nk, k0 + kResync);
    for (int k = k0; k < k1; ++k) {
      double re = 0.0, im = 0.0;
      double* __restrict xr = zr.data();
      double* __restrict xi = zi.data();
      const double* __restrict ur = sr.data();
      const double* __restrict ui = si.data();
#pragma omp simd reduction(+ : re, im)
      for (std::size_t p = 0; p < np; ++p) {
        re += xr[p];
        im += xi[p];
        const double nr = xr[p] * ur[p] - xi[p] * ui[p];
        xi[p] = xr[p] * ui[p] + xi[p] * ur[p];
        xr[p] = nr;
      }
      s[k] = {re, im};
    }
  }
}

std::vector<double> density_weights(const ConeQuadrature& quad) {
  std::vector<double> wa(quad.n_rho);
  for (int k = 0; k < quad.n_rho; ++k) wa[k] = quad.weight(k) * bump_density(quad.rho(k));
  return wa;
}

void check_resolution(const std::vector<SpacetimePoint>& xs, const ConeQuadrature& quad) {
  for (const auto& x : xs)
    if (norm(x) > quad.lambda * (1.0 + 1e-12)) throw std::domain_error("point beyond the quadrature resolution scale");
}

double rel_change(cplx a, cplx b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

// Ef at every point, coefficients given per angle as (j, k) -> weight a f.
std::vector<cplx> extend(const ConeQuadrature& quad, const std::vector<SpacetimePoint>& xs,
                         const std::function<cplx(int, int)>& coeff) {
  check_resolution(xs, quad);
  const std::size_t n = xs.size();
  std::vector<cplx> out(n);
  const std::size_t nblocks = (n + kLaneBlock - 1) / kLaneBlock;
  parallel_for(nblocks, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      const std::size_t p0 = b * kLaneBlock, np = std::min(n, p0 + kLaneBlock) - p0;
      std::vector<double> per_re(static_cast<std::size_t>(quad.n_phi) * np), per_im(per_re.size());
      std::vector<double> t(np);
      std::vector<cplx> c(quad.n_rho);
      for (int j = 0; j < quad.n_phi; ++j) {
        const Vec2 u = unit_from_angle(quad.phi(j));
        for (std::size_t p = 0; p < np; ++p) t[p] = dot(xs[p0 + p].xp, u) + xs[p0 + p].x3;
        for (int k = 0; k < quad.n_rho; ++k) c[k] = coeff(j, k);
        ramp_accumulate(t.data(), np, c.data(), quad.n_rho, quad.rho(0), quad.d_rho(), per_re.data() + j * np,
                        per_im.data() + j * np);
      }
      std::vector<double> col_re(quad.n_phi), col_im(quad.n_phi);
      for (std::size_t p = 0; p < np; ++p) {
        for (int j = 0; j < quad.n_phi; ++j) {
          col_re[j] = per_re[j * np + p];
          col_im[j] = per_im[j * np + p];
        }
        out[p0 + p] = {pairwise_sum(col_re), pairwise_sum(col_im)};
      }
    }
  });
  return out;
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

}  // namespace

double bump_density(double rho) {
  if (rho <= 1.0 || rho >= 2.0) return 0.0;
  if (rho < 1.1) return band_profile((1.1 - rho) / 0.1);
  if (rho > 1.9) return band_profile((rho - 1.9) / 0.1);
  return 1.0;
}

ConeQuadrature ConeQuadrature::for_scale(double lambda, double q, double phi0, double phi1) {
  if (!(lambda > 0.0) || !(q > 0.0) || !(phi1 > phi0) || phi1 - phi0 > kTwoPi + 1e-12)
    throw std::invalid_argument("ConeQuadrature: bad scale or window");
  ConeQuadrature c;
  c.lambda = lambda;
  c.q = q;
  c.phi0 = phi0;
  c.phi1 = phi1;
  // Arc length at |xi| = 2 bounds the angular spacing.
  c.n_rho = std::max(32, static_cast<int>(std::ceil(q * lambda)));
  c.n_phi = std::max(8, static_cast<int>(std::ceil(2.0 * (phi1 - phi0) * q * lambda)));
  return c;
}

ConeQuadrature ConeQuadrature::refined() const {
  ConeQuadrature c = *this;
  c.n_rho *= 2;
  c.n_phi *= 2;
  return c;
}

double ConeQuadrature::mass() const {
  const auto wa = density_weights(*this);
  return pairwise_sum(wa) * n_phi;
}

SpectralFunction SpectralFunction::constant(const ConeQuadrature& quad, cplx c) {
  return {std::vector<cplx>(quad.size(), c)};
}

double SpectralFunction::l2_norm_sq(const ConeQuadrature& quad) const {
  if (values.size() != quad.size()) throw std::invalid_argument("SpectralFunction: size does not match quadrature");
  const auto wa = density_weights(quad);
  std::vector<double> t(values.size());
  for (int j = 0; j < quad.n_phi; ++j)
    for (int k = 0; k < quad.n_rho; ++k) t[quad.index(j, k)] = wa[k] * std::norm(values[quad.index(j, k)]);
  return pairwise_sum(t);
}

std::vector<ResolvedValue> sigma_check_many(const std::vector<SpacetimePoint>& xs, const ConeQuadrature& quad,
                                            bool check) {
  const auto run = [&](const ConeQuadrature& qd) {
    const auto wa = density_weights(qd);
    return extend(qd, xs, [&](int, int k) { return cplx(wa[k], 0.0); });
  };
  const auto base = run(quad);
  std::vector<ResolvedValue> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i].value = out[i].refined = base[i];
  if (check) {
    const auto fine = run(quad.refined());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      out[i].refined = fine[i];
      out[i].rel_change = rel_change(base[i], fine[i]);
      out[i].under_resolved = out[i].rel_change >= kSelfCheckTol;
    }
  }
  return out;
}

ResolvedValue sigma_check(const SpacetimePoint& x, const ConeQuadrature& quad, bool check) {
  return sigma_check_many({x}, quad, check).front();
}

cplx sigma_check_bessel(const SpacetimePoint& x, int n) {
  const double r = norm(x.xp);
  std::vector<double> re(n), im(n);
  const double h = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const double rho = 1.0 + (i + 0.5) * h;
    const double amp = kTwoPi * bump_density(rho) * rho * std::cyl_bessel_j(0.0, kTwoPi * rho * r) * h;
    re[i] = amp * std::cos(kTwoPi * rho * x.x3);
    im[i] = amp * std::sin(kTwoPi * rho * x.x3);
  }
  return {pairwise_sum(re), pairwise_sum(im)};
}

cplx extension(const SpectralFunction& f, const SpacetimePoint& x, const ConeQuadrature& quad) {
  return extension_many(f, {x}, quad).front();
}

std::vector<cplx> extension_many(const SpectralFunction& f, const std::vector<SpacetimePoint>& xs,
                                 const ConeQuadrature& quad) {
  if (f.values.size() != quad.size()) throw std::invalid_argument("SpectralFunction: size does not match quadrature");
  const auto wa = density_weights(quad);
  return extend(quad, xs, [&](int j, int k) { return wa[k] * f.values[quad.index(j, k)]; });
}

double cube_factor_sq(const SpacetimePoint& omega) {
  const double s = sinc(kPi * omega.xp.x) * sinc(kPi * omega.xp.y) * sinc(kPi * omega.x3);
  return s * s;
}

cplx nu_hat(const CubeMeasure& nu, const SpacetimePoint& omega) {
  std::vector<double> re, im;
  re.reserve(nu.mass());
  im.reserve(nu.mass());
  for (const auto& c : nu.cubes()) {
    const double a = -kTwoPi * dot(cube_center(c), omega);
    re.push_back(std::cos(a));
    im.push_back(std::sin(a));
  }
  const double s = sinc(kPi * omega.xp.x) * sinc(kPi * omega.xp.y) * sinc(kPi * omega.x3);
  return s * cplx(pairwise_sum(re), pairwise_sum(im));
}

namespace {

double decay_sum(const CubeMeasure& nu, const ConeQuadrature& quad) {
  const auto wa = density_weights(quad);
  const auto centers = nu.centers();
  const std::size_t np = centers.size();
  std::vector<double> per_angle(quad.n_phi);
  parallel_for(static_cast<std::size_t>(quad.n_phi), [&](std::size_t j0, std::size_t j1) {
    std::vector<double> t(np), terms(quad.n_rho);
    std::vector<cplx> s(quad.n_rho);
    for (std::size_t j = j0; j < j1; ++j) {
      const double phi = quad.phi(static_cast<int>(j));
      const Vec2 u = unit_from_angle(phi);
      for (std::size_t p = 0; p < np; ++p) t[p] = -(dot(centers[p].xp, u) + centers[p].x3);
      ramp_sums(t.data(), np, quad.n_rho, quad.rho(0), quad.d_rho(), s.data());
      for (int k = 0; k < quad.n_rho; ++k) {
        const double rho = quad.rho(k);
        terms[k] = wa[k] * cube_factor_sq({rho * u, rho}) * std::norm(s[k]);
      }
      per_angle[j] = pairwise_sum(terms);
    }
  });
  return pairwise_sum(per_angle);
}

}  // namespace

DecayMean decay_mean(const CubeMeasure& nu, const ConeQuadrature& quad, bool check) {
  if (quad.lambda < decay_scale(nu.R()) * (1.0 - 1e-12))
    throw std::invalid_argument("decay_mean: quadrature does not resolve scale 3 sqrt2 R");
  DecayMean out;
  out.value = out.refined = decay_sum(nu, quad);
  if (check) {
    out.refined = decay_sum(nu, quad.refined());
    out.rel_change = rel_change(out.value, out.refined);
    out.under_resolved = out.rel_change >= kSelfCheckTol;
  }
  return out;
}

double PairKernel::total() const { return pairwise_sum(value) + diagonal; }

PairKernel pair_kernel(const CubeMeasure& nu, const ConeQuadrature& quad) {
  const auto centers = nu.centers();
  PairKernel pk;
  std::vector<SpacetimePoint> diffs;
  for (std::uint32_t i = 0; i < centers.size(); ++i)
    for (std::uint32_t j = i + 1; j < centers.size(); ++j) {
      pk.pairs.emplace_back(i, j);
      // K(c_i - c_j) is the extension of S evaluated at c_j - c_i.
      diffs.push_back(centers[j] - centers[i]);
    }
  diffs.push_back({{0.0, 0.0}, 0.0});
  const auto wa = density_weights(quad);
  std::vector<double> S(quad.size());
  for (int j = 0; j < quad.n_phi; ++j) {
    const Vec2 u = unit_from_angle(quad.phi(j));
    for (int k = 0; k < quad.n_rho; ++k) S[quad.index(j, k)] = wa[k] * cube_factor_sq({quad.rho(k) * u, quad.rho(k)});
  }
  const auto K = extend(quad, diffs, [&](int j, int k) { return cplx(S[quad.index(j, k)], 0.0); });
  pk.value.resize(pk.pairs.size());
  for (std::size_t i = 0; i < pk.pairs.size(); ++i) pk.value[i] = 2.0 * K[i].real();
  pk.diagonal = static_cast<double>(centers.size()) * K.back().real();
  return pk;
}

std::vector<SpacetimePoint> cube_samples(const CubeMeasure& nu, int m) {
  if (m < 1) throw std::invalid_argument("cube_samples: need m >= 1");
  std::vector<SpacetimePoint> pts;
  pts.reserve(nu.mass() * m * m * m);
  for (const auto& c : nu.cubes())
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int d = 0; d < m; ++d)
          pts.push_back({{c[0] + (a + 0.5) / m, c[1] + (b + 0.5) / m}, c[2] + (d + 0.5) / m});
  return pts;
}

double weighted_l2(const SpectralFunction& f, const CubeMeasure& nu, const ConeQuadrature& quad, int m) {
  if (m < 2) throw std::invalid_argument("weighted_l2: need m >= 2");
  const auto vals = extension_many(f, cube_samples(nu, m), quad);
  std::vector<double> t(vals.size());
  const double w = 1.0 / (static_cast<double>(m) * m * m);
  for (std::size_t i = 0; i < vals.size(); ++i) t[i] = w * std::norm(vals[i]);
  return pairwise_sum(t);
}

SpectralFunction modulation(const ConeQuadrature& quad, const SpacetimePoint& x0) {
  SpectralFunction f;
  f.values.resize(quad.size());
  for (int j = 0; j < quad.n_phi; ++j) {
    const Vec2 u = unit_from_angle(quad.phi(j));
    for (int i = 0; i < quad.n_rho; ++i) {
      const double a = -kTwoPi * quad.rho(i) * (dot(x0.xp, u) + x0.x3);
      f.values[quad.index(j, i)] = {std::cos(a), std::sin(a)};
    }
  }
  return f;
}

Knapp knapp(double gamma, double R, double q) {
  if (!(gamma >= 1.0) || gamma > R) throw std::invalid_argument("knapp: need 1 <= gamma <= R");
  Knapp k;
  const double width = 1.0 / std::sqrt(gamma);
  k.quad = ConeQuadrature::for_scale(decay_scale(R), q, 0.0, width);
  k.e_planar = unit_from_angle(0.5 * width);
  const SpacetimePoint x0 = knapp_center(R);
  k.f = modulation(k.quad, x0);
  k.P.center = x0;
  k.P.basis = LightlikeBasis::from_direction(k.e_planar);
  k.P.half_dims = {0.5, 0.5 * std::sqrt(gamma), 0.5 * gamma};
  k.P.dilation = 1.0;
  return k;
}

CubeMeasure knapp_tube(const Knapp& k, int R, int gamma) { return light_tube(R, gamma, -1.0 * k.e_planar); }

SpacetimePoint off_cone_point(double r, double d) {
  // In the (rho, x3) half-plane the upper nappe is the ray at angle pi/4; rotating by beta towards the axis
  // keeps |x| and puts the point at distance r sin(beta) from it.
  if (d < 0.0 || d > r / kSqrt2) throw std::invalid_argument("off_cone_point: need 0 <= d <= r / sqrt2");
  const double a = 0.25 * kPi + std::asin(d / r);
  return {{r * std::cos(a), 0.0}, r * std::sin(a)};
}

StationaryPhaseReport stationary_phase_diagnostic(const ConeQuadrature& quad, const StationaryPhaseSpec& spec) {
  StationaryPhaseReport rep;
  std::vector<SpacetimePoint> pts;
  for (double r : spec.on_radius) pts.push_back({{r / kSqrt2, 0.0}, r / kSqrt2});
  for (double d : spec.off_distance) pts.push_back(off_cone_point(spec.off_radius, d));
  pts.push_back({{0.0, 0.0}, spec.axis_t});
  const auto vals = sigma_check_many(pts, quad, true);
  std::size_t i = 0;
  std::vector<double> lx, ly;
  for (double r : spec.on_radius) {
    rep.on_radius.push_back(r);
    rep.on_value.push_back(std::abs(vals[i].value));
    rep.on_rel_change.push_back(vals[i].rel_change);
    lx.push_back(std::log(r));
    ly.push_back(std::log(rep.on_value.back()));
    ++i;
  }
  rep.on_slope = least_squares(lx, ly).slope;
  for (double d : spec.off_distance) {
    rep.off_distance.push_back(d);
    rep.off_value.push_back(std::abs(vals[i].value));
    rep.off_rel_change.push_back(vals[i].rel_change);
    ++i;
  }
  if (!rep.off_value.empty() && rep.off_value.front() > 0.0)
    rep.off_ratio_far = rep.off_value.back() / rep.off_value.front();
  rep.axis_t = spec.axis_t;
  rep.axis_quadrature = std::abs(vals[i].value);
  rep.axis_rel_change = vals[i].rel_change;
  rep.axis_reference = std::abs(sigma_check_bessel(pts[i]));
  for (const auto& v : vals) rep.max_rel_change = std::max(rep.max_rel_change, v.rel_change);
  return rep;
}

}  // namespace conelab
