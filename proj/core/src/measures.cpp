#include "conelab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace conelab {

namespace {

constexpr std::int64_t kKeyOffset = 1 << 20;

std::uint64_t pack(std::int64_t i, std::int64_t j, std::int64_t k) {
  return (static_cast<std::uint64_t>(i + kKeyOffset) << 42) | (static_cast<std::uint64_t>(j + kKeyOffset) << 21) |
         static_cast<std::uint64_t>(k + kKeyOffset);
}

// max over dyadic r = unit * 2^k <= rmax and centres on the r/2 grid of count / (r / unit).
double frostman_scan(const std::vector<SpacetimePoint>& pts, double unit, double rmax) {
  if (pts.empty()) return 0.0;
  double best = 0.0;
  std::unordered_map<std::uint64_t, int> counts;
  for (double r = unit; r <= rmax * (1.0 + 1e-12); r *= 2.0) {
    const double g = 0.5 * r;
    counts.clear();
    int level_best = 0;
    for (const SpacetimePoint& p : pts) {
      const double c[3] = {p.xp.x, p.xp.y, p.x3};
      std::int64_t lo[3], hi[3];
      for (int a = 0; a < 3; ++a) {
        lo[a] = static_cast<std::int64_t>(std::ceil((c[a] - r) / g - 1e-9));
        hi[a] = static_cast<std::int64_t>(std::floor((c[a] + r) / g + 1e-9));
      }
      for (std::int64_t i = lo[0]; i <= hi[0]; ++i)
        for (std::int64_t j = lo[1]; j <= hi[1]; ++j)
          for (std::int64_t k = lo[2]; k <= hi[2]; ++k) {
            const double dx = i * g - c[0], dy = j * g - c[1], dz = k * g - c[2];
            if (dx * dx + dy * dy + dz * dz > r * r * (1.0 + 1e-12)) continue;
            level_best = std::max(level_best, ++counts[pack(i, j, k)]);
          }
    }
    best = std::max(best, level_best / (r / unit));
  }
  return best;
}

std::vector<SpacetimePoint> cube_centers(const std::vector<Cube>& cubes) {
  std::vector<SpacetimePoint> out;
  out.reserve(cubes.size());
  for (const Cube& c : cubes) out.push_back(cube_center(c));
  return out;
}

}  // namespace

CubeMeasure::CubeMeasure(int R, std::vector<Cube> cubes) : R_(R), cubes_(std::move(cubes)) {
  if (R < 1) throw std::invalid_argument("CubeMeasure: R must be positive");
  std::sort(cubes_.begin(), cubes_.end());
  cubes_.erase(std::unique(cubes_.begin(), cubes_.end()), cubes_.end());
  for (const Cube& c : cubes_)
    if (c[0] < 0 || c[0] > R - 1 || c[1] < 0 || c[1] > R - 1 || c[2] < R || c[2] > 2 * R - 1)
      throw std::invalid_argument("CubeMeasure: cube outside B_R");
  frostman_ = frostman_scan(cube_centers(cubes_), 1.0, 2.0 * R);
}

std::vector<SpacetimePoint> CubeMeasure::centers() const { return cube_centers(cubes_); }

CubeMeasure CubeMeasure::restrict(const std::vector<bool>& keep) const {
  if (keep.size() != cubes_.size()) throw std::invalid_argument("restrict: mask size mismatch");
  std::vector<Cube> out;
  for (std::size_t i = 0; i < cubes_.size(); ++i)
    if (keep[i]) out.push_back(cubes_[i]);
  return CubeMeasure(R_, std::move(out));
}

double frostman_constant(const CubeMeasure& nu) { return nu.frostman(); }

double frostman_constant(const CircleConfig& X) {
  const double diam = 2.0 * kAlpha0 * std::sqrt(3.0);
  return frostman_scan(X.circles, X.delta, std::max(X.delta, 2.0 * diam));
}

PlankBracket plank_search(const std::vector<SpacetimePoint>& pts, std::array<double, 3> dims, double angle_step,
                          const std::vector<double>& weights) {
  if (!weights.empty() && weights.size() != pts.size()) throw std::invalid_argument("plank_search: weight count mismatch");
  PlankBracket out;
  const std::array<double, 3> h{dims[0] / 2, dims[1] / 2, dims[2] / 2};
  out.argmax = Lightplank{{}, LightlikeBasis{}, h, 1.0};
  if (pts.empty()) return out;
  const auto ndir = static_cast<int>(std::ceil(kTwoPi / angle_step - 1e-9));
  std::unordered_map<std::uint64_t, double> lower, upper;
  double best_lower = 0.0, best_upper = 0.0;
  for (int d = 0; d < ndir; ++d) {
    const LightlikeBasis basis = LightlikeBasis::from_angle(d * angle_step);
    lower.clear();
    upper.clear();
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double wq = weights.empty() ? 1.0 : weights[q];
      if (wq == 0.0) continue;
      const auto c = basis.coords(pts[q]);
      std::int64_t lo1[3], hi1[3], lo2[3], hi2[3];
      for (int a = 0; a < 3; ++a) {
        const double t = c[a] / h[a];
        lo1[a] = static_cast<std::int64_t>(std::ceil(t - 1.0 - 1e-9));
        hi1[a] = static_cast<std::int64_t>(std::floor(t + 1.0 + 1e-9));
        lo2[a] = static_cast<std::int64_t>(std::ceil(t - 2.0 - 1e-9));
        hi2[a] = static_cast<std::int64_t>(std::floor(t + 2.0 + 1e-9));
      }
      for (std::int64_t i = lo1[0]; i <= hi1[0]; ++i)
        for (std::int64_t j = lo1[1]; j <= hi1[1]; ++j)
          for (std::int64_t k = lo1[2]; k <= hi1[2]; ++k) {
            const double n = lower[pack(i, j, k)] += wq;
            if (n > best_lower) {
              best_lower = n;
              out.argmax.basis = basis;
              out.argmax.center = (i * h[0]) * basis.e_s() + (j * h[1]) * basis.e_m() + (k * h[2]) * basis.e_l();
            }
          }
      for (std::int64_t i = lo2[0]; i <= hi2[0]; ++i)
        for (std::int64_t j = lo2[1]; j <= hi2[1]; ++j)
          for (std::int64_t k = lo2[2]; k <= hi2[2]; ++k) best_upper = std::max(best_upper, upper[pack(i, j, k)] += wq);
    }
  }
  out.lower = best_lower;
  out.upper = best_upper;
  return out;
}

PlankBracket max_plank_mass(const CubeMeasure& nu, const std::vector<double>& h) {
  const double R = nu.R();
  const double sq = std::sqrt(R);
  return plank_search(nu.centers(), {1.0, sq, R}, 0.5 / sq, h);
}

PlankBracket gamma_tau_bracket(const CircleConfig& X, double tau) {
  const double d = X.delta;
  if (tau < std::sqrt(d) * (1.0 - 1e-12) || tau > 1.0) throw std::invalid_argument("gamma_tau: need delta^1/2 <= tau <= 1");
  return plank_search(X.circles, {d, d / tau, d / (tau * tau)}, 0.5 * tau);
}

std::int64_t gamma_tau(const CircleConfig& X, double tau) {
  return static_cast<std::int64_t>(gamma_tau_bracket(X, tau).upper);
}

double max_tube_mass_in_plank(const CubeMeasure& nu, const Lightplank& P) {
  const int ntubes = std::max(1, static_cast<int>(std::ceil(2.0 * P.half_dims[kM] - 1e-9)));
  const double w = 2.0 * P.half_dims[kM] / ntubes;
  const auto centers = nu.centers();
  double best = 0.0;
  for (int t = 0; t < ntubes; ++t) {
    Lightplank tube = P;
    tube.center = P.center + (-P.half_dims[kM] + (t + 0.5) * w) * P.basis.e_m();
    tube.half_dims = {P.half_dims[kS], 0.5 * w, P.half_dims[kL]};
    double n = 0;
    for (const auto& c : centers) n += plank_membership(tube, c, 1.0) ? 1.0 : 0.0;
    best = std::max(best, n);
  }
  return best;
}

double self_energy_mc(double alpha, std::int64_t samples, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 3.0)) throw std::invalid_argument("self energy: need 0 < alpha < 3");
  constexpr std::int64_t kChunk = 1 << 16;
  const auto chunks = static_cast<std::size_t>((samples + kChunk - 1) / kChunk);
  std::vector<double> part(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      Rng rng(seed, c);
      const std::int64_t n = std::min<std::int64_t>(kChunk, samples - static_cast<std::int64_t>(c) * kChunk);
      double s = 0.0;
      for (std::int64_t k = 0; k < n; ++k) {
        const double dx = rng.uniform() - rng.uniform();
        const double dy = rng.uniform() - rng.uniform();
        const double dz = rng.uniform() - rng.uniform();
        s += std::pow(dx * dx + dy * dy + dz * dz, -0.5 * alpha);
      }
      part[c] = s;
    }
  });
  return pairwise_sum(part) / static_cast<double>(samples);
}

namespace {
std::mutex g_energy_mutex;
std::map<double, double> g_energy_cache;
constexpr std::uint64_t kSelfEnergySeed = 0x5e1fe4e5ULL;
}  // namespace

double self_energy(double alpha) {
  {
    std::lock_guard<std::mutex> lock(g_energy_mutex);
    const auto it = g_energy_cache.find(alpha);
    if (it != g_energy_cache.end()) return it->second;
  }
  const double v = self_energy_mc(alpha, 1000000, kSelfEnergySeed);
  std::lock_guard<std::mutex> lock(g_energy_mutex);
  g_energy_cache.emplace(alpha, v);
  return v;
}

void load_self_energy_cache(const std::string& path) {
  std::ifstream in(path);
  if (!in) return;
  double a, v;
  std::lock_guard<std::mutex> lock(g_energy_mutex);
  while (in >> a >> v) g_energy_cache[a] = v;
}

void save_self_energy_cache(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  std::lock_guard<std::mutex> lock(g_energy_mutex);
  char buf[64];
  for (const auto& [a, v] : g_energy_cache) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", a, v);
    out << buf;
  }
}

EnergyParts energy(const CubeMeasure& nu, double alpha) {
  if (!(alpha > 0.0 && alpha < 3.0)) throw std::invalid_argument("energy: need 0 < alpha < 3");
  const auto c = nu.centers();
  std::vector<double> rows(c.size(), 0.0);
  parallel_for(c.size(), [&](std::size_t b, std::size_t e) {
    std::vector<double> row(c.size());
    for (std::size_t i = b; i < e; ++i) {
      for (std::size_t j = 0; j < c.size(); ++j) row[j] = (i == j) ? 0.0 : std::pow(norm(c[i] - c[j]), -alpha);
      rows[i] = pairwise_sum(row);
    }
  });
  return {pairwise_sum(rows), static_cast<double>(nu.mass()) * self_energy(alpha)};
}

double energy_mc(const CubeMeasure& nu, double alpha, std::int64_t samples, std::uint64_t seed) {
  const auto c = nu.centers();
  if (c.empty()) return 0.0;
  Rng rng(seed, 17);
  std::vector<double> vals(static_cast<std::size_t>(samples));
  for (auto& v : vals) {
    const auto& p = c[rng.below(c.size())];
    const auto& q = c[rng.below(c.size())];
    const SpacetimePoint x{{p.xp.x + rng.uniform() - 0.5, p.xp.y + rng.uniform() - 0.5}, p.x3 + rng.uniform() - 0.5};
    const SpacetimePoint y{{q.xp.x + rng.uniform() - 0.5, q.xp.y + rng.uniform() - 0.5}, q.x3 + rng.uniform() - 0.5};
    v = std::pow(norm(x - y), -alpha);
  }
  const double m = static_cast<double>(c.size());
  return m * m * pairwise_sum(vals) / static_cast<double>(samples);
}

SpacetimePoint to_Q(const SpacetimePoint& x, double R) {
  const double s = 2.0 * kAlpha0 / R;
  return {s * x.xp, 1.0 - kAlpha0 + s * (x.x3 - R)};
}

CircleConfig rescale_to_Q(const CubeMeasure& nu) {
  CircleConfig X;
  X.scale = 2.0 * kAlpha0 / nu.R();
  X.delta = X.scale;
  X.circles.reserve(nu.mass());
  for (const auto& c : nu.centers()) X.circles.push_back(to_Q(c, nu.R()));
  return X;
}

GenKind parse_gen_kind(const std::string& s) {
  if (s == "light_tube") return GenKind::LightTube;
  if (s == "vertical_tube") return GenKind::VerticalTube;
  if (s == "knapp_pair") return GenKind::KnappPair;
  if (s == "wolff_radii") return GenKind::WolffRadii;
  if (s == "random_frostman") return GenKind::RandomFrostman;
  throw std::invalid_argument("unknown generator kind: " + s);
}

std::string to_string(GenKind k) {
  switch (k) {
    case GenKind::LightTube: return "light_tube";
    case GenKind::VerticalTube: return "vertical_tube";
    case GenKind::KnappPair: return "knapp_pair";
    case GenKind::WolffRadii: return "wolff_radii";
    case GenKind::RandomFrostman: return "random_frostman";
  }
  return "?";
}

CubeMeasure light_tube(int R, int gamma, Vec2 u) {
  if (gamma < 1 || gamma > R) throw std::invalid_argument("light_tube: need 1 <= gamma <= R");
  const double n = norm(u);
  u = (1.0 / n) * u;
  const SpacetimePoint c{{0.5 * R, 0.5 * R}, 1.5 * R};
  std::vector<Cube> cubes;
  for (int k = 0; k < gamma; ++k) {
    const double t = k - 0.5 * (gamma - 1);
    const SpacetimePoint p = c + t * SpacetimePoint{u, 1.0};
    cubes.push_back({std::clamp(static_cast<int>(std::floor(p.xp.x)), 0, R - 1),
                     std::clamp(static_cast<int>(std::floor(p.xp.y)), 0, R - 1),
                     std::clamp(static_cast<int>(std::floor(p.x3)), R, 2 * R - 1)});
  }
  return CubeMeasure(R, std::move(cubes));
}

namespace {

std::vector<Cube> vertical_column(int R, int L, int x, int y) {
  std::vector<Cube> cubes;
  const int z0 = R + (R - L) / 2;
  for (int k = 0; k < L; ++k) cubes.push_back({x, y, z0 + k});
  return cubes;
}

CubeMeasure random_frostman_cubes(int R, int n, std::uint64_t seed) {
  Rng rng(seed, 1);
  int levels = 0;
  while ((1 << levels) < R) ++levels;
  std::vector<std::unordered_map<std::uint64_t, int>> load(levels + 1);
  std::vector<Cube> chosen;
  std::unordered_map<std::uint64_t, bool> used;
  const std::int64_t attempts = 200LL * n;
  for (std::int64_t a = 0; a < attempts && static_cast<int>(chosen.size()) < n; ++a) {
    const Cube c{static_cast<int>(rng.below(R)), static_cast<int>(rng.below(R)), R + static_cast<int>(rng.below(R))};
    const std::uint64_t key = pack(c[0], c[1], c[2]);
    if (used.count(key)) continue;
    bool ok = true;
    for (int l = 0; l <= levels && ok; ++l) {
      const int side = 1 << l;
      const std::uint64_t node = pack(c[0] / side, c[1] / side, (c[2] - R) / side);
      const auto it = load[l].find(node);
      ok = (it == load[l].end() ? 0 : it->second) < 4 * side;
    }
    if (!ok) continue;
    for (int l = 0; l <= levels; ++l) {
      const int side = 1 << l;
      ++load[l][pack(c[0] / side, c[1] / side, (c[2] - R) / side)];
    }
    used[key] = true;
    chosen.push_back(c);
  }
  return CubeMeasure(R, std::move(chosen));
}

}  // namespace

CubeMeasure generate(GenKind kind, int R, int param, std::uint64_t seed) {
  if (param < 1 || param > R) throw std::invalid_argument(to_string(kind) + ": parameter must lie in [1, R]");
  switch (kind) {
    case GenKind::LightTube:
      return light_tube(R, param);
    case GenKind::VerticalTube:
      return CubeMeasure(R, vertical_column(R, param, R / 2, R / 2));
    case GenKind::KnappPair: {
      std::vector<Cube> cubes = light_tube(R, param).cubes();
      if (param < R) {
        auto v = vertical_column(R, R - param, R / 4, R / 4);
        cubes.insert(cubes.end(), v.begin(), v.end());
      }
      return CubeMeasure(R, std::move(cubes));
    }
    case GenKind::WolffRadii: {
      // One cube per height level: one radius per delta-interval after rescaling.
      Rng rng(seed, 2);
      std::vector<int> levels(R);
      std::iota(levels.begin(), levels.end(), R);
      for (int i = 0; i < param; ++i) std::swap(levels[i], levels[i + rng.below(R - i)]);
      std::vector<Cube> cubes;
      for (int i = 0; i < param; ++i)
        cubes.push_back({static_cast<int>(rng.below(R)), static_cast<int>(rng.below(R)), levels[i]});
      return CubeMeasure(R, std::move(cubes));
    }
    case GenKind::RandomFrostman:
      return random_frostman_cubes(R, param, seed);
  }
  throw std::invalid_argument("generate: unknown kind");
}

CircleConfig wolff_radii_config(int n, double delta, std::uint64_t seed) {
  if (n < 1 || !(delta > 0.0)) throw std::invalid_argument("wolff_radii: need n >= 1 and delta > 0");
  Rng rng(seed, 3);
  const int m = std::max(1, static_cast<int>(std::ceil(2.0 * kAlpha0 / delta - 1e-9)));
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  const int take = std::min(n, m);
  for (int i = 0; i < take; ++i) std::swap(idx[i], idx[i + rng.below(m - i)]);
  std::sort(idx.begin(), idx.begin() + take);
  CircleConfig X;
  X.delta = delta;
  for (int i = 0; i < take; ++i) {
    const double lo = 1.0 - kAlpha0 + idx[i] * delta;
    const double hi = std::min(lo + delta, 1.0 + kAlpha0);
    const double x = rng.uniform(0.0, 2.0 * kAlpha0);
    const double y = rng.uniform(0.0, 2.0 * kAlpha0);
    X.circles.push_back({{x, y}, rng.uniform(lo, hi)});
  }
  return X;
}

CircleConfig random_frostman_config(int n, double delta, std::uint64_t seed) {
  if (n < 1 || !(delta > 0.0)) throw std::invalid_argument("random_frostman: need n >= 1 and delta > 0");
  Rng rng(seed, 4);
  const double side0 = 2.0 * kAlpha0;
  int levels = 0;
  while (side0 / std::ldexp(1.0, levels) > delta) ++levels;
  std::vector<std::unordered_map<std::uint64_t, int>> load(levels + 1);
  CircleConfig X;
  X.delta = delta;
  const std::int64_t attempts = 200LL * n;
  for (std::int64_t a = 0; a < attempts && static_cast<int>(X.circles.size()) < n; ++a) {
    const SpacetimePoint p{{rng.uniform(0.0, side0), rng.uniform(0.0, side0)}, 1.0 - kAlpha0 + rng.uniform(0.0, side0)};
    std::vector<std::uint64_t> keys(levels + 1);
    bool ok = true;
    for (int l = 0; l <= levels && ok; ++l) {
      const double side = side0 / std::ldexp(1.0, l);
      keys[l] = pack(static_cast<std::int64_t>(p.xp.x / side), static_cast<std::int64_t>(p.xp.y / side),
                     static_cast<std::int64_t>((p.x3 - 1.0 + kAlpha0) / side));
      const int cap = std::max(1, static_cast<int>(std::floor(4.0 * side / delta)));
      const auto it = load[l].find(keys[l]);
      ok = (it == load[l].end() ? 0 : it->second) < cap;
    }
    if (!ok) continue;
    for (int l = 0; l <= levels; ++l) ++load[l][keys[l]];
    X.circles.push_back(p);
  }
  return X;
}

void write_measure(std::ostream& os, const CubeMeasure& nu) {
  os << "R=" << nu.R() << '\n';
  for (const Cube& c : nu.cubes()) os << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
}

namespace {

// Reads leading key=value lines; returns the first data line (or empty).
std::map<std::string, std::string> read_header(std::istream& is, std::string& first) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      first = line;
      break;
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace

CubeMeasure read_measure(std::istream& is) {
  std::string first;
  auto kv = read_header(is, first);
  if (!kv.count("R")) throw std::invalid_argument("measure file: missing R= header");
  const int R = std::stoi(kv["R"]);
  std::vector<Cube> cubes;
  std::istringstream head(first);
  Cube c;
  if (!first.empty() && head >> c[0] >> c[1] >> c[2]) cubes.push_back(c);
  while (is >> c[0] >> c[1] >> c[2]) cubes.push_back(c);
  return CubeMeasure(R, std::move(cubes));
}

void write_circles(std::ostream& os, const CircleConfig& X) {
  char buf[128];
  os << "R=" << std::lround(2.0 * kAlpha0 / X.scale) << '\n';
  std::snprintf(buf, sizeof buf, "delta=%.17g\nscale=%.17g\n", X.delta, X.scale);
  os << buf;
  for (const auto& c : X.circles) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", c.xp.x, c.xp.y, c.x3);
    os << buf;
  }
}

CircleConfig read_circles(std::istream& is) {
  std::string first;
  auto kv = read_header(is, first);
  CircleConfig X;
  if (kv.count("scale")) X.scale = std::stod(kv["scale"]);
  if (kv.count("delta")) {
    X.delta = std::stod(kv["delta"]);
  } else if (kv.count("R")) {
    X.delta = 1.0 / std::stod(kv["R"]);
  } else {
    throw std::invalid_argument("circle file: missing R= or delta= header");
  }
  double x, y, r;
  std::istringstream head(first);
  if (!first.empty() && head >> x >> y >> r) X.circles.push_back({{x, y}, r});
  while (is >> x >> y >> r) X.circles.push_back({{x, y}, r});
  return X;
}

}  // namespace conelab
