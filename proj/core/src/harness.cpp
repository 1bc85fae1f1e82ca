#include "conelab/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "conelab/fourier.hpp"
#include "conelab/maximal.hpp"
#include "conelab/operator_duality.hpp"
#include "conelab/tangency.hpp"

#ifndef CONELAB_VERSION
#define CONELAB_VERSION "unknown"
#endif

namespace conelab {

ScalingFit fit_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("fit_exponent: need at least 3 points");
  ScalingFit f;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_exponent: nonpositive value");
    f.log_x.push_back(std::log(x[i]));
    f.log_y.push_back(std::log(y[i]));
  }
  const LineFit lf = least_squares(f.log_x, f.log_y);
  f.slope = lf.slope;
  f.intercept = lf.intercept;
  f.residual_max = lf.residual_max;
  return f;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string fnum(double v) { return format_number(v); }
std::string fint(std::int64_t v) { return std::to_string(v); }
std::string fbool(bool b) { return b ? "1" : "0"; }

}  // namespace

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw std::invalid_argument("CsvTable: row width differs from header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string s;
  const auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) s += ',';
      s += csv_escape(r[i]);
    }
    s += "\r\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return s;
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) throw std::out_of_range("CsvTable: no column " + name);
  const auto k = static_cast<std::size_t>(it - header_.begin());
  std::vector<double> v;
  for (const auto& r : rows_)
    if (!r[k].empty()) v.push_back(std::stod(r[k]));
  return v;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string svg_loglog(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<SvgSeries>& series) {
  constexpr double W = 720, H = 480, L = 80, Rm = 180, T = 40, B = 60;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                  "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
      x0 = std::min(x0, std::log10(s.x[i]));
      x1 = std::max(x1, std::log10(s.x[i]));
      y0 = std::min(y0, std::log10(s.y[i]));
      y1 = std::max(y1, std::log10(s.y[i]));
    }
  if (!(x1 >= x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  x0 = std::floor(x0 - 0.05), x1 = std::ceil(x1 + 0.05);
  y0 = std::floor(y0 - 0.05), y1 = std::ceil(y1 + 0.05);
  const auto px = [&](double lx) { return L + (lx - x0) / (x1 - x0) * (W - L - Rm); };
  const auto py = [&](double ly) { return H - B - (ly - y0) / (y1 - y0) * (H - T - B); };
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << xml_escape(title) << "</text>\n";
  o << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - Rm
    << "\" height=\"" << H - T - B << "\"/></g>\n";
  o << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int d = static_cast<int>(x0); d <= static_cast<int>(x1); ++d)
    o << "<line x1=\"" << fixed(px(d)) << "\" y1=\"" << H - B << "\" x2=\"" << fixed(px(d)) << "\" y2=\"" << H - B + 5
      << "\" stroke=\"black\"/><text x=\"" << fixed(px(d)) << "\" y=\"" << H - B + 18
      << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  for (int d = static_cast<int>(y0); d <= static_cast<int>(y1); ++d)
    o << "<line x1=\"" << L - 5 << "\" y1=\"" << fixed(py(d)) << "\" x2=\"" << L << "\" y2=\"" << fixed(py(d))
      << "\" stroke=\"black\"/><text x=\"" << L - 8 << "\" y=\"" << fixed(py(d) + 4)
      << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  o << "<text x=\"" << (L + W - Rm) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">" << xml_escape(x_label)
    << "</text>\n";
  o << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << (T + H - B) / 2 << ")\">" << xml_escape(y_label) << "</text>\n</g>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = palette[k % 10];
    o << "<g fill=\"" << col << "\" stroke=\"" << col << "\">\n";
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
      lx.push_back(std::log10(s.x[i]));
      ly.push_back(std::log10(s.y[i]));
      o << "<circle cx=\"" << fixed(px(lx.back())) << "\" cy=\"" << fixed(py(ly.back())) << "\" r=\"3\"/>\n";
    }
    if (s.draw_fit && lx.size() >= 2) {
      const LineFit f = least_squares(lx, ly);
      const double a = *std::min_element(lx.begin(), lx.end()), b = *std::max_element(lx.begin(), lx.end());
      o << "<line x1=\"" << fixed(px(a)) << "\" y1=\"" << fixed(py(f.intercept + f.slope * a)) << "\" x2=\""
        << fixed(px(b)) << "\" y2=\"" << fixed(py(f.intercept + f.slope * b)) << "\" stroke-width=\"1.5\"/>\n";
    }
    o << "<text x=\"" << W - Rm + 10 << "\" y=\"" << T + 14 + 16 * k
      << "\" font-family=\"sans-serif\" font-size=\"11\" stroke=\"none\">" << xml_escape(s.label) << "</text>\n</g>\n";
  }
  o << "</svg>\n";
  return o.str();
}

Experiment parse_experiment(const std::string& s) {
  if (s == "gen") return Experiment::Gen;
  if (s == "decay" || s == "decay-sweep") return Experiment::DecaySweep;
  if (s == "maximal" || s == "maximal-sweep") return Experiment::MaximalSweep;
  if (s == "pairs" || s == "pairs-sweep") return Experiment::PairsSweep;
  if (s == "sharpness") return Experiment::Sharpness;
  if (s == "sigma" || s == "sigma-decay") return Experiment::SigmaDecay;
  if (s == "duality" || s == "duality-check") return Experiment::DualityCheck;
  if (s == "all") return Experiment::All;
  throw ConfigError("experiment", "unknown experiment '" + s + "'");
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Gen: return "gen";
    case Experiment::DecaySweep: return "decay-sweep";
    case Experiment::MaximalSweep: return "maximal-sweep";
    case Experiment::PairsSweep: return "pairs-sweep";
    case Experiment::Sharpness: return "sharpness";
    case Experiment::SigmaDecay: return "sigma-decay";
    case Experiment::DualityCheck: return "duality-check";
    case Experiment::All: return "all";
  }
  return "unknown";
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  return out;
}

double parse_real(const std::string& field, const std::string& s) {
  try {
    // Accept 2^-k and p/q besides plain decimals.
    if (const auto c = s.find('^'); c != std::string::npos) return std::pow(std::stod(s.substr(0, c)), std::stod(s.substr(c + 1)));
    if (const auto c = s.find('/'); c != std::string::npos) return std::stod(s.substr(0, c)) / std::stod(s.substr(c + 1));
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "not a number: '" + s + "'");
  }
}

std::int64_t parse_int(const std::string& field, const std::string& s) {
  std::int64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError(field, "not an integer: '" + s + "'");
  return v;
}

bool parse_bool(const std::string& field, const std::string& s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigError(field, "not a boolean: '" + s + "'");
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

bool unit_scale(GenKind k) { return k == GenKind::WolffRadii || k == GenKind::RandomFrostman; }
bool seeded(GenKind k) { return unit_scale(k); }

template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + f(v[i]);
  return s;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (R.empty()) throw ConfigError("R", "empty list");
  for (int r : R) {
    if (!is_power_of_two(r) || r < 16 || r > 256) throw ConfigError("R", "each R must be a power of two in [16, 256]");
    if (r == 256 && !allow_256) throw ConfigError("R", "R = 256 needs allow_256");
  }
  for (double d : delta) {
    const double k = -std::log2(d);
    if (!(d > 0.0) || std::abs(k - std::round(k)) > 1e-9 || k < 4 || k > 10)
      throw ConfigError("delta", "each delta must be 2^-k with 4 <= k <= 10");
  }
  if (gens.empty()) throw ConfigError("gen", "empty list");
  if (kind == Experiment::MaximalSweep || kind == Experiment::PairsSweep) {
    if (delta.empty()) throw ConfigError("delta", "empty list");
    for (GenKind g : gens)
      if (!unit_scale(g)) throw ConfigError("gen", to_string(g) + " has no unit-scale circle family");
  }
  if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("eps", "need 0 < eps < 1/2");
  if (!(q >= 1.0)) throw ConfigError("q", "need q >= 1");
  for (double e : gamma_exp)
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("gamma_exp", "need exponents in [0, 1]");
  if (n < 1) throw ConfigError("n", "need n >= 1");
  if (!(lambda > 0.0)) throw ConfigError("lambda", "need lambda > 0");
  if (workers < 1) throw ConfigError("workers", "need at least one worker");
  if (out.empty()) throw ConfigError("out", "empty output directory");
  for (GenKind g : gens)
    if (kind != Experiment::MaximalSweep && kind != Experiment::PairsSweep)
      for (int r : R) (void)resolve_param(param, g, r);
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "experiment") {
    kind = parse_experiment(value);
  } else if (key == "R") {
    R.clear();
    for (const auto& s : split_list(value)) R.push_back(static_cast<int>(parse_int(key, s)));
  } else if (key == "delta") {
    delta.clear();
    for (const auto& s : split_list(value)) delta.push_back(parse_real(key, s));
  } else if (key == "gen") {
    gens.clear();
    for (const auto& s : split_list(value)) {
      try {
        gens.push_back(parse_gen_kind(s));
      } catch (const std::invalid_argument&) {
        throw ConfigError(key, "unknown generator '" + s + "'");
      }
    }
  } else if (key == "param") {
    param = value;
  } else if (key == "seeds" || key == "seed") {
    seeds.clear();
    for (const auto& s : split_list(value)) seeds.push_back(static_cast<std::uint64_t>(parse_int(key, s)));
  } else if (key == "eps") {
    eps = parse_real(key, value);
  } else if (key == "q") {
    q = parse_real(key, value);
  } else if (key == "gamma_exp") {
    gamma_exp.clear();
    for (const auto& s : split_list(value)) gamma_exp.push_back(parse_real(key, s));
  } else if (key == "n") {
    n = static_cast<int>(parse_int(key, value));
  } else if (key == "lambda") {
    lambda = parse_real(key, value);
  } else if (key == "main_geom") {
    main_geom = parse_bool(key, value);
  } else if (key == "allow_256") {
    allow_256 = parse_bool(key, value);
  } else if (key == "force") {
    force = parse_bool(key, value);
  } else if (key == "workers") {
    const auto w = parse_int(key, value);
    if (w < 1) throw ConfigError(key, "need at least one worker");
    workers = static_cast<unsigned>(w);
  } else if (key == "out") {
    out = value;
  } else {
    throw ConfigError(key, "unknown setting");
  }
}

std::string ExperimentConfig::echo() const {
  std::ostringstream o;
  o << "experiment=" << to_string(kind) << "\n"
    << "R=" << join(R, [](int v) { return std::to_string(v); }) << "\n"
    << "delta=" << join(delta, [](double v) { return format_number(v); }) << "\n"
    << "gen=" << join(gens, [](GenKind g) { return to_string(g); }) << "\n"
    << "param=" << param << "\n"
    << "seeds=" << join(seed_list(), [](std::uint64_t v) { return std::to_string(v); }) << "\n"
    << "eps=" << format_number(eps) << "\n"
    << "q=" << format_number(q) << "\n"
    << "gamma_exp=" << join(gamma_exp, [](double v) { return format_number(v); }) << "\n"
    << "n=" << n << "\n"
    << "lambda=" << format_number(lambda) << "\n"
    << "main_geom=" << fbool(main_geom) << "\n"
    << "allow_256=" << fbool(allow_256) << "\n"
    << "force=" << fbool(force) << "\n"
    << "workers=" << workers << "\n"
    << "out=" << out << "\n";
  return o.str();
}

ExperimentConfig read_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const auto eq = line.find('=');
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) throw ConfigError("config", "expected key=value, got '" + trim(line) + "'");
    base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

int resolve_param(const std::string& rule, GenKind kind, int R) {
  std::string r = rule;
  if (r == "auto") r = kind == GenKind::KnappPair ? "sqrtR" : kind == GenKind::WolffRadii ? "R/2" : "R";
  int v = 0;
  if (r == "R") {
    v = R;
  } else if (r == "sqrtR") {
    v = static_cast<int>(std::lround(std::sqrt(static_cast<double>(R))));
  } else if (r.rfind("R/", 0) == 0) {
    v = static_cast<int>(R / parse_int("param", r.substr(2)));
  } else {
    v = static_cast<int>(parse_int("param", r));
  }
  if (v < 1 || v > R) throw ConfigError("param", "rule '" + rule + "' gives " + std::to_string(v) + " outside [1, R]");
  return v;
}

namespace {

double nodes_at(double lambda, double q, double width = kTwoPi) {
  const auto c = ConeQuadrature::for_scale(lambda, q, 0.0, width);
  return static_cast<double>(c.size());
}

int gamma_for(int R, double e) {
  return std::clamp(static_cast<int>(std::lround(std::pow(static_cast<double>(R), e))), 1, R);
}

}  // namespace

double estimate_kernel_evals(const ExperimentConfig& cfg) {
  double total = 0.0;
  switch (cfg.kind) {
    case Experiment::DecaySweep:
      for (GenKind g : cfg.gens)
        for (int R : cfg.R) {
          const double seeds = seeded(g) ? static_cast<double>(cfg.seed_list().size()) : 1.0;
          // The doubling self-check costs four times the base sum.
          total += 5.0 * seeds * nodes_at(decay_scale(R), cfg.q) * R;
        }
      break;
    case Experiment::Sharpness:
      for (int R : cfg.R)
        for (double e : cfg.gamma_exp) {
          const int gamma = gamma_for(R, e);
          total += nodes_at(decay_scale(R), cfg.q, 1.0 / std::sqrt(gamma)) * 64.0 * (gamma + R);
        }
      break;
    case Experiment::SigmaDecay:
      total = 5.0 * nodes_at(cfg.lambda, cfg.q) * 12.0;
      break;
    case Experiment::DualityCheck:
      total = static_cast<double>(cfg.R.size() * cfg.gens.size() * cfg.seed_list().size()) * kMaxOperatorRows *
              kMaxOperatorCols;
      break;
    case Experiment::All: {
      for (Experiment e : {Experiment::DecaySweep, Experiment::Sharpness, Experiment::SigmaDecay, Experiment::DualityCheck}) {
        ExperimentConfig c = cfg;
        c.kind = e;
        total += estimate_kernel_evals(c);
      }
      break;
    }
    default:
      break;
  }
  return total;
}

namespace {

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::vector<std::uint64_t> seeds_for(const ExperimentConfig& cfg, GenKind g) {
  return seeded(g) ? cfg.seed_list() : std::vector<std::uint64_t>{cfg.seed_list().front()};
}

CircleConfig unit_config(GenKind g, int n, double delta, std::uint64_t seed) {
  return g == GenKind::WolffRadii ? wolff_radii_config(n, delta, seed) : random_frostman_config(n, delta, seed);
}

void fit_row(CsvTable& fits, std::vector<std::string> key, const std::vector<double>& x, const std::vector<double>& y,
             double& worst_slope) {
  if (x.size() < 3) return;
  std::vector<double> px, py;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (y[i] > 0.0) px.push_back(x[i]), py.push_back(y[i]);
  if (px.size() < 3) return;
  const ScalingFit f = fit_exponent(px, py);
  key.insert(key.end(), {fint(static_cast<std::int64_t>(px.size())), fnum(f.slope), fnum(f.intercept), fnum(f.residual_max)});
  fits.add(std::move(key));
  worst_slope = std::max(worst_slope, f.slope);
}

}  // namespace

PipelineOutput run_decay_sweep(const ExperimentConfig& cfg) {
  Stopwatch sw;
  PipelineOutput out;
  CsvTable t({"gen", "param_rule", "param", "seed", "R", "mass", "P_lower", "P_upper", "decay_mean", "decay_refined",
              "rel_change", "ratio", "under_resolved"});
  CsvTable fits({"gen", "param_rule", "seed", "points", "slope", "intercept", "residual_max"});
  std::vector<SvgSeries> series;
  double max_slope = -std::numeric_limits<double>::infinity(), max_ratio = 0.0, max_rel = 0.0;
  bool under = false;
  for (GenKind g : cfg.gens)
    for (std::uint64_t seed : seeds_for(cfg, g)) {
      std::vector<double> xs, ys;
      for (int R : cfg.R) {
        const int p = resolve_param(cfg.param, g, R);
        const CubeMeasure nu = generate(g, R, p, seed);
        const PlankBracket pb = max_plank_mass(nu);
        const DecayMean dm = decay_mean(nu, ConeQuadrature::for_scale(decay_scale(R), cfg.q), true);
        const double mass = static_cast<double>(nu.mass());
        const double ratio = dm.value / (std::sqrt(pb.lower) * mass);
        t.add({to_string(g), cfg.param, fint(p), fint(static_cast<std::int64_t>(seed)), fint(R), fnum(mass),
               fnum(pb.lower), fnum(pb.upper), fnum(dm.value), fnum(dm.refined), fnum(dm.rel_change), fnum(ratio),
               fbool(dm.under_resolved)});
        xs.push_back(R);
        ys.push_back(ratio);
        max_ratio = std::max(max_ratio, ratio);
        max_rel = std::max(max_rel, dm.rel_change);
        under = under || dm.under_resolved;
      }
      fit_row(fits, {to_string(g), cfg.param, fint(static_cast<std::int64_t>(seed))}, xs, ys, max_slope);
      series.push_back({to_string(g) + " s" + std::to_string(seed), xs, ys, xs.size() >= 3});
    }
  out.svgs["decay"] = svg_loglog("decay mean / (P^1/2 mass)", "R", "ratio", series);
  out.svgs["decay_fit"] = svg_loglog("decay ratio with fitted exponents", "R", "ratio", series);
  out.tables.emplace("decay", std::move(t));
  out.tables.emplace("decay_fit", std::move(fits));
  out.summary["max_slope"] = max_slope;
  out.summary["max_ratio"] = max_ratio;
  out.summary["max_rel_change"] = max_rel;
  out.summary["under_resolved"] = under ? 1.0 : 0.0;
  out.wall_seconds["decay-sweep"] = sw.seconds();
  return out;
}

PipelineOutput run_maximal_sweep(const ExperimentConfig& cfg) {
  Stopwatch sw;
  PipelineOutput out;
  CsvTable t({"gen", "n", "seed", "delta", "circles", "frostman", "g_norm", "ratio_integral", "ratio_discrete"});
  CsvTable fits({"gen", "n", "seed", "points", "slope", "intercept", "residual_max"});
  std::vector<SvgSeries> series;
  double max_slope = -std::numeric_limits<double>::infinity();
  for (GenKind g : cfg.gens)
    for (std::uint64_t seed : cfg.seed_list()) {
      std::vector<double> xs, ys;
      for (double delta : cfg.delta) {
        const CircleConfig X = unit_config(g, cfg.n, delta, seed);
        const WolffReport rep = wolff_example_check(X);
        t.add({to_string(g), fint(cfg.n), fint(static_cast<std::int64_t>(seed)), fnum(delta), fint(static_cast<std::int64_t>(rep.circles)),
               fnum(frostman_constant(X)), fnum(rep.g_norm), fnum(rep.ratio_integral), fnum(rep.ratio_discrete)});
        xs.push_back(1.0 / delta);
        ys.push_back(rep.ratio_integral);
      }
      fit_row(fits, {to_string(g), fint(cfg.n), fint(static_cast<std::int64_t>(seed))}, xs, ys, max_slope);
      series.push_back({to_string(g) + " s" + std::to_string(seed), xs, ys, xs.size() >= 3});
    }
  out.svgs["maximal"] = svg_loglog("||g||_3/2 / (delta |X|)^2/3", "1/delta", "ratio", series);
  out.svgs["maximal_fit"] = svg_loglog("maximal ratio with fitted exponents", "1/delta", "ratio", series);
  out.tables.emplace("maximal", std::move(t));
  out.tables.emplace("maximal_fit", std::move(fits));
  out.summary["max_slope"] = max_slope;
  out.wall_seconds["maximal-sweep"] = sw.seconds();
  return out;
}

PipelineOutput run_pairs_sweep(const ExperimentConfig& cfg) {
  Stopwatch sw;
  PipelineOutput out;
  CsvTable t({"gen", "n", "seed", "delta", "eps", "D", "pairs", "gamma", "bound", "ratio"});
  CsvTable mg({"gen", "n", "seed", "delta", "tau", "A", "candidates", "kept", "M", "rects", "value"});
  CsvTable sum({"gen", "n", "seed", "delta", "circles", "max_ratio", "ceiling", "main_geom_max", "main_geom_ceiling",
                "log_power", "eps_power"});
  std::vector<SvgSeries> series, mg_series;
  double worst = 0.0, worst_mg = 0.0;
  for (GenKind g : cfg.gens)
    for (std::uint64_t seed : cfg.seed_list())
      for (double delta : cfg.delta) {
        const CircleConfig X = unit_config(g, cfg.n, delta, seed);
        const std::string sd = fint(static_cast<std::int64_t>(seed));
        const PairCountReport rep = pair_count_bound_check(X, cfg.eps);
        SvgSeries s{to_string(g) + " s" + sd + " d" + fnum(delta), {}, {}, false};
        for (const auto& row : rep.rows) {
          t.add({to_string(g), fint(cfg.n), sd, fnum(delta), fnum(cfg.eps), fnum(row.D), fint(row.pairs),
                 fint(row.gamma), fnum(row.bound), fnum(row.ratio)});
          s.x.push_back(row.D);
          s.y.push_back(row.ratio);
        }
        series.push_back(std::move(s));
        const double L = std::log2(1.0 / delta);
        const double ceiling = 32.0 * L * L * L;
        worst = std::max(worst, rep.max_ratio / ceiling);
        MainGeomReport m;
        const double tau = std::sqrt(delta);
        const double A = std::pow(delta, -cfg.eps);
        if (cfg.main_geom) {
          m = main_geom_check(X, tau, A);
          SvgSeries ms{to_string(g) + " s" + sd + " d" + fnum(delta), {}, {}, false};
          for (const auto& row : m.rows) {
            mg.add({to_string(g), fint(cfg.n), sd, fnum(delta), fnum(tau), fnum(A), fint(static_cast<std::int64_t>(m.candidates)),
                    fint(static_cast<std::int64_t>(m.kept)), fint(row.M), fint(row.rects), fnum(row.value)});
            ms.x.push_back(static_cast<double>(row.M));
            ms.y.push_back(row.value);
          }
          mg_series.push_back(std::move(ms));
          worst_mg = std::max(worst_mg, m.max_value / (64.0 * L * L * L));
        }
        sum.add({to_string(g), fint(cfg.n), sd, fnum(delta), fint(static_cast<std::int64_t>(X.circles.size())),
                 fnum(rep.max_ratio), fnum(ceiling), cfg.main_geom ? fnum(m.max_value) : "",
                 cfg.main_geom ? fnum(64.0 * L * L * L) : "", cfg.main_geom ? fnum(m.log_power) : "",
                 cfg.main_geom ? fnum(m.eps_power) : ""});
      }
  out.svgs["pairs"] = svg_loglog("|L_D| / bound per D-band", "D", "ratio", series);
  out.svgs["main_geom"] = svg_loglog("M^3/2 |R_M| tau / |X|", "M", "value", mg_series);
  std::vector<SvgSeries> sum_series;
  out.svgs["pairs_summary"] = svg_loglog("pair-count maxima", "1/delta", "max ratio", [&] {
    SvgSeries s{"max ratio", {}, {}, false};
    for (const auto& r : sum.rows()) {
      s.x.push_back(1.0 / std::stod(r[3]));
      s.y.push_back(std::stod(r[5]));
    }
    return std::vector<SvgSeries>{s};
  }());
  out.tables.emplace("pairs", std::move(t));
  out.tables.emplace("main_geom", std::move(mg));
  out.tables.emplace("pairs_summary", std::move(sum));
  out.summary["max_ratio_over_ceiling"] = worst;
  out.summary["main_geom_over_ceiling"] = worst_mg;
  out.wall_seconds["pairs-sweep"] = sw.seconds();
  return out;
}

CubeMeasure knapp_pair_measure(int R, int gamma, Vec2 e_planar) {
  std::vector<Cube> cubes = light_tube(R, gamma, -1.0 * e_planar).cubes();
  const int L = R - gamma;
  const int z0 = R + (R - L) / 2;
  for (int k = 0; k < L; ++k) cubes.push_back({R / 4, R / 4, z0 + k});
  return CubeMeasure(R, std::move(cubes));
}

PipelineOutput run_sharpness(const ExperimentConfig& cfg) {
  Stopwatch sw;
  PipelineOutput out;
  CsvTable t({"R", "gamma_exp", "gamma", "measure", "mass", "P_lower", "norm_sq", "sector_area", "integral", "ratio",
              "center_ratio"});
  CsvTable fits({"measure", "gamma_exp", "points", "slope", "intercept", "residual_max"});
  std::map<std::pair<std::string, double>, std::pair<std::vector<double>, std::vector<double>>> curves;
  double tube_min = std::numeric_limits<double>::infinity(), tube_max = 0.0, pair_min = tube_min, pair_max = 0.0;
  for (int R : cfg.R)
    for (double e : cfg.gamma_exp) {
      const int gamma = gamma_for(R, e);
      const Knapp k = knapp(gamma, R, cfg.q);
      const double nf = k.f.l2_norm_sq(k.quad);
      const double sector = k.quad.mass();
      // |Ef| at the packet centre relative to sigma(theta).
      const double center = std::abs(extension(k.f, k.P.center, k.quad)) / nf;
      for (const std::string name : {"light_tube", "knapp_pair"}) {
        const CubeMeasure nu = name == "light_tube" ? knapp_tube(k, R, gamma) : knapp_pair_measure(R, gamma, k.e_planar);
        const double I = weighted_l2(k.f, nu, k.quad, 4);
        const double ratio = I / (std::sqrt(static_cast<double>(gamma)) * nf);
        t.add({fint(R), fnum(e), fint(gamma), name, fint(static_cast<std::int64_t>(nu.mass())),
               fnum(max_plank_mass(nu).lower), fnum(nf), fnum(sector), fnum(I), fnum(ratio), fnum(center)});
        auto& c = curves[{name, e}];
        c.first.push_back(R);
        c.second.push_back(ratio);
        if (name == "light_tube") {
          tube_min = std::min(tube_min, ratio);
          tube_max = std::max(tube_max, ratio);
        } else {
          pair_min = std::min(pair_min, ratio);
          pair_max = std::max(pair_max, ratio);
        }
      }
    }
  double tube_slope = 0.0, pair_slope = 0.0;
  std::vector<SvgSeries> series;
  for (const auto& [key, c] : curves) {
    double worst = -std::numeric_limits<double>::infinity();
    CsvTable tmp({"a", "b", "points", "slope", "intercept", "residual_max"});
    fit_row(tmp, {key.first, fnum(key.second)}, c.first, c.second, worst);
    for (const auto& r : tmp.rows()) {
      fits.add(r);
      const double s = std::abs(std::stod(r[3]));
      (key.first == "light_tube" ? tube_slope : pair_slope) = std::max(key.first == "light_tube" ? tube_slope : pair_slope, s);
    }
    series.push_back({key.first + " e=" + fnum(key.second), c.first, c.second, c.first.size() >= 3});
  }
  out.svgs["sharpness"] = svg_loglog("Knapp ratio int|Ef|^2 dnu / (gamma^1/2 ||f||^2)", "R", "ratio", series);
  out.svgs["sharpness_fit"] = svg_loglog("Knapp ratio with fitted exponents", "R", "ratio", series);
  out.tables.emplace("sharpness", std::move(t));
  out.tables.emplace("sharpness_fit", std::move(fits));
  out.summary["tube_min_ratio"] = tube_min;
  out.summary["tube_max_ratio"] = tube_max;
  out.summary["tube_max_abs_slope"] = tube_slope;
  out.summary["pair_min_ratio"] = pair_min;
  out.summary["pair_max_ratio"] = pair_max;
  out.summary["pair_max_abs_slope"] = pair_slope;
  out.wall_seconds["sharpness"] = sw.seconds();
  return out;
}

PipelineOutput run_sigma_decay(const ExperimentConfig& cfg) {
  Stopwatch sw;
  PipelineOutput out;
  const auto quad = ConeQuadrature::for_scale(cfg.lambda, cfg.q);
  const StationaryPhaseReport rep = stationary_phase_diagnostic(quad);
  CsvTable t({"series", "radius", "cone_distance", "value", "reference", "rel_change"});
  for (std::size_t i = 0; i < rep.on_radius.size(); ++i)
    t.add({"on_cone", fnum(rep.on_radius[i]), "0", fnum(rep.on_value[i]), "", fnum(rep.on_rel_change[i])});
  for (std::size_t i = 0; i < rep.off_distance.size(); ++i)
    t.add({"off_cone", fnum(StationaryPhaseSpec{}.off_radius), fnum(rep.off_distance[i]), fnum(rep.off_value[i]), "",
           fnum(rep.off_rel_change[i])});
  t.add({"axis", fnum(rep.axis_t), fnum(cone_distance({{0.0, 0.0}, rep.axis_t})), fnum(rep.axis_quadrature),
         fnum(rep.axis_reference), fnum(rep.axis_rel_change)});
  CsvTable s({"lambda", "q", "nodes", "on_slope", "off_ratio_far", "max_rel_change", "axis_abs_error"});
  const double axis_err = std::abs(rep.axis_quadrature - rep.axis_reference);
  s.add({fnum(cfg.lambda), fnum(cfg.q), fint(static_cast<std::int64_t>(quad.size())), fnum(rep.on_slope),
         fnum(rep.off_ratio_far), fnum(rep.max_rel_change), fnum(axis_err)});
  std::vector<double> dx, dy;
  for (std::size_t i = 0; i < rep.off_distance.size(); ++i)
    if (rep.off_distance[i] > 0.0) dx.push_back(rep.off_distance[i]), dy.push_back(rep.off_value[i]);
  out.svgs["sigma"] = svg_loglog("|sigma-check| on and off the cone", "|x| or cone distance", "modulus",
                                 {{"on cone vs |x|", rep.on_radius, rep.on_value, true}, {"off cone vs distance", dx, dy, false}});
  out.svgs["sigma_fit"] = svg_loglog("on-cone decay fit", "|x|", "modulus", {{"on cone", rep.on_radius, rep.on_value, true}});
  out.tables.emplace("sigma", std::move(t));
  out.tables.emplace("sigma_fit", std::move(s));
  out.summary["on_slope"] = rep.on_slope;
  out.summary["off_ratio_far"] = rep.off_ratio_far;
  out.summary["max_rel_change"] = rep.max_rel_change;
  out.summary["axis_abs_error"] = axis_err;
  out.summary["under_resolved"] = rep.max_rel_change >= kSelfCheckTol ? 1.0 : 0.0;
  out.wall_seconds["sigma-decay"] = sw.seconds();
  return out;
}

PipelineOutput run_duality_check(const ExperimentConfig& cfg) {
  Stopwatch sw;
  PipelineOutput out;
  CsvTable t({"R", "seed", "gen", "param", "rows", "cols", "full_nodes", "m", "U_L2_lower", "U_L2_upper", "U_L1", "ratio",
              "lambda_star", "level_factor", "level_bound_holds", "iterate_rel_gap", "P_upper", "opnorm_sq_over_sqrtP"});
  CsvTable tr({"R", "seed", "gen", "h", "mass", "mass_h", "P_upper", "P_upper_h", "l1_max_gap", "ok"});
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0, gap = 0.0, opn = 0.0;
  bool trans_ok = true, level_ok = true;
  std::vector<SvgSeries> series;
  for (GenKind g : cfg.gens)
    for (std::uint64_t seed : seeds_for(cfg, g)) {
      SvgSeries s{to_string(g) + " s" + std::to_string(seed), {}, {}, false};
      for (int R : cfg.R) {
        const int p = resolve_param(cfg.param, g, R);
        const CubeMeasure nu = generate(g, R, p, seed);
        const DiscreteExtensionOperator E(nu, ConeQuadrature::for_scale(decay_scale(R), cfg.q));
        const BbcrReport b = bbcr_equivalence_check(E, mix_seed(seed, 7));
        // The iterate as a function on the nodes, then the independent weighted_l2 route.
        const NormBracket nb = operator_norm(E, 1e-8, 10000, mix_seed(seed, 7));
        SpectralFunction f;
        f.values.resize(E.cols());
        for (int j = 0; j < E.quad().n_phi; ++j)
          for (int k = 0; k < E.quad().n_rho; ++k) {
            const double wa = E.quad().weight(k) * bump_density(E.quad().rho(k));
            const auto i = E.quad().index(j, k);
            f.values[i] = wa > 0.0 ? nb.vector[i] / std::sqrt(wa) : cplx(0.0, 0.0);
          }
        const double wl2 = weighted_l2(f, nu, E.quad(), E.m());
        const double rel_gap = std::abs(wl2 - nb.lower) / nb.lower;
        const double P = max_plank_mass(nu).upper;
        const double on = nb.lower / std::sqrt(P);
        t.add({fint(R), fint(static_cast<std::int64_t>(seed)), to_string(g), fint(p), fint(static_cast<std::int64_t>(E.rows())),
               fint(static_cast<std::int64_t>(E.cols())), fint(static_cast<std::int64_t>(E.full_nodes())), fint(E.m()),
               fnum(b.u_l2), fnum(b.u_l2_upper), fnum(b.u_l1), fnum(b.ratio), fnum(b.level.lambda_star),
               fnum(b.level.factor), fbool(b.level.bound_holds), fnum(rel_gap), fnum(P), fnum(on)});
        rmin = std::min(rmin, b.ratio);
        rmax = std::max(rmax, b.ratio);
        gap = std::max(gap, rel_gap);
        opn = std::max(opn, on);
        level_ok = level_ok && b.level.bound_holds;
        s.x.push_back(R);
        s.y.push_back(b.ratio);
        Rng rng(seed, 11);
        std::vector<double> one(nu.mass(), 1.0), zero(nu.mass(), 0.0), half(nu.mass(), 0.0), frac(nu.mass());
        std::vector<std::size_t> idx(nu.mass());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i + 1 < idx.size(); ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
        for (std::size_t i = 0; i < idx.size() / 2; ++i) half[idx[i]] = 1.0;
        for (auto& v : frac) v = rng.uniform();
        const std::vector<std::string> names{"one", "zero", "half", "uniform"};
        const auto rows = transference_check(nu, E, {one, zero, half, frac}, 20, mix_seed(seed, 13));
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const auto& r = rows[i];
          tr.add({fint(R), fint(static_cast<std::int64_t>(seed)), to_string(g), names[i], fnum(r.mass), fnum(r.mass_h),
                  fnum(r.plank), fnum(r.plank_h), fnum(r.l1_max_gap), fbool(r.ok)});
          trans_ok = trans_ok && r.ok;
        }
      }
      series.push_back(std::move(s));
    }
  out.svgs["duality"] = svg_loglog("U_L2 / (U_L1 / mass^1/2)", "R", "ratio", series);
  std::vector<SvgSeries> ts;
  {
    SvgSeries s{"mass_h / mass", {}, {}, false};
    for (const auto& r : tr.rows())
      if (std::stod(r[4]) > 0.0 && std::stod(r[5]) > 0.0) {
        s.x.push_back(std::stod(r[0]));
        s.y.push_back(std::stod(r[5]) / std::stod(r[4]));
      }
    ts.push_back(s);
  }
  out.svgs["transference"] = svg_loglog("sub-measure mass fractions", "R", "fraction", ts);
  out.tables.emplace("duality", std::move(t));
  out.tables.emplace("transference", std::move(tr));
  out.summary["min_ratio"] = rmin;
  out.summary["max_ratio"] = rmax;
  out.summary["max_iterate_rel_gap"] = gap;
  out.summary["max_opnorm_sq_over_sqrtP"] = opn;
  out.summary["transference_ok"] = trans_ok ? 1.0 : 0.0;
  out.summary["level_bound_holds"] = level_ok ? 1.0 : 0.0;
  out.wall_seconds["duality-check"] = sw.seconds();
  return out;
}

PipelineOutput run_gen(const ExperimentConfig& cfg) {
  Stopwatch sw;
  PipelineOutput out;
  CsvTable t({"gen", "R", "param", "seed", "mass", "frostman", "P_lower", "P_upper", "measure_file", "circles_file"});
  std::vector<SvgSeries> series;
  for (GenKind g : cfg.gens)
    for (std::uint64_t seed : seeds_for(cfg, g)) {
      SvgSeries s{to_string(g) + " s" + std::to_string(seed), {}, {}, true};
      for (int R : cfg.R) {
        const int p = resolve_param(cfg.param, g, R);
        const CubeMeasure nu = generate(g, R, p, seed);
        const std::string stem = to_string(g) + "_R" + std::to_string(R) + "_p" + std::to_string(p) + "_s" + std::to_string(seed);
        std::ostringstream ms, cs;
        write_measure(ms, nu);
        write_circles(cs, rescale_to_Q(nu));
        out.files[stem + ".measure"] = ms.str();
        out.files[stem + ".circles"] = cs.str();
        const PlankBracket pb = max_plank_mass(nu);
        t.add({to_string(g), fint(R), fint(p), fint(static_cast<std::int64_t>(seed)), fint(static_cast<std::int64_t>(nu.mass())),
               fnum(nu.frostman()), fnum(pb.lower), fnum(pb.upper), stem + ".measure", stem + ".circles"});
        s.x.push_back(R);
        s.y.push_back(pb.lower);
      }
      series.push_back(std::move(s));
    }
  out.svgs["gen"] = svg_loglog("plank mass P_lower of generated measures", "R", "P_lower", series);
  out.tables.emplace("gen", std::move(t));
  out.wall_seconds["gen"] = sw.seconds();
  return out;
}

PipelineOutput compute_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  set_workers(cfg.workers);
  switch (cfg.kind) {
    case Experiment::Gen: return run_gen(cfg);
    case Experiment::DecaySweep: return run_decay_sweep(cfg);
    case Experiment::MaximalSweep: return run_maximal_sweep(cfg);
    case Experiment::PairsSweep: return run_pairs_sweep(cfg);
    case Experiment::Sharpness: return run_sharpness(cfg);
    case Experiment::SigmaDecay: return run_sigma_decay(cfg);
    case Experiment::DualityCheck: return run_duality_check(cfg);
    case Experiment::All: break;
  }
  PipelineOutput all;
  for (Experiment e : {Experiment::Gen, Experiment::DecaySweep, Experiment::MaximalSweep, Experiment::PairsSweep,
                       Experiment::Sharpness, Experiment::SigmaDecay, Experiment::DualityCheck}) {
    ExperimentConfig c = cfg;
    c.kind = e;
    if (e == Experiment::MaximalSweep || e == Experiment::PairsSweep) {
      c.gens.erase(std::remove_if(c.gens.begin(), c.gens.end(), [](GenKind g) { return !unit_scale(g); }), c.gens.end());
      if (c.gens.empty()) c.gens = {GenKind::WolffRadii, GenKind::RandomFrostman};
    }
    PipelineOutput p = compute_experiment(c);
    const std::string prefix = to_string(e) + "/";
    for (auto& [k, v] : p.tables) all.tables.emplace(prefix + k, std::move(v));
    for (auto& [k, v] : p.svgs) all.svgs[prefix + k] = std::move(v);
    for (auto& [k, v] : p.files) all.files[prefix + k] = std::move(v);
    for (auto& [k, v] : p.summary) all.summary[to_string(e) + "." + k] = v;
    for (auto& [k, v] : p.wall_seconds) all.wall_seconds[k] = v;
  }
  return all;
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& contents) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream o(p, std::ios::binary);
  if (!o) throw std::runtime_error("cannot write " + p.string());
  o << contents;
}

}  // namespace

std::vector<std::string> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const double evals = estimate_kernel_evals(cfg);
  if (evals > kKernelBudget && !cfg.force)
    throw ConfigError("force", "estimated " + format_number(evals) + " kernel evaluations exceed the budget of 1e9");
  const std::filesystem::path dir(cfg.out);
  const PipelineOutput p = compute_experiment(cfg);
  std::vector<std::string> written;
  for (const auto& [stem, table] : p.tables) {
    write_file(dir / (stem + ".csv"), table.str());
    written.push_back((dir / (stem + ".csv")).string());
    const auto it = p.svgs.find(stem);
    if (it != p.svgs.end()) {
      write_file(dir / (stem + ".svg"), it->second);
      written.push_back((dir / (stem + ".svg")).string());
    }
  }
  for (const auto& [name, contents] : p.files) {
    write_file(dir / name, contents);
    written.push_back((dir / name).string());
  }
  std::ostringstream m;
  m << "version=" << CONELAB_VERSION << "\n"
    << "compiler=" << __VERSION__ << "\n"
    << "cxx_standard=" << __cplusplus << "\n"
    << "estimated_kernel_evals=" << format_number(evals) << "\n"
    << cfg.echo();
  for (const auto& [k, v] : p.summary) m << "summary." << k << "=" << format_number(v) << "\n";
  for (const auto& [k, v] : p.wall_seconds) m << "wall_seconds." << k << "=" << format_number(v) << "\n";
  for (const auto& f : written) m << "file=" << f << "\n";
  const auto ur = std::find_if(p.summary.begin(), p.summary.end(), [](const auto& kv) {
    return kv.first.size() >= 14 && kv.first.compare(kv.first.size() - 14, 14, "under_resolved") == 0 && kv.second > 0.0;
  });
  m << "under_resolved=" << (ur != p.summary.end() ? 1 : 0) << "\n";
  write_file(dir / "manifest.txt", m.str());
  written.push_back((dir / "manifest.txt").string());
  if (ur != p.summary.end()) throw UnderResolved("quadrature self-check failed (" + ur->first + "); see manifest.txt");
  return written;
}

}  // namespace conelab
