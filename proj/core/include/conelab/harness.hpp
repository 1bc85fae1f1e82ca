#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "conelab/measures.hpp"

namespace conelab {

struct ScalingFit {
  std::vector<double> log_x;
  std::vector<double> log_y;
  double slope = 0.0;
  double intercept = 0.0;
  double residual_max = 0.0;
};

/// Least squares of log y against log x; throws std::invalid_argument for fewer than 3 points or
/// a nonpositive coordinate.
ScalingFit fit_exponent(const std::vector<double>& x, const std::vector<double>& y);

/// Shortest round-trip decimal rendering, so reruns print identical bytes.
std::string format_number(double v);
std::string csv_escape(const std::string& field);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::string str() const;
  /// Column by name as numbers; empty fields are skipped.
  std::vector<double> column(const std::string& name) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool draw_fit = false;
};

/// Self-contained SVG 1.1 log-log scatter, with least-squares lines for series that ask for them.
std::string svg_loglog(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<SvgSeries>& series);

enum class Experiment { Gen, DecaySweep, MaximalSweep, PairsSweep, Sharpness, SigmaDecay, DualityCheck, All };

Experiment parse_experiment(const std::string& s);
std::string to_string(Experiment e);

/// Raised on invalid configurations; field names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& why)
      : std::invalid_argument(field + ": " + why), field(field) {}
  std::string field;
};

/// Raised when a quadrature self-check fails; the run manifest records it before the throw.
class UnderResolved : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  Experiment kind = Experiment::DecaySweep;
  std::vector<int> R{16, 32, 64};
  std::vector<double> delta{1.0 / 32, 1.0 / 64, 1.0 / 128};
  std::vector<GenKind> gens{GenKind::LightTube};
  /// Generator parameter rule: "auto", "R", "sqrtR", "R/<k>" or an integer.
  std::string param = "auto";
  std::vector<std::uint64_t> seeds;  // empty means {0}
  double eps = 0.01;
  double q = 8.0;
  /// Exponents e with gamma = round(R^e) for the sharpness pipeline.
  std::vector<double> gamma_exp{0.5, 1.0};
  /// Circle count for unit-scale families.
  int n = 256;
  /// Resolution scale of the sigma-decay pipeline.
  double lambda = 300.0;
  bool main_geom = true;
  bool allow_256 = false;
  bool force = false;
  unsigned workers = 1;
  std::string out = "out";

  std::vector<std::uint64_t> seed_list() const { return seeds.empty() ? std::vector<std::uint64_t>{0} : seeds; }
  /// Throws ConfigError naming the first bad field.
  void validate() const;
  /// Applies one key=value setting; throws ConfigError for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// Flat key=value echo, one setting per line.
  std::string echo() const;
};

/// Reads key=value lines ('#' starts a comment) on top of base.
ExperimentConfig read_config(const std::string& path, ExperimentConfig base = {});

int resolve_param(const std::string& rule, GenKind kind, int R);

inline constexpr double kKernelBudget = 1e9;
/// Up-front count of node x point kernel evaluations for the configured pipeline.
double estimate_kernel_evals(const ExperimentConfig& cfg);

struct PipelineOutput {
  std::map<std::string, CsvTable> tables;    // file stem -> table
  std::map<std::string, double> summary;     // named scalars for reports and acceptance
  std::map<std::string, double> wall_seconds;
  std::map<std::string, std::string> svgs;   // file stem -> figure for the table of that stem
  std::map<std::string, std::string> files;  // extra files: name -> contents
};

PipelineOutput run_decay_sweep(const ExperimentConfig& cfg);
PipelineOutput run_maximal_sweep(const ExperimentConfig& cfg);
PipelineOutput run_pairs_sweep(const ExperimentConfig& cfg);
PipelineOutput run_sharpness(const ExperimentConfig& cfg);
PipelineOutput run_sigma_decay(const ExperimentConfig& cfg);
PipelineOutput run_duality_check(const ExperimentConfig& cfg);
PipelineOutput run_gen(const ExperimentConfig& cfg);

/// Runs the pipeline (after the budget guard), writes <stem>.csv and <stem>.svg per table and
/// manifest.txt into cfg.out. Returns the written file paths.
std::vector<std::string> run_experiment(const ExperimentConfig& cfg);
/// The pipeline alone, no files.
PipelineOutput compute_experiment(const ExperimentConfig& cfg);

/// The Knapp-pair measure aligned with a Knapp packet: its light tube plus a vertical column of R - gamma cubes.
CubeMeasure knapp_pair_measure(int R, int gamma, Vec2 e_planar);

}  // namespace conelab
