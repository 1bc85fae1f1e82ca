#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "conelab/harness.hpp"

using namespace conelab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig small_decay() {
  ExperimentConfig c;
  c.kind = Experiment::DecaySweep;
  c.R = {16, 32};
  c.gens = {GenKind::LightTube, GenKind::VerticalTube};
  c.q = 1.0;
  return c;
}

}  // namespace

TEST(FitExponent, ExactPowersAndNoise) {
  const std::vector<double> x{2, 4, 8, 16, 32};
  std::vector<double> y, c, n;
  Rng rng(1);
  for (double v : x) {
    y.push_back(v * v);
    c.push_back(7.0);
    n.push_back(std::sqrt(v) * std::exp(0.02 * rng.normal()));
  }
  const auto f = fit_exponent(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 1.0, 1e-12);
  EXPECT_LT(f.residual_max, 1e-12);
  EXPECT_EQ(f.log_x.size(), 5u);
  EXPECT_NEAR(fit_exponent(x, c).slope, 0.0, 1e-12);
  const double s = fit_exponent(x, n).slope;
  EXPECT_GE(s, 0.45);
  EXPECT_LE(s, 0.55);
}

TEST(FitExponent, Errors) {
  EXPECT_THROW(fit_exponent({1, 2}, {1, 2}), std::invalid_argument);
  EXPECT_THROW(fit_exponent({1, 2, 3}, {1, 0, 2}), std::invalid_argument);
  EXPECT_THROW(fit_exponent({1, -2, 3}, {1, 1, 2}), std::invalid_argument);
  EXPECT_THROW(fit_exponent({1, 2, 3}, {1, 2}), std::invalid_argument);
}

TEST(FormatNumber, RoundTripsExactly) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(rng.uniform(-1, 1), static_cast<int>(rng.below(200)) - 100);
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(16), "16");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Csv, EscapingAndTable) {
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_escape("two\nlines"), "\"two\nlines\"");
  CsvTable t({"name", "value"});
  t.add({"x,y", "1.5"});
  t.add({"z", ""});
  EXPECT_EQ(t.str(), "name,value\r\n\"x,y\",1.5\r\nz,\r\n");
  EXPECT_EQ(t.column("value"), std::vector<double>{1.5});
  EXPECT_THROW(t.add({"only one"}), std::invalid_argument);
  EXPECT_THROW(t.column("missing"), std::out_of_range);
}

TEST(Svg, WellFormedDocument) {
  const std::string s = svg_loglog("title <&>", "x", "y", {{"a", {1, 10, 100}, {2, 20, 200}, true}, {"b", {}, {}, false}});
  EXPECT_EQ(s.rfind("<?xml", 0), 0u);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
  EXPECT_NE(s.find("title &lt;&amp;&gt;"), std::string::npos);
  EXPECT_EQ(s.find("title <&>"), std::string::npos);
  EXPECT_EQ(s.find("nan"), std::string::npos);
}

TEST(Config, ParsingAndSetters) {
  EXPECT_EQ(parse_experiment("decay"), Experiment::DecaySweep);
  EXPECT_EQ(parse_experiment("pairs-sweep"), Experiment::PairsSweep);
  EXPECT_EQ(parse_experiment(to_string(Experiment::SigmaDecay)), Experiment::SigmaDecay);
  EXPECT_THROW(parse_experiment("nope"), ConfigError);

  ExperimentConfig c;
  c.set("R", "16,32");
  c.set("delta", "2^-5, 1/64, 0.0078125");
  c.set("gen", "wolff_radii");
  c.set("seeds", "1,2,3");
  c.set("eps", "0.05");
  c.set("force", "true");
  EXPECT_EQ(c.R, (std::vector<int>{16, 32}));
  EXPECT_EQ(c.delta, (std::vector<double>{1.0 / 32, 1.0 / 64, 1.0 / 128}));
  EXPECT_EQ(c.seed_list(), (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_TRUE(c.force);
  EXPECT_EQ(c.eps, 0.05);
  try {
    c.set("bogus", "1");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field, "bogus");
  }
  EXPECT_THROW(c.set("q", "abc"), ConfigError);
  EXPECT_THROW(c.set("gen", "triangle"), ConfigError);
  EXPECT_THROW(c.set("workers", "0"), ConfigError);
  EXPECT_EQ(ExperimentConfig{}.seed_list(), std::vector<std::uint64_t>{0});
}

TEST(Config, ValidationNamesTheField) {
  const auto field = [](ExperimentConfig c) {
    try {
      c.validate();
    } catch (const ConfigError& e) {
      return e.field;
    }
    return std::string("ok");
  };
  ExperimentConfig c;
  EXPECT_EQ(field(c), "ok");
  c.R = {24};
  EXPECT_EQ(field(c), "R");
  c.R = {256};
  EXPECT_EQ(field(c), "R");
  c.allow_256 = true;
  EXPECT_EQ(field(c), "ok");
  c = {};
  c.eps = 0.7;
  EXPECT_EQ(field(c), "eps");
  c = {};
  c.kind = Experiment::MaximalSweep;
  EXPECT_EQ(field(c), "gen");
  c.gens = {GenKind::WolffRadii};
  c.delta = {0.1};
  EXPECT_EQ(field(c), "delta");
  c.delta = {1.0 / 32};
  EXPECT_EQ(field(c), "ok");
}

TEST(Config, EchoRoundTripsThroughAFile) {
  ExperimentConfig c = small_decay();
  c.seeds = {4, 5};
  c.eps = 0.02;
  const auto path = std::filesystem::path(::testing::TempDir()) / "echo.conf";
  std::ofstream(path) << "# comment line\n" << c.echo();
  const ExperimentConfig back = read_config(path.string());
  EXPECT_EQ(back.echo(), c.echo());
  std::ofstream(path) << "not a setting\n";
  EXPECT_THROW(read_config(path.string()), ConfigError);
  EXPECT_THROW(read_config("/nonexistent/file.conf"), ConfigError);
}

TEST(Config, ParameterRules) {
  EXPECT_EQ(resolve_param("auto", GenKind::KnappPair, 64), 8);
  EXPECT_EQ(resolve_param("auto", GenKind::WolffRadii, 64), 32);
  EXPECT_EQ(resolve_param("auto", GenKind::LightTube, 64), 64);
  EXPECT_EQ(resolve_param("R/4", GenKind::LightTube, 64), 16);
  EXPECT_EQ(resolve_param("sqrtR", GenKind::LightTube, 32), 6);
  EXPECT_EQ(resolve_param("5", GenKind::LightTube, 32), 5);
  EXPECT_THROW(resolve_param("100", GenKind::LightTube, 32), ConfigError);
  EXPECT_THROW(resolve_param("R/0x", GenKind::LightTube, 32), ConfigError);
}

TEST(Budget, GuardRefusesLargeRunsWithoutForce) {
  ExperimentConfig c = small_decay();
  EXPECT_LT(estimate_kernel_evals(c), kKernelBudget);
  c.R = {16, 32, 64, 128};
  c.q = 8;
  c.seeds = {0, 1, 2, 3, 4};
  c.gens = {GenKind::RandomFrostman};
  c.out = (std::filesystem::path(::testing::TempDir()) / "guard").string();
  ASSERT_GT(estimate_kernel_evals(c), kKernelBudget);
  try {
    run_experiment(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field, "force");
  }
  EXPECT_FALSE(std::filesystem::exists(std::filesystem::path(c.out) / "manifest.txt"));
}

TEST(Pipelines, SmallDecayRunIsDeterministic) {
  ExperimentConfig c = small_decay();
  c.workers = 1;
  const auto a = compute_experiment(c);
  c.workers = 2;
  const auto b = compute_experiment(c);
  ASSERT_EQ(a.tables.size(), b.tables.size());
  for (const auto& [k, t] : a.tables) EXPECT_EQ(t.str(), b.tables.at(k).str()) << k;
  EXPECT_EQ(a.tables.at("decay").rows().size(), 4u);
  EXPECT_TRUE(a.summary.count("max_ratio"));
  set_workers(1);
}

TEST(Pipelines, RunWritesCsvSvgAndManifest) {
  ExperimentConfig c;
  c.kind = Experiment::MaximalSweep;
  c.gens = {GenKind::WolffRadii};
  c.delta = {1.0 / 16, 1.0 / 32, 1.0 / 64};
  c.n = 16;
  c.out = (std::filesystem::path(::testing::TempDir()) / "maxrun").string();
  const auto files = run_experiment(c);
  const std::filesystem::path dir(c.out);
  EXPECT_TRUE(std::filesystem::exists(dir / "maximal.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "maximal.svg"));
  const std::string manifest = slurp(dir / "manifest.txt");
  EXPECT_NE(manifest.find("experiment=maximal-sweep"), std::string::npos);
  EXPECT_NE(manifest.find("summary.max_slope="), std::string::npos);
  EXPECT_NE(manifest.find("wall_seconds."), std::string::npos);
  EXPECT_NE(manifest.find("under_resolved=0"), std::string::npos);
  EXPECT_EQ(files.back(), (dir / "manifest.txt").string());
  const std::string csv = slurp(dir / "maximal.csv");
  EXPECT_EQ(csv.rfind("gen,n,seed,delta,", 0), 0u);
}
