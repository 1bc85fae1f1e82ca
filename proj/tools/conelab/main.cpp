#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "conelab/harness.hpp"
#include "conelab/operator_duality.hpp"

namespace {

// Flag values land here first; only flags actually given become settings, and the config file wins over them.
struct Flags {
  std::string config, R, delta, gen, gamma, seed, eps, q, gamma_exp, n, lambda, workers, out;
  bool force = false, allow_256 = false, no_main_geom = false;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "key=value config file; its settings override flags");
  sub->add_option("--R", f.R, "comma list of scales R (powers of two, 16..256)");
  sub->add_option("--delta", f.delta, "comma list of delta values (2^-k accepted)");
  sub->add_option("--gen", f.gen, "comma list of generator families");
  sub->add_option("--gamma", f.gamma, "generator parameter rule: auto, R, sqrtR, R/<k> or an integer");
  sub->add_option("--seed", f.seed, "comma list of seeds");
  sub->add_option("--eps", f.eps, "epsilon for delta^{-eps} losses");
  sub->add_option("--q", f.q, "quadrature density factor");
  sub->add_option("--gamma-exp", f.gamma_exp, "comma list of exponents e with gamma = round(R^e)");
  sub->add_option("--n", f.n, "circle count of unit-scale families");
  sub->add_option("--lambda", f.lambda, "resolution scale of the sigma decay diagnostic");
  sub->add_option("--workers", f.workers, "worker threads");
  sub->add_option("--out", f.out, "output directory");
  sub->add_flag("--force", f.force, "run even above the kernel-evaluation budget");
  sub->add_flag("--allow-256", f.allow_256, "permit R = 256");
  sub->add_flag("--no-main-geom", f.no_main_geom, "skip the rectangle multiplicity histogram in pairs");
}

conelab::ExperimentConfig build(conelab::Experiment kind, const Flags& f) {
  conelab::ExperimentConfig c;
  c.kind = kind;
  if (kind == conelab::Experiment::MaximalSweep || kind == conelab::Experiment::PairsSweep)
    c.gens = {conelab::GenKind::WolffRadii, conelab::GenKind::RandomFrostman};
  const auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) c.set(key, v);
  };
  put("R", f.R);
  put("delta", f.delta);
  put("gen", f.gen);
  put("param", f.gamma);
  put("seeds", f.seed);
  put("eps", f.eps);
  put("q", f.q);
  put("gamma_exp", f.gamma_exp);
  put("n", f.n);
  put("lambda", f.lambda);
  put("workers", f.workers);
  put("out", f.out);
  if (f.force) c.force = true;
  if (f.allow_256) c.allow_256 = true;
  if (f.no_main_geom) c.main_geom = false;
  if (!f.config.empty()) c = conelab::read_config(f.config, c);
  c.kind = kind;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conelab: numerical experiments for cone restriction and circular maximal estimates"};
  app.require_subcommand(1);
  const std::pair<const char*, conelab::Experiment> subs[] = {
      {"gen", conelab::Experiment::Gen},           {"decay", conelab::Experiment::DecaySweep},
      {"maximal", conelab::Experiment::MaximalSweep}, {"pairs", conelab::Experiment::PairsSweep},
      {"sharpness", conelab::Experiment::Sharpness}, {"sigma", conelab::Experiment::SigmaDecay},
      {"duality", conelab::Experiment::DualityCheck}, {"all", conelab::Experiment::All}};
  Flags flags;
  bool dry_run = false;
  for (const auto& [name, kind] : subs) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + conelab::to_string(kind) + " pipeline");
    add_flags(sub, flags);
    sub->add_flag("--dry-run", dry_run, "validate, print the config and the cost estimate, then stop");
  }
  CLI11_PARSE(app, argc, argv);
  conelab::Experiment kind = conelab::Experiment::All;
  for (const auto& [name, k] : subs)
    if (app.got_subcommand(name)) kind = k;
  try {
    const conelab::ExperimentConfig cfg = build(kind, flags);
    cfg.validate();
    if (dry_run) {
      std::cout << cfg.echo() << "estimated_kernel_evals=" << conelab::format_number(conelab::estimate_kernel_evals(cfg))
                << "\n";
      return 0;
    }
    for (const auto& path : conelab::run_experiment(cfg)) std::cout << path << "\n";
  } catch (const conelab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const conelab::UnderResolved& e) {
    std::cerr << "under-resolved: " << e.what() << "\n";
    return 3;
  } catch (const conelab::NonConvergence& e) {
    std::cerr << "no convergence: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
