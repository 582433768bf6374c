// Command-line front end: run one algorithm, compare several on paired noise,
// or print the recommended learning rate and batch length.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "switchctl/config.hpp"
#include "switchctl/error.hpp"
#include "switchctl/harness.hpp"

namespace {

using namespace switchctl;

struct CommonOptions {
  std::string config;
  std::string preset;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> workers;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "experiment config file (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--preset", o.preset, "scalar-a|scalar-b|scalar-c|quadrotor|custom");
  cmd->add_option("--trials", o.trials, "number of trials");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--workers", o.workers, "worker threads");
}

ExperimentConfig resolve(const CommonOptions& o) {
  std::optional<Preset> preset;
  if (!o.preset.empty()) preset = parse_preset(o.preset);
  ExperimentConfig cfg = load_config(o.config, preset);
  apply_environment(cfg);
  if (o.trials) cfg.trials = *o.trials;
  if (o.seed) cfg.master_seed = *o.seed;
  if (!o.out.empty()) cfg.output.dir = o.out;
  if (o.workers) cfg.workers = *o.workers;
  cfg.validate();
  return cfg;
}

void print_summary(const RunSummary& s) {
  const RegretReport& r = s.regret;
  std::size_t breaks = 0;
  for (const auto& o : s.outputs) breaks += o.result.num_breaks();
  std::printf("%-10s trials=%zu diverged=%zu infeasible=%zu mean_regret=%.6g mean_breaks=%.3g\n",
              std::string(to_string(s.algorithm)).c_str(), s.outputs.size(), r.diverged, r.infeasible, r.mean_regret,
              static_cast<double>(breaks) / static_cast<double>(s.outputs.size()));
}

std::vector<Algorithm> parse_algorithm_list(const std::string& list) {
  std::vector<Algorithm> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_algorithm(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online switching control among black-box candidate controllers"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "run the configured algorithm and write CSV/JSON outputs");
  add_common(run, run_opts);

  CommonOptions cmp_opts;
  std::string algorithms = "exp3iss,exp3batch,fbs";
  CLI::App* compare = app.add_subcommand("compare", "run several algorithms on identical per-trial noise");
  add_common(compare, cmp_opts);
  compare->add_option("--algorithms", algorithms, "comma-separated list of exp3iss|exp3|exp3batch|fbs");

  std::size_t n = 0;
  std::size_t t = 0;
  double kappa = 0;
  double rho = 0;
  double c_eta = 1.0;
  CLI::App* params = app.add_subcommand("params", "print the recommended eta and tau");
  params->add_option("--n", n, "pool size")->required();
  params->add_option("--t", t, "horizon")->required();
  params->add_option("--kappa", kappa, "certificate overshoot")->required();
  params->add_option("--rho", rho, "certificate decay rate")->required();
  params->add_option("--c-eta", c_eta, "learning-rate constant");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const ExperimentConfig cfg = resolve(run_opts);
      print_summary(run_experiment(cfg));
      std::printf("wrote %s\n", cfg.output.dir.string().c_str());
    } else if (*compare) {
      const ExperimentConfig cfg = resolve(cmp_opts);
      for (const RunSummary& s : compare_algorithms(cfg, parse_algorithm_list(algorithms))) print_summary(s);
      std::printf("wrote %s\n", cfg.output.dir.string().c_str());
    } else if (*params) {
      const CertParams cert{kappa, rho, 1.0};
      const RecommendedParams rec = recommended_params(n, t, cert, c_eta);
      std::printf("eta=%.10g\ntau=%zu\nmin_batch_length=%zu\n", rec.eta, rec.tau, min_batch_length(kappa, rho));
    }
  } catch (const SwitchError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == ErrorCode::kConfig ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
