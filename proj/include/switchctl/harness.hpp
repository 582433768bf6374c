#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "switchctl/config.hpp"
#include "switchctl/metrics.hpp"
#include "switchctl/switching.hpp"

namespace switchctl {

inline constexpr const char* kStepsSchema = "switchctl-steps/1";
inline constexpr const char* kAggregateSchema = "switchctl-aggregate/1";
inline constexpr const char* kTrialsSchema = "switchctl-trials/1";
inline constexpr const char* kComparisonSchema = "switchctl-comparison/1";

// Everything measured for one trial of one algorithm.
struct TrialOutput {
  std::size_t trial = 0;
  std::uint64_t noise_checksum = 0;
  TrialResult result;
  BenchmarkSet benchmark;
  std::vector<double> benchmark_step_costs;  // stage costs of the benchmark arm
  double regret = 0.0;                       // +inf when diverged or infeasible
  std::optional<double> aux_regret;          // against the benchmark arm
  FiniteGainSums sums;
  std::optional<double> l1_bound;
};

// Resolved experiment: plant, pool, cost and per-trial streams built once
// from a validated config and shared read-only by all trials.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const Plant& plant() const { return *plant_; }
  const PolicyPool& pool() const { return pool_; }
  const CostFunction& cost() const { return cost_; }

  // eta/tau resolved from the config or the recommended schedule.
  SwitchingConfig switching_config(Algorithm algorithm) const;

  // Disturbances for one trial: stream kNoise of derive_seed(master, trial).
  NoiseSequence noise_for_trial(std::size_t trial) const;

  TrialOutput run_trial(Algorithm algorithm, std::size_t trial) const;

  // All trials, spread over `workers` threads; results are ordered by trial
  // and independent of the worker count.
  std::vector<TrialOutput> run_trials(Algorithm algorithm) const;

 private:
  std::optional<double> l1_bound_for(const TrialResult& r) const;

  ExperimentConfig cfg_;
  std::unique_ptr<Plant> plant_;
  PolicyPool pool_;
  CostFunction cost_;
};

struct AggregateRow {
  std::size_t t = 0;
  double mean = 0.0;
  double p75_lo = 0.0;
  double p75_hi = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t diverged_count = 0;
};

// Per-t statistics of ||x_t|| over the non-diverged trials, t = 0 .. T.
std::vector<AggregateRow> aggregate_state_norms(const std::vector<TrialOutput>& outputs, std::size_t horizon);
// Per-t statistics of cumulative regret sum_{s < t} (c_alg(s) - c_bench(s)).
std::vector<AggregateRow> aggregate_regret(const std::vector<TrialOutput>& outputs, std::size_t horizon);

struct RunSummary {
  Algorithm algorithm;
  std::vector<TrialOutput> outputs;
  RegretReport regret;
};

// Writes steps.csv (when enabled), aggregate_state_norm.csv,
// aggregate_regret.csv, trials.csv and summary.json into `dir`.
void write_outputs(const Experiment& experiment, const RunSummary& summary, const std::filesystem::path& dir);

RunSummary summarize(Algorithm algorithm, std::vector<TrialOutput> outputs);

// Runs the configured algorithm and writes into cfg.output.dir.
RunSummary run_experiment(const ExperimentConfig& cfg);

// Runs each algorithm on the same per-trial noise, writes one sub-directory per
// algorithm plus regret_comparison.csv in cfg.output.dir.
std::vector<RunSummary> compare_algorithms(const ExperimentConfig& cfg, const std::vector<Algorithm>& algorithms);

}  // namespace switchctl
