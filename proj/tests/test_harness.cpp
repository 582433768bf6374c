#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "switchctl/config.hpp"
#include "switchctl/harness.hpp"

using namespace switchctl;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_scalar(std::size_t workers) {
  ExperimentConfig cfg = preset_config(Preset::kScalarB);
  cfg.horizon = 3000;
  cfg.trials = 6;
  cfg.master_seed = 17;
  cfg.workers = workers;
  return cfg;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("switchctl_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

}  // namespace

TEST_CASE("seed derivation gives distinct streams") {
  CHECK(derive_seed(1, 0, StreamId::kNoise) != derive_seed(1, 0, StreamId::kAlgorithm));
  CHECK(derive_seed(1, 0, StreamId::kNoise) != derive_seed(1, 1, StreamId::kNoise));
  CHECK(derive_seed(1, 0, StreamId::kNoise) != derive_seed(2, 0, StreamId::kNoise));
  CHECK(derive_seed(5, 3, StreamId::kAlgorithm) == derive_seed(5, 3, StreamId::kAlgorithm));
}

TEST_CASE("trial results do not depend on the worker count") {
  const Experiment one(small_scalar(1));
  const Experiment four(small_scalar(4));
  const auto a = one.run_trials(Algorithm::kExp3Iss);
  const auto b = four.run_trials(Algorithm::kExp3Iss);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].trial == i);
    CHECK(a[i].noise_checksum == b[i].noise_checksum);
    CHECK(a[i].result.arms == b[i].result.arms);
    CHECK(a[i].result.costs == b[i].result.costs);
  }
  // a single trial replayed in isolation reproduces its rows
  const TrialOutput lone = one.run_trial(Algorithm::kExp3Iss, 4);
  CHECK(lone.result.costs == a[4].result.costs);
  CHECK(a[0].noise_checksum != a[1].noise_checksum);
}

TEST_CASE("experiment outputs") {
  ExperimentConfig cfg = small_scalar(2);
  cfg.output.dir = scratch("run");
  const RunSummary s = run_experiment(cfg);
  CHECK(s.outputs.size() == 6);
  for (const char* f : {"steps.csv", "aggregate_state_norm.csv", "aggregate_regret.csv", "trials.csv", "summary.json"}) {
    CHECK(fs::exists(cfg.output.dir / f));
  }
  CHECK(data_rows(cfg.output.dir / "aggregate_state_norm.csv") == cfg.horizon + 1);
  CHECK(data_rows(cfg.output.dir / "aggregate_regret.csv") == cfg.horizon + 1);
  CHECK(data_rows(cfg.output.dir / "trials.csv") == cfg.trials);
  CHECK(slurp(cfg.output.dir / "steps.csv").rfind(std::string("# ") + kStepsSchema, 0) == 0);

  const auto rows = aggregate_state_norms(s.outputs, cfg.horizon);
  REQUIRE(rows.size() == cfg.horizon + 1);
  for (const AggregateRow& r : rows) {
    CHECK(r.min <= r.mean);
    CHECK(r.mean <= r.max);
    CHECK(r.min <= r.p75_lo);
    CHECK(r.p75_lo <= r.p75_hi);
    CHECK(r.p75_hi <= r.max);
  }
  CHECK(rows[0].mean == 1.0);
  const auto regret = aggregate_regret(s.outputs, cfg.horizon);
  CHECK(regret[0].mean == 0.0);
  CHECK(regret.back().mean == doctest::Approx(s.regret.mean_regret));
}

TEST_CASE("reruns are byte-identical across worker counts") {
  ExperimentConfig a = small_scalar(1);
  a.output.dir = scratch("det_a");
  ExperimentConfig b = small_scalar(3);
  b.output.dir = scratch("det_b");
  run_experiment(a);
  run_experiment(b);
  for (const char* f : {"steps.csv", "aggregate_state_norm.csv", "aggregate_regret.csv", "trials.csv"}) {
    CHECK(slurp(a.output.dir / f) == slurp(b.output.dir / f));
  }
}

TEST_CASE("comparison shares the noise across algorithms") {
  ExperimentConfig cfg = small_scalar(2);
  cfg.output.dir = scratch("cmp");
  const auto summaries = compare_algorithms(cfg, {Algorithm::kExp3Iss, Algorithm::kExp3Batch, Algorithm::kFbs});
  REQUIRE(summaries.size() == 3);
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    CHECK(summaries[0].outputs[i].noise_checksum == summaries[1].outputs[i].noise_checksum);
    CHECK(summaries[0].outputs[i].noise_checksum == summaries[2].outputs[i].noise_checksum);
    CHECK(summaries[0].outputs[i].benchmark.value() == summaries[2].outputs[i].benchmark.value());
  }
  CHECK(fs::exists(cfg.output.dir / "regret_comparison.csv"));
  CHECK(data_rows(cfg.output.dir / "regret_comparison.csv") == 3 * cfg.trials);
  for (const char* sub : {"exp3iss", "exp3batch", "fbs"}) CHECK(fs::exists(cfg.output.dir / sub / "aggregate_regret.csv"));

  ExperimentConfig single = small_scalar(2);
  single.output.dir = scratch("single");
  const RunSummary alone = run_experiment(single);
  CHECK(alone.regret.mean_regret == summaries[0].regret.mean_regret);
  CHECK(slurp(single.output.dir / "trials.csv") == slurp(cfg.output.dir / "exp3iss" / "trials.csv"));
}

TEST_CASE("quadrotor preset instantiates the full pool") {
  ExperimentConfig cfg = preset_config(Preset::kQuadrotor);
  cfg.trials = 1;
  const Experiment e(cfg);
  CHECK(e.pool().size() == 81);
  const SwitchingConfig sc = e.switching_config(Algorithm::kExp3Iss);
  CHECK(sc.tau == 227);
  CHECK(e.switching_config(Algorithm::kExp3).tau == 1);
}
