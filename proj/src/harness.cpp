#include "switchctl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "json.hpp"
#include "switchctl/error.hpp"

namespace switchctl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CostFunction make_cost(CostKind kind) {
  return kind == CostKind::kScalarQuadratic ? CostFunction::scalar_quadratic() : CostFunction::position_quadratic();
}

PolicyPool make_pool(const ExperimentConfig& cfg) {
  if (cfg.plant == PlantKind::kScalar) return build_scalar_pool(cfg.pool.gains);
  GeometricPDGains nominal = cfg.pool.nominal;
  nominal.mass_estimate = cfg.pool.mass_estimate_factor * cfg.quadrotor.mass;
  nominal.inertia_estimate = cfg.pool.inertia_estimate_factor * cfg.quadrotor.inertia;
  nominal.arm_length = cfg.quadrotor.arm_length;
  nominal.gravity = cfg.quadrotor.gravity;
  return build_quadrotor_pool(nominal, cfg.pool.scales);
}

std::unique_ptr<Plant> make_plant(const ExperimentConfig& cfg) {
  if (cfg.plant == PlantKind::kScalar) return std::make_unique<ScalarPlant>();
  return std::make_unique<QuadrotorPlant>(cfg.quadrotor);
}

bool is_certified(Algorithm a) { return a == Algorithm::kExp3Iss || a == Algorithm::kFbs; }

// Appends formatted text to a buffer; shortest form that round-trips.
class CsvBuffer {
 public:
  void num(double v) {
    char buf[32];
    int n;
    if (std::isnan(v)) {
      n = std::snprintf(buf, sizeof buf, "nan");
    } else if (std::isinf(v)) {
      n = std::snprintf(buf, sizeof buf, v > 0 ? "inf" : "-inf");
    } else {
      n = std::snprintf(buf, sizeof buf, "%.17g", v);
    }
    out_.append(buf, static_cast<std::size_t>(n));
  }
  void num(std::uint64_t v) { out_ += std::to_string(v); }
  void text(std::string_view s) { out_ += s; }
  void sep() { out_ += ','; }
  void end() { out_ += '\n'; }
  std::size_t size() const { return out_.size(); }
  void flush_to(std::ofstream& os) {
    os.write(out_.data(), static_cast<std::streamsize>(out_.size()));
    out_.clear();
  }

 private:
  std::string out_;
};

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw SwitchError(ErrorCode::kConfig, "cannot write " + path.string());
  return os;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

AggregateRow band(std::size_t t, std::vector<double>& values, std::size_t diverged) {
  AggregateRow row;
  row.t = t;
  row.diverged_count = diverged;
  if (values.empty()) {
    row.mean = row.p75_lo = row.p75_hi = row.min = row.max = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  row.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  row.min = *std::min_element(values.begin(), values.end());
  row.max = *std::max_element(values.begin(), values.end());
  row.p75_lo = percentile(values, 0.125);
  row.p75_hi = percentile(values, 0.875);
  // Summation order can leave the mean an ulp outside [min, max] for equal samples.
  row.mean = std::clamp(row.mean, row.min, row.max);
  return row;
}

void write_aggregate(const std::filesystem::path& path, std::string_view series, const std::vector<AggregateRow>& rows) {
  std::ofstream os = open_output(path);
  CsvBuffer buf;
  buf.text("# ");
  buf.text(kAggregateSchema);
  buf.text(" series=");
  buf.text(series);
  buf.end();
  buf.text("t,mean,p75_lo,p75_hi,min,max,diverged_count\n");
  for (const AggregateRow& r : rows) {
    buf.num(static_cast<std::uint64_t>(r.t));
    buf.sep();
    buf.num(r.mean);
    buf.sep();
    buf.num(r.p75_lo);
    buf.sep();
    buf.num(r.p75_hi);
    buf.sep();
    buf.num(r.min);
    buf.sep();
    buf.num(r.max);
    buf.sep();
    buf.num(static_cast<std::uint64_t>(r.diverged_count));
    buf.end();
    if (buf.size() > (1u << 20)) buf.flush_to(os);
  }
  buf.flush_to(os);
}

ExperimentConfig validated(ExperimentConfig cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

Experiment::Experiment(ExperimentConfig cfg)
    : cfg_(validated(std::move(cfg))), plant_(make_plant(cfg_)), pool_(make_pool(cfg_)), cost_(make_cost(cfg_.cost)) {}

SwitchingConfig Experiment::switching_config(Algorithm algorithm) const {
  SwitchingConfig sc;
  sc.cert = cfg_.cert;
  sc.escalation = cfg_.escalation;
  sc.clip_ceiling = cfg_.algorithm.clip_ceiling;
  const RecommendedParams rec = recommended_params(pool_.size(), cfg_.horizon, cfg_.cert, cfg_.algorithm.c_eta);
  sc.eta = cfg_.algorithm.eta.value_or(rec.eta);
  sc.tau = cfg_.algorithm.tau.value_or(rec.tau);
  if (algorithm == Algorithm::kExp3) sc.tau = 1;
  return sc;
}

NoiseSequence Experiment::noise_for_trial(std::size_t trial) const {
  SeededStream rng(derive_seed(cfg_.master_seed, trial, StreamId::kNoise));
  return NoiseSequence::generate(cfg_.disturbance, cfg_.horizon, rng);
}

std::optional<double> Experiment::l1_bound_for(const TrialResult& r) const {
  if (!is_certified(r.algorithm) || r.outcome != TrialOutcome::kCompleted || r.restarts > 0) return std::nullopt;
  std::optional<double> lf = cfg_.bound.lipschitz_dynamics;
  if (!lf && cfg_.plant == PlantKind::kScalar) lf = 1.0;
  std::optional<double> lpi = cfg_.bound.lipschitz_policy;
  if (!lpi) {
    double largest = 0.0;
    for (const auto& p : pool_) {
      const auto l = p->lipschitz_constant();
      if (!l) return std::nullopt;
      largest = std::max(largest, *l);
    }
    lpi = largest;
  }
  if (!lf) return std::nullopt;
  L1BoundInputs in;
  in.kappa = cfg_.cert.kappa;
  in.rho = cfg_.cert.rho;
  in.tau = r.tau;
  in.margin = cfg_.cert.margin;
  in.lipschitz_dynamics = std::max(1.0, *lf);
  in.lipschitz_policy = std::max(1.0, *lpi);
  in.breaks = r.num_breaks();
  in.batches = r.num_batches();
  in.horizon = cfg_.horizon;
  in.x0_norm = cfg_.initial_state.norm();
  in.pi0_bar = cfg_.bound.pi0_bar;
  try {
    return theoretical_l1_bound(in);
  } catch (const SwitchError&) {
    return std::nullopt;
  }
}

TrialOutput Experiment::run_trial(Algorithm algorithm, std::size_t trial) const {
  const NoiseSequence noise = noise_for_trial(trial);
  SeededStream rng(derive_seed(cfg_.master_seed, trial, StreamId::kAlgorithm));
  const SwitchingProblem problem{*plant_, pool_, noise, cost_, cfg_.initial_state, cfg_.horizon};
  SwitchingConfig sc = switching_config(algorithm);

  TrialOutput out;
  out.trial = trial;
  out.noise_checksum = noise.checksum();
  out.result = run_algorithm(algorithm, problem, sc, rng);
  out.benchmark = benchmark_costs(*plant_, pool_, noise, cfg_.cert, cost_, cfg_.initial_state, cfg_.horizon);
  if (out.benchmark.best_arm) {
    out.benchmark_step_costs = rollout_fixed_policy(*plant_, *pool_[*out.benchmark.best_arm], noise, cost_,
                                                    cfg_.initial_state, cfg_.horizon, cfg_.cert, true)
                                   .costs;
  }
  const double alg = total_cost(out.result);
  out.regret = (std::isfinite(alg) && out.benchmark.feasible()) ? alg - out.benchmark.value() : kInf;
  if (out.benchmark.best_arm && !out.result.diverged()) {
    out.aux_regret = aux_regret(out.result, *out.benchmark.best_arm, *plant_, pool_, noise, cost_);
  }
  out.sums = finite_gain_sums(out.result);
  out.l1_bound = l1_bound_for(out.result);
  return out;
}

std::vector<TrialOutput> Experiment::run_trials(Algorithm algorithm) const {
  std::vector<TrialOutput> outputs(cfg_.trials);
  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg_.workers, cfg_.trials));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t i = next++; i < cfg_.trials; i = next++) {
      try {
        outputs[i] = run_trial(algorithm, i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg_.trials;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work);
    for (auto& th : threads) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return outputs;
}

std::vector<AggregateRow> aggregate_state_norms(const std::vector<TrialOutput>& outputs, std::size_t horizon) {
  std::vector<AggregateRow> rows;
  rows.reserve(horizon + 1);
  std::vector<double> values;
  values.reserve(outputs.size());
  for (std::size_t t = 0; t <= horizon; ++t) {
    values.clear();
    std::size_t diverged = 0;
    for (const TrialOutput& o : outputs) {
      if (o.result.diverged()) {
        if (o.result.stages <= t) ++diverged;
        continue;
      }
      if (t < o.result.state_norms.size()) values.push_back(o.result.state_norms[t]);
    }
    rows.push_back(band(t, values, diverged));
  }
  return rows;
}

std::vector<AggregateRow> aggregate_regret(const std::vector<TrialOutput>& outputs, std::size_t horizon) {
  std::vector<const TrialOutput*> usable;
  std::size_t diverged = 0;
  for (const TrialOutput& o : outputs) {
    if (o.result.diverged()) ++diverged;
    if (o.result.diverged() || !o.benchmark.feasible()) continue;
    if (o.result.costs.size() < o.result.stages) continue;  // steps were not recorded
    usable.push_back(&o);
  }
  std::vector<double> running(usable.size(), 0.0);
  std::vector<AggregateRow> rows;
  rows.reserve(horizon + 1);
  std::vector<double> values;
  for (std::size_t t = 0; t <= horizon; ++t) {
    values.assign(running.begin(), running.end());
    rows.push_back(band(t, values, diverged));
    if (t == horizon) break;
    for (std::size_t i = 0; i < usable.size(); ++i) {
      const TrialOutput& o = *usable[i];
      const double c = t < o.result.costs.size() ? o.result.costs[t] : 0.0;
      running[i] += c - o.benchmark_step_costs[t];
    }
  }
  return rows;
}

RunSummary summarize(Algorithm algorithm, std::vector<TrialOutput> outputs) {
  RunSummary s{algorithm, std::move(outputs), {}};
  std::vector<double> costs;
  std::vector<BenchmarkSet> benchmarks;
  for (const TrialOutput& o : s.outputs) {
    costs.push_back(total_cost(o.result));
    benchmarks.push_back(o.benchmark);
  }
  s.regret = make_regret_report(costs, benchmarks);
  return s;
}

void write_outputs(const Experiment& experiment, const RunSummary& summary, const std::filesystem::path& dir) {
  const ExperimentConfig& cfg = experiment.config();
  std::filesystem::create_directories(dir);

  if (cfg.output.per_step) {
    std::ofstream os = open_output(dir / "steps.csv");
    CsvBuffer buf;
    buf.text("# ");
    buf.text(kStepsSchema);
    buf.end();
    buf.text("trial,t,batch,arm,pool_size,state_norm,cost,broke_flag\n");
    for (const TrialOutput& o : summary.outputs) {
      const TrialResult& r = o.result;
      for (std::size_t t = 0; t < r.costs.size(); ++t) {
        buf.num(static_cast<std::uint64_t>(o.trial));
        buf.sep();
        buf.num(static_cast<std::uint64_t>(t));
        buf.sep();
        buf.num(static_cast<std::uint64_t>(r.batches[t]));
        buf.sep();
        buf.num(static_cast<std::uint64_t>(r.arms[t]));
        buf.sep();
        buf.num(static_cast<std::uint64_t>(r.pool_sizes[t]));
        buf.sep();
        buf.num(r.state_norms[t]);
        buf.sep();
        buf.num(r.costs[t]);
        buf.sep();
        buf.num(static_cast<std::uint64_t>(r.broke[t]));
        buf.end();
        if (buf.size() > (1u << 22)) buf.flush_to(os);
      }
    }
    buf.flush_to(os);
  }

  write_aggregate(dir / "aggregate_state_norm.csv", "state_norm", aggregate_state_norms(summary.outputs, cfg.horizon));
  write_aggregate(dir / "aggregate_regret.csv", "cumulative_regret", aggregate_regret(summary.outputs, cfg.horizon));

  {
    std::ofstream os = open_output(dir / "trials.csv");
    CsvBuffer buf;
    buf.text("# ");
    buf.text(kTrialsSchema);
    buf.end();
    buf.text(
        "trial,noise_checksum,outcome,batches,breaks,restarts,total_cost,benchmark_arm,benchmark_cost,regret,"
        "aux_regret,s1,s2,s4,l1_bound,max_state_norm\n");
    for (const TrialOutput& o : summary.outputs) {
      const TrialResult& r = o.result;
      buf.num(static_cast<std::uint64_t>(o.trial));
      buf.sep();
      buf.text(hex64(o.noise_checksum));
      buf.sep();
      buf.text(to_string(r.outcome));
      buf.sep();
      buf.num(static_cast<std::uint64_t>(r.num_batches()));
      buf.sep();
      buf.num(static_cast<std::uint64_t>(r.num_breaks()));
      buf.sep();
      buf.num(static_cast<std::uint64_t>(r.restarts));
      buf.sep();
      buf.num(total_cost(r));
      buf.sep();
      if (o.benchmark.best_arm) buf.num(static_cast<std::uint64_t>(*o.benchmark.best_arm));
      buf.sep();
      buf.num(o.benchmark.feasible() ? o.benchmark.value() : kInf);
      buf.sep();
      buf.num(o.regret);
      buf.sep();
      if (o.aux_regret) buf.num(*o.aux_regret);
      buf.sep();
      buf.num(o.sums.s1);
      buf.sep();
      buf.num(o.sums.s2);
      buf.sep();
      buf.num(o.sums.s4);
      buf.sep();
      if (o.l1_bound) buf.num(*o.l1_bound);
      buf.sep();
      buf.num(r.max_state_norm);
      buf.end();
    }
    buf.flush_to(os);
  }

  nlohmann::json j;
  j["algorithm"] = std::string(to_string(summary.algorithm));
  j["preset"] = std::string(to_string(cfg.preset));
  j["horizon"] = cfg.horizon;
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  j["pool_size"] = experiment.pool().size();
  const SwitchingConfig sc = experiment.switching_config(summary.algorithm);
  j["eta"] = sc.eta;
  j["tau"] = sc.tau;
  j["certificate"] = {{"kappa", cfg.cert.kappa}, {"rho", cfg.cert.rho}, {"margin", cfg.cert.margin}};
  const RegretReport& rep = summary.regret;
  j["regret"] = {{"mean", finite_or_null(rep.mean_regret)}, {"p75_lo", finite_or_null(rep.p75_lo)},
                 {"p75_hi", finite_or_null(rep.p75_hi)},    {"min", finite_or_null(rep.min_regret)},
                 {"max", finite_or_null(rep.max_regret)},   {"diverged", rep.diverged},
                 {"infeasible", rep.infeasible}};
  j["divergence_rate"] = static_cast<double>(rep.diverged) / static_cast<double>(summary.outputs.size());
  nlohmann::json trials = nlohmann::json::array();
  for (const TrialOutput& o : summary.outputs) {
    const TrialResult& r = o.result;
    nlohmann::json t;
    t["trial"] = o.trial;
    t["noise_checksum"] = hex64(o.noise_checksum);
    t["outcome"] = std::string(to_string(r.outcome));
    t["J"] = r.num_batches();
    t["M"] = r.num_breaks();
    t["restarts"] = r.restarts;
    t["total_cost"] = finite_or_null(total_cost(r));
    t["regret"] = finite_or_null(o.regret);
    t["aux_regret"] = o.aux_regret ? nlohmann::json(*o.aux_regret) : nlohmann::json(nullptr);
    t["benchmark_arm"] = o.benchmark.best_arm ? nlohmann::json(*o.benchmark.best_arm) : nlohmann::json(nullptr);
    t["benchmark_policy"] =
        o.benchmark.best_arm ? nlohmann::json(experiment.pool()[*o.benchmark.best_arm]->describe()) : nlohmann::json(nullptr);
    t["finite_gain_sums"] = {{"s1", o.sums.s1}, {"s2", o.sums.s2}, {"s4", o.sums.s4}};
    t["bounds"] = {{"l1", o.l1_bound ? nlohmann::json(*o.l1_bound) : nlohmann::json(nullptr)},
                   {"batch_count", batch_count_bound(cfg.horizon, r.tau, std::min(r.num_breaks(), cfg.horizon))}};
    t["final_active"] = r.final_active;
    t["max_state_norm"] = finite_or_null(r.max_state_norm);
    trials.push_back(std::move(t));
  }
  j["per_trial"] = std::move(trials);
  std::ofstream os = open_output(dir / "summary.json");
  os << j.dump(2) << '\n';
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  Experiment experiment(cfg);
  RunSummary summary = summarize(cfg.algorithm.algorithm, experiment.run_trials(cfg.algorithm.algorithm));
  write_outputs(experiment, summary, cfg.output.dir);
  return summary;
}

std::vector<RunSummary> compare_algorithms(const ExperimentConfig& cfg, const std::vector<Algorithm>& algorithms) {
  if (algorithms.empty()) throw SwitchError(ErrorCode::kConfig, "compare needs at least one algorithm");
  Experiment experiment(cfg);
  std::vector<RunSummary> summaries;
  for (Algorithm a : algorithms) {
    summaries.push_back(summarize(a, experiment.run_trials(a)));
    write_outputs(experiment, summaries.back(), cfg.output.dir / std::string(to_string(a)));
  }

  std::filesystem::create_directories(cfg.output.dir);
  std::ofstream os = open_output(cfg.output.dir / "regret_comparison.csv");
  CsvBuffer buf;
  buf.text("# ");
  buf.text(kComparisonSchema);
  buf.end();
  buf.text("trial,algorithm,noise_checksum,outcome,total_cost,benchmark_cost,regret,max_state_norm\n");
  for (std::size_t i = 0; i < cfg.trials; ++i) {
    for (const RunSummary& s : summaries) {
      const TrialOutput& o = s.outputs[i];
      buf.num(static_cast<std::uint64_t>(i));
      buf.sep();
      buf.text(to_string(s.algorithm));
      buf.sep();
      buf.text(hex64(o.noise_checksum));
      buf.sep();
      buf.text(to_string(o.result.outcome));
      buf.sep();
      buf.num(total_cost(o.result));
      buf.sep();
      buf.num(o.benchmark.feasible() ? o.benchmark.value() : kInf);
      buf.sep();
      buf.num(o.regret);
      buf.sep();
      buf.num(o.result.max_state_norm);
      buf.end();
    }
  }
  buf.flush_to(os);
  return summaries;
}

}  // namespace switchctl
