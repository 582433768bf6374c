// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include "switchctl/config.hpp"
#include "switchctl/harness.hpp"

using namespace switchctl;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void report(int id, const char* name, const std::function<Verdict()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!v.pass) ++failures;
  std::printf("%s criterion %d: %s (%s) [%.1fs]\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), secs);
  std::fflush(stdout);
}

std::size_t workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

ExperimentConfig with_trials(Preset preset, std::size_t trials) {
  ExperimentConfig cfg = preset_config(preset);
  cfg.trials = trials;
  cfg.workers = workers();
  cfg.master_seed = 2024;
  cfg.output.per_step = false;
  return cfg;
}

bool envelope_replay_ok(const TrialResult& r) {
  for (const EpisodeRecord& ep : r.episodes) {
    for (std::size_t t = ep.t_start; t < ep.t_end; ++t) {
      if (t + 1 >= r.state_norms.size()) return false;
      const bool ok = check_envelope(r.state_norms[t + 1], ep.anchor_norm, t + 1 - ep.t_start, ep.cert);
      const bool breaking_step = ep.broke && t + 1 == ep.t_end;
      if (ok == breaking_step) return false;
    }
  }
  return true;
}

// Lemma 1 over every preset and algorithm; also replays envelopes for the
// certified algorithms (criterion 4), so the runs are shared.
struct PresetRuns {
  std::size_t runs = 0;
  std::size_t lemma_violations = 0;
  std::size_t replayed = 0;
  std::size_t replay_violations = 0;
  std::size_t breaks = 0;
};

PresetRuns& preset_runs() {
  static PresetRuns acc = [] {
    PresetRuns a;
    for (Preset p : {Preset::kScalarA, Preset::kScalarB, Preset::kScalarC, Preset::kQuadrotor}) {
      const Experiment e(with_trials(p, p == Preset::kQuadrotor ? 100 : 20));
      for (Algorithm alg : {Algorithm::kExp3Iss, Algorithm::kFbs, Algorithm::kExp3Batch, Algorithm::kExp3}) {
        const std::size_t tau = e.switching_config(alg).tau;
        for (const TrialOutput& o : e.run_trials(alg)) {
          const TrialResult& r = o.result;
          ++a.runs;
          const std::size_t M = r.num_breaks();
          if (r.num_batches() > batch_count_bound(r.horizon, tau, M)) ++a.lemma_violations;
          if (alg == Algorithm::kExp3Iss || alg == Algorithm::kFbs) {
            ++a.replayed;
            a.breaks += M;
            if (!envelope_replay_ok(r)) ++a.replay_violations;
          }
        }
      }
    }
    return a;
  }();
  return acc;
}

Verdict criterion_batch_count() {
  const PresetRuns& a = preset_runs();
  return {a.lemma_violations == 0, fmt("%zu runs over 4 presets x 4 algorithms, %zu violations", a.runs,
                                       a.lemma_violations)};
}

Verdict criterion_distributions() {
  const Experiment e(with_trials(Preset::kScalarB, 20));
  const SwitchingConfig sc = e.switching_config(Algorithm::kExp3Iss);
  std::size_t vectors = 0, bad = 0;
  for (std::size_t trial = 0; trial < 20; ++trial) {
    const NoiseSequence noise = e.noise_for_trial(trial);
    const SwitchingProblem problem{e.plant(), e.pool(), noise, e.cost(), e.config().initial_state, e.config().horizon};
    SeededStream rng(derive_seed(e.config().master_seed, trial, StreamId::kAlgorithm));
    std::vector<ArmDistribution> dists;
    std::vector<std::size_t> chosen;
    const TrialResult r = run_exp3_iss(problem, sc, rng, [&](std::size_t, const ArmDistribution& d, std::size_t k) {
      dists.push_back(d);
      chosen.push_back(k);
    });
    std::vector<bool> active(e.pool().size(), true);
    std::size_t next_event = 0;
    for (std::size_t b = 0; b < dists.size(); ++b) {
      ++vectors;
      const ArmDistribution& d = dists[b];
      double total = 0;
      bool ok = true;
      for (double p : d.probs) {
        ok = ok && p >= 0.0;
        total += p;
      }
      ok = ok && std::abs(total - 1.0) <= 1e-12;
      for (std::size_t arm = 0; arm < active.size(); ++arm) {
        if (!active[arm]) ok = ok && d.prob_of(arm) == 0.0 && chosen[b] != arm;
      }
      if (!ok) ++bad;
      while (next_event < r.deactivations.size() && r.deactivations[next_event].batch == b) {
        active[r.deactivations[next_event].arm] = false;
        ++next_event;
      }
    }
  }
  return {bad == 0, fmt("%zu probability vectors over 20 scalar-b runs, %zu bad", vectors, bad)};
}

Verdict criterion_unbiased() {
  // Freeze a 3-arm learner after a short history and resample the arm.
  BanditState state(3, 0.05, 289);
  state = update_estimates(state, 0, 12.0, 1.0 / 3.0);
  state = update_estimates(state, 2, 30.0, 0.3);
  state = update_estimates(state, 1, 5.0, 0.4);
  const ArmDistribution dist = probabilities(state);
  const std::vector<double> g{2.0, 9.5, 0.75};
  SeededStream rng(99);
  const std::size_t n = 100000;
  std::vector<double> sum(3, 0.0), sq(3, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = sample_arm(dist, rng);
    for (std::size_t a = 0; a < 3; ++a) {
      const double est = a == k ? g[a] / dist.prob_of(a) : 0.0;
      sum[a] += est;
      sq[a] += est * est;
    }
  }
  bool pass = true;
  std::string detail;
  for (std::size_t a = 0; a < 3; ++a) {
    const double mean = sum[a] / n;
    const double sd = std::sqrt(std::max(0.0, sq[a] / n - mean * mean));
    const double tol = 3.0 * sd / std::sqrt(static_cast<double>(n));
    pass = pass && std::abs(mean - g[a]) <= tol;
    detail += fmt("arm %zu: %.4f vs %.4f tol %.4f; ", a, mean, g[a], tol);
  }
  return {pass, detail};
}

Verdict criterion_envelope() {
  const PresetRuns& a = preset_runs();
  return {a.replay_violations == 0,
          fmt("%zu certified runs replayed, %zu deactivations, %zu violations", a.replayed, a.breaks,
              a.replay_violations)};
}

// Scalar runs at T = 1e5 with tau = 289.
struct FigureRuns {
  std::vector<TrialOutput> iss;
  std::vector<TrialOutput> batch;
};

FigureRuns figure_runs(Preset preset) {
  ExperimentConfig cfg = with_trials(preset, 50);
  cfg.algorithm.tau = 289;
  const Experiment e(cfg);
  return {e.run_trials(Algorithm::kExp3Iss), e.run_trials(Algorithm::kExp3Batch)};
}

const FigureRuns& fig1b() {
  static const FigureRuns runs = figure_runs(Preset::kScalarB);
  return runs;
}

Verdict criterion_fig1b() {
  const FigureRuns& f = fig1b();
  std::size_t tripped = 0, bounded = 0, only_stable = 0;
  for (const auto& o : f.batch) tripped += o.result.max_state_norm > 1e6 ? 1 : 0;
  for (const auto& o : f.iss) {
    bounded += o.result.max_state_norm <= 1e5 ? 1 : 0;
    only_stable += o.result.final_active == std::vector<std::size_t>{0} ? 1 : 0;
  }
  const std::size_t n = f.iss.size();
  const bool pass = tripped * 10 >= 8 * n && bounded == n && only_stable * 100 >= 95 * n;
  return {pass, fmt("exp3batch tripped 1e6 in %zu/%zu, exp3iss max<=1e5 in %zu/%zu, pool={K=-1} in %zu/%zu", tripped,
                    n, bounded, n, only_stable, n)};
}

Verdict criterion_fig1c() {
  const FigureRuns f = figure_runs(Preset::kScalarA);
  std::size_t spikes = 0;
  for (std::size_t i = 0; i < f.iss.size(); ++i) {
    if (f.batch[i].result.max_state_norm >= 5.0 * f.iss[i].result.max_state_norm) ++spikes;
  }
  return {spikes * 2 > f.iss.size(), fmt("exp3batch max >= 5x exp3iss max in %zu/%zu", spikes, f.iss.size())};
}

Verdict criterion_l1_dominance() {
  const FigureRuns& f = fig1b();
  std::size_t checked = 0, violations = 0;
  double worst = 0.0;
  for (const auto& o : f.iss) {
    const TrialResult& r = o.result;
    if (r.outcome != TrialOutcome::kCompleted) continue;
    L1BoundInputs in;
    in.kappa = r.final_cert.kappa;
    in.rho = r.final_cert.rho;
    in.tau = r.tau;
    in.margin = r.final_cert.margin;
    in.lipschitz_dynamics = 1.0;
    in.lipschitz_policy = 1.0;
    in.breaks = r.num_breaks();
    in.batches = r.num_batches();
    in.horizon = r.horizon;
    in.x0_norm = r.state_norms.front();
    in.pi0_bar = 0.0;
    const double bound = theoretical_l1_bound(in);
    const double s1 = finite_gain_sums(r).s1;
    ++checked;
    if (!(s1 <= bound)) ++violations;
    worst = std::max(worst, s1 / bound);
  }
  return {checked == f.iss.size() && violations == 0,
          fmt("%zu/%zu completed runs checked, %zu violations, max S1/bound %.3g", checked, f.iss.size(), violations,
              worst)};
}

double mean_regret(const ExperimentConfig& cfg, Algorithm alg) {
  const Experiment e(cfg);
  return summarize(alg, e.run_trials(alg)).regret.mean_regret;
}

Verdict criterion_regret_slope() {
  std::vector<double> xs, ys;
  std::string detail;
  for (int k = 12; k <= 16; ++k) {
    ExperimentConfig cfg = with_trials(Preset::kScalarB, 100);
    cfg.horizon = std::size_t{1} << k;
    const double r = mean_regret(cfg, Algorithm::kExp3Iss);
    xs.push_back(std::log(static_cast<double>(cfg.horizon)));
    ys.push_back(std::log(r));
    detail += fmt("T=2^%d: %.4g; ", k, r);
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = num / den;
  return {slope >= 0.55 && slope <= 0.85, detail + fmt("slope %.3f, required [0.55, 0.85]", slope)};
}

Verdict criterion_fbs_linear() {
  // Several certified arms of different cost plus two destabilizers.
  ExperimentConfig base = with_trials(Preset::kScalarB, 100);
  base.pool.gains = {-1, -5, -20, -50, 1, 2};
  const std::size_t T = 20000;
  base.horizon = T;

  const Experiment e(base);
  std::size_t differs = 0;
  const auto fbs_T = e.run_trials(Algorithm::kFbs);
  for (const TrialOutput& o : fbs_T) {
    if (o.benchmark.best_arm && o.result.episodes.back().arm != *o.benchmark.best_arm) ++differs;
  }
  const double fbs1 = summarize(Algorithm::kFbs, fbs_T).regret.mean_regret;
  const double iss1 = mean_regret(base, Algorithm::kExp3Iss);
  ExperimentConfig doubled = base;
  doubled.horizon = 2 * T;
  const double fbs2 = mean_regret(doubled, Algorithm::kFbs);
  const double iss2 = mean_regret(doubled, Algorithm::kExp3Iss);
  const double fbs_ratio = fbs2 / fbs1;
  const double iss_ratio = iss2 / iss1;
  const bool pass = differs * 2 >= fbs_T.size() && fbs_ratio >= 1.7 && fbs_ratio <= 2.3 && iss_ratio < 1.7;
  return {pass, fmt("fbs settled off the best arm in %zu/%zu, fbs ratio %.3f, exp3iss ratio %.3f", differs,
                    fbs_T.size(), fbs_ratio, iss_ratio)};
}

Verdict criterion_quadrotor() {
  const ExperimentConfig cfg = preset_config(Preset::kQuadrotor);
  const PolicyPool pool = build_quadrotor_pool(cfg.pool.nominal, cfg.pool.scales);
  GeometricPDGains exact = cfg.pool.nominal;
  exact.mass_estimate = cfg.quadrotor.mass;
  exact.inertia_estimate = cfg.quadrotor.inertia;
  const QuadrotorPlant plant(cfg.quadrotor);
  const auto steps = static_cast<std::size_t>(std::lround(10.0 / cfg.quadrotor.dt));
  bool all_reach = true;
  std::string detail = fmt("pool size %zu; ", pool.size());
  for (double angle : {0.0, 0.9, 2.2, 3.6, 5.0}) {
    StateVector s{std::cos(angle), std::sin(angle), 0, 0, 0, 0};
    std::size_t reached = steps + 1;
    for (std::size_t t = 1; t <= steps; ++t) {
      s = plant.step(s, geometric_pd_act(s, exact), Disturbance{0, 0});
      if (std::hypot(s[0], s[1]) < 0.1) {
        reached = t;
        break;
      }
    }
    all_reach = all_reach && reached <= steps;
    detail += reached <= steps ? fmt("%.2fs ", reached * cfg.quadrotor.dt) : std::string("never ");
  }
  return {pool.size() == 81 && all_reach, detail + "to ||(x,y)|| < 0.1"};
}

Verdict criterion_min_batch_length() {
  const std::size_t a = min_batch_length(1.1, 0.995);
  const std::size_t b = min_batch_length(1.0, 0.5);
  return {a == 227 && b == 2, fmt("(1.1, 0.995) -> %zu, (1, 0.5) -> %zu", a, b)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict criterion_determinism() {
  const fs::path root = fs::temp_directory_path() / "switchctl_acceptance_determinism";
  fs::remove_all(root);
  std::size_t files = 0, mismatched = 0;
  for (Preset p : {Preset::kScalarB, Preset::kQuadrotor}) {
    std::vector<fs::path> dirs;
    for (std::size_t w : {std::size_t{1}, std::size_t{4}, std::size_t{1}}) {
      ExperimentConfig cfg = preset_config(p);
      cfg.trials = 8;
      if (p != Preset::kQuadrotor) cfg.horizon = 10000;
      cfg.master_seed = 7;
      cfg.workers = w;
      cfg.output.dir = root / fmt("%s_%zu", std::string(to_string(p)).c_str(), dirs.size());
      compare_algorithms(cfg, {Algorithm::kExp3Iss, Algorithm::kExp3Batch, Algorithm::kFbs});
      dirs.push_back(cfg.output.dir);
    }
    for (const auto& entry : fs::recursive_directory_iterator(dirs[0])) {
      if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
      const fs::path rel = fs::relative(entry.path(), dirs[0]);
      const std::string ref = slurp(entry.path());
      for (std::size_t i = 1; i < dirs.size(); ++i) {
        ++files;
        if (slurp(dirs[i] / rel) != ref) ++mismatched;
      }
    }
  }
  fs::remove_all(root);
  return {files > 0 && mismatched == 0,
          fmt("%zu CSV comparisons across reruns with 1 and 4 workers, %zu differ", files, mismatched)};
}

}  // namespace

int main() {
  report(1, "batch count within ceil((T-M)/tau)+M", criterion_batch_count);
  report(2, "arm distributions are valid and exclude deactivated arms", criterion_distributions);
  report(3, "importance-weighted estimate is unbiased", criterion_unbiased);
  report(4, "replayed envelopes match recorded breaks", criterion_envelope);
  report(5, "pool {-1,0,1}: exp3batch blows up, exp3iss stays bounded", criterion_fig1b);
  report(6, "pool {-1,-0.3,1}: exp3batch spikes above exp3iss", criterion_fig1c);
  report(7, "state l1 norm below the finite-gain bound", criterion_l1_dominance);
  report(8, "exp3iss regret grows like T^(2/3)", criterion_regret_slope);
  report(9, "fbs regret linear, exp3iss sublinear", criterion_fbs_linear);
  report(10, "quadrotor pool size and nominal convergence", criterion_quadrotor);
  report(11, "minimum batch length values", criterion_min_batch_length);
  report(12, "outputs byte-identical across reruns and worker counts", criterion_determinism);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
