#include "switchctl/switching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "switchctl/error.hpp"

namespace switchctl {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kExp3Iss: return "exp3iss";
    case Algorithm::kExp3: return "exp3";
    case Algorithm::kExp3Batch: return "exp3batch";
    case Algorithm::kFbs: return "fbs";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "exp3iss") return Algorithm::kExp3Iss;
  if (name == "exp3") return Algorithm::kExp3;
  if (name == "exp3batch") return Algorithm::kExp3Batch;
  if (name == "fbs") return Algorithm::kFbs;
  throw SwitchError(ErrorCode::kInvalidArgument,
                    "unknown algorithm '" + std::string(name) + "' (expected exp3iss|exp3|exp3batch|fbs)");
}

std::string_view to_string(TrialOutcome outcome) {
  switch (outcome) {
    case TrialOutcome::kCompleted: return "completed";
    case TrialOutcome::kDiverged: return "diverged";
    case TrialOutcome::kEmptyPool: return "empty_pool";
    case TrialOutcome::kRestartBudgetExhausted: return "restart_budget_exhausted";
  }
  return "unknown";
}

double ArmDistribution::prob_of(std::size_t arm) const {
  for (std::size_t i = 0; i < arms.size(); ++i) {
    if (arms[i] == arm) return probs[i];
  }
  return 0.0;
}

BanditState::BanditState(std::size_t num_arms, double eta, std::size_t tau)
    : active_(num_arms), cumulative_(num_arms, 0.0), eta_(eta), tau_(tau) {
  if (num_arms == 0) throw SwitchError(ErrorCode::kEmptyPool, "bandit needs at least one arm");
  if (tau == 0) throw SwitchError(ErrorCode::kInvalidArgument, "batch length must be >= 1");
  set_eta(eta);
  std::iota(active_.begin(), active_.end(), std::size_t{0});
}

void BanditState::set_eta(double eta) {
  if (!(eta > 0.0 && std::isfinite(eta))) throw SwitchError(ErrorCode::kInvalidArgument, "eta must be finite and > 0");
  eta_ = eta;
}

bool BanditState::is_active(std::size_t arm) const {
  return std::find(active_.begin(), active_.end(), arm) != active_.end();
}

void BanditState::deactivate(std::size_t arm) {
  auto it = std::find(active_.begin(), active_.end(), arm);
  if (it == active_.end()) return;
  active_.erase(it);
  cumulative_[arm] = 0.0;
}

void BanditState::add_importance_weighted(std::size_t arm, double g, double p_chosen) {
  if (!is_active(arm)) return;
  const double updated = cumulative_[arm] + g / p_chosen;
  // Clamp so that a vanishing p_chosen cannot push the estimate to infinity.
  cumulative_[arm] = std::min(updated, std::numeric_limits<double>::max());
}

ArmDistribution probabilities(const BanditState& state) {
  const auto& active = state.active();
  if (active.empty()) throw SwitchError(ErrorCode::kEmptyPool, "no active arm left");
  ArmDistribution dist;
  dist.arms = active;
  dist.probs.resize(active.size());

  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t arm : active) lowest = std::min(lowest, state.estimate(arm));
  double total = 0.0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    const double g = state.estimate(active[i]);
    const double gap = (g == lowest) ? 0.0 : g - lowest;
    dist.probs[i] = std::exp(-state.eta() * gap);
    total += dist.probs[i];
  }
  for (double& p : dist.probs) p /= total;
  return dist;
}

std::size_t sample_arm(const ArmDistribution& dist, SeededStream& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  std::size_t last_positive = dist.arms.front();
  for (std::size_t i = 0; i < dist.arms.size(); ++i) {
    if (dist.probs[i] <= 0.0) continue;
    last_positive = dist.arms[i];
    acc += dist.probs[i];
    if (u < acc) return dist.arms[i];
  }
  return last_positive;
}

BanditState update_estimates(BanditState state, std::size_t chosen, double g, double p_chosen) {
  state.add_importance_weighted(chosen, g, p_chosen);
  return state;
}

RecommendedParams recommended_params(std::size_t num_arms, std::size_t horizon, const CertParams& cert,
                                     double c_eta) {
  if (num_arms == 0 || horizon < num_arms) {
    throw SwitchError(ErrorCode::kInvalidArgument, "recommended parameters need T >= N >= 1");
  }
  if (!(c_eta > 0.0)) throw SwitchError(ErrorCode::kInvalidArgument, "c_eta must be > 0");
  const double n = static_cast<double>(num_arms);
  const double t = static_cast<double>(horizon);
  const double eta = c_eta / (std::pow(n, 2.0 / 3.0) * std::cbrt(t));
  const auto learning_tau = static_cast<std::size_t>(std::ceil(std::cbrt(t) / std::cbrt(n)));
  return {eta, std::max(learning_tau, min_batch_length(cert.kappa, cert.rho))};
}

namespace {

enum class Selector { kWeights, kFirstUnfalsified };

struct EngineMode {
  Algorithm algorithm;
  Selector selector;
  bool certified;
  bool clip_learner_cost;
};

void validate_problem(const SwitchingProblem& problem) {
  if (problem.pool.empty()) throw SwitchError(ErrorCode::kEmptyPool, "policy pool is empty");
  if (problem.horizon == 0) throw SwitchError(ErrorCode::kInvalidArgument, "horizon must be >= 1");
  if (problem.noise.size() < problem.horizon) {
    throw SwitchError(ErrorCode::kInvalidArgument, "noise sequence shorter than horizon");
  }
  if (problem.initial_state.size() != problem.plant.state_dim()) {
    throw SwitchError(ErrorCode::kInvalidArgument, "initial state dimension does not match plant");
  }
  if (problem.noise.dim() != problem.plant.disturbance_dim()) {
    throw SwitchError(ErrorCode::kInvalidArgument, "noise dimension does not match plant");
  }
}

TrialResult run_engine(const SwitchingProblem& problem, const SwitchingConfig& cfg, EngineMode mode,
                       std::size_t tau, SeededStream& rng, const DistributionObserver& observer) {
  validate_problem(problem);
  const std::size_t num_arms = problem.pool.size();
  if (mode.certified) {
    cfg.cert.validate();
    cfg.escalation.validate();
  }

  TrialResult result;
  result.algorithm = mode.algorithm;
  result.horizon = problem.horizon;
  result.tau = tau;
  result.final_cert = cfg.cert;

  // FBS works on a random permutation of the pool fixed up front.
  std::vector<std::size_t> order(num_arms);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (mode.selector == Selector::kFirstUnfalsified) {
    for (std::size_t i = num_arms; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }

  CertParams cert = cfg.cert;
  std::size_t batch_tau = tau;
  BanditState bandit(num_arms, cfg.eta, batch_tau);

  const bool record = cfg.record_steps;
  if (record) {
    const std::size_t reserve = problem.horizon;
    result.costs.reserve(reserve);
    result.arms.reserve(reserve);
    result.batches.reserve(reserve);
    result.pool_sizes.reserve(reserve);
    result.broke.reserve(reserve);
    result.state_norms.reserve(reserve + 1);
  }

  StateVector x = problem.initial_state;
  double x_norm = x.norm();
  result.max_state_norm = x_norm;
  if (record) result.state_norms.push_back(x_norm);

  std::size_t t = 0;
  std::size_t batch = 0;
  while (t < problem.horizon) {
    if (bandit.active().empty()) {
      if (mode.certified && cfg.escalation.enabled) {
        try {
          cert = escalate(cert, cfg.escalation, result.restarts);
        } catch (const SwitchError&) {
          result.outcome = TrialOutcome::kRestartBudgetExhausted;
          break;
        }
        ++result.restarts;
        batch_tau = std::max(tau, min_batch_length(cert.kappa, cert.rho));
        bandit = BanditState(num_arms, cfg.eta, batch_tau);
        continue;
      }
      result.outcome = TrialOutcome::kEmptyPool;
      break;
    }

    std::size_t arm = 0;
    double p_chosen = 1.0;
    if (mode.selector == Selector::kFirstUnfalsified) {
      arm = *std::find_if(order.begin(), order.end(), [&](std::size_t a) { return bandit.is_active(a); });
    } else {
      if (cfg.eta_schedule) bandit.set_eta(cfg.eta_schedule(batch));
      const ArmDistribution dist = probabilities(bandit);
      arm = sample_arm(dist, rng);
      p_chosen = dist.prob_of(arm);
      if (observer) observer(batch, dist, arm);
    }

    EpisodeRecord episode;
    episode.batch = batch;
    episode.arm = arm;
    episode.t_start = t;
    episode.p_chosen = p_chosen;
    episode.anchor = x;
    episode.anchor_norm = x_norm;
    episode.cert = cert;
    episode.tau = batch_tau;

    const auto pool_size = static_cast<std::uint32_t>(bandit.active().size());
    const std::size_t batch_end = std::min(t + batch_tau, problem.horizon);
    const Policy& policy = *problem.pool[arm];
    double learner_sum = 0.0;
    bool diverged = false;
    while (t < batch_end) {
      const ControlVector u = policy.act(x);
      const double c = problem.cost(t, x, u);
      const StateVector next = problem.plant.step(x, u, problem.noise.at(t));
      const double next_norm = next.norm();

      episode.cost_sum += c;
      learner_sum += mode.clip_learner_cost ? std::min(c, cfg.clip_ceiling) / cfg.clip_ceiling : c;
      if (record) {
        result.costs.push_back(c);
        result.arms.push_back(static_cast<std::uint32_t>(arm));
        result.batches.push_back(static_cast<std::uint32_t>(batch));
        result.pool_sizes.push_back(pool_size);
        result.broke.push_back(0);
      }
      ++t;

      if (!std::isfinite(next_norm) || next_norm > kOverflowGuard) {
        result.max_state_norm = std::isfinite(next_norm) ? std::max(result.max_state_norm, next_norm)
                                                         : std::numeric_limits<double>::infinity();
        diverged = true;
        break;
      }
      x = next;
      x_norm = next_norm;
      result.max_state_norm = std::max(result.max_state_norm, x_norm);
      if (record) result.state_norms.push_back(x_norm);

      if (mode.certified && !check_envelope(x_norm, episode.anchor_norm, t - episode.t_start, cert)) {
        episode.broke = true;
        if (record) result.broke.back() = 1;
        break;
      }
    }

    episode.t_end = t;
    episode.avg_cost = episode.cost_sum / static_cast<double>(batch_tau);
    result.cost_sum += episode.cost_sum;
    result.episodes.push_back(episode);
    if (diverged) {
      result.outcome = TrialOutcome::kDiverged;
      break;
    }

    if (episode.broke) {
      bandit.deactivate(arm);
      result.deactivations.push_back({arm, batch, t - 1});
    }
    if (mode.selector == Selector::kWeights) {
      const double g = (mode.clip_learner_cost ? learner_sum : episode.cost_sum) / static_cast<double>(batch_tau);
      bandit.add_importance_weighted(arm, g, p_chosen);
    }
    bandit.advance_batch();
    ++batch;
  }

  result.stages = t;
  result.final_cert = cert;
  result.final_active = bandit.active();
  result.final_state = x;
  return result;
}

}  // namespace

TrialResult run_exp3_iss(const SwitchingProblem& problem, const SwitchingConfig& cfg, SeededStream& rng,
                         const DistributionObserver& observer) {
  cfg.cert.validate();
  const std::size_t required = min_batch_length(cfg.cert.kappa, cfg.cert.rho);
  if (cfg.tau < required) {
    throw SwitchError(ErrorCode::kInvalidArgument, "batch length " + std::to_string(cfg.tau) +
                                                       " is below the stability requirement " +
                                                       std::to_string(required));
  }
  return run_engine(problem, cfg, {Algorithm::kExp3Iss, Selector::kWeights, true, false}, cfg.tau, rng, observer);
}

TrialResult run_exp3(const SwitchingProblem& problem, const SwitchingConfig& cfg, SeededStream& rng,
                     const DistributionObserver& observer) {
  return run_engine(problem, cfg, {Algorithm::kExp3, Selector::kWeights, false, true}, 1, rng, observer);
}

TrialResult run_exp3_batch(const SwitchingProblem& problem, const SwitchingConfig& cfg, SeededStream& rng,
                           const DistributionObserver& observer) {
  return run_engine(problem, cfg, {Algorithm::kExp3Batch, Selector::kWeights, false, true}, cfg.tau, rng,
                    observer);
}

TrialResult run_fbs(const SwitchingProblem& problem, const SwitchingConfig& cfg, SeededStream& rng) {
  return run_engine(problem, cfg, {Algorithm::kFbs, Selector::kFirstUnfalsified, true, false}, cfg.tau, rng, {});
}

TrialResult run_algorithm(Algorithm algorithm, const SwitchingProblem& problem, const SwitchingConfig& cfg,
                          SeededStream& rng, const DistributionObserver& observer) {
  switch (algorithm) {
    case Algorithm::kExp3Iss: return run_exp3_iss(problem, cfg, rng, observer);
    case Algorithm::kExp3: return run_exp3(problem, cfg, rng, observer);
    case Algorithm::kExp3Batch: return run_exp3_batch(problem, cfg, rng, observer);
    case Algorithm::kFbs: return run_fbs(problem, cfg, rng);
  }
  throw SwitchError(ErrorCode::kInvalidArgument, "unknown algorithm");
}

}  // namespace switchctl
