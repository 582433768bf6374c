#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "switchctl/certificate.hpp"
#include "switchctl/controllers.hpp"
#include "switchctl/cost.hpp"
#include "switchctl/dynamics.hpp"
#include "switchctl/rng.hpp"

namespace switchctl {

enum class Algorithm { kExp3Iss, kExp3, kExp3Batch, kFbs };

std::string_view to_string(Algorithm algorithm);
// Accepts exp3iss | exp3 | exp3batch | fbs. Throws kInvalidArgument otherwise.
Algorithm parse_algorithm(std::string_view name);

// Distribution over the active arms; arms absent from `arms` carry zero mass.
struct ArmDistribution {
  std::vector<std::size_t> arms;
  std::vector<double> probs;

  double prob_of(std::size_t arm) const;
};

// Exponential-weights learner state over a shrinking active pool.
class BanditState {
 public:
  BanditState(std::size_t num_arms, double eta, std::size_t tau);

  std::size_t num_arms() const { return cumulative_.size(); }
  const std::vector<std::size_t>& active() const { return active_; }
  bool is_active(std::size_t arm) const;
  // Cumulative importance-weighted cost estimate; only meaningful for active arms.
  double estimate(std::size_t arm) const { return cumulative_[arm]; }

  double eta() const { return eta_; }
  void set_eta(double eta);
  std::size_t tau() const { return tau_; }
  std::size_t batch_index() const { return batch_index_; }
  void advance_batch() { ++batch_index_; }

  // Removes the arm and drops its estimate.
  void deactivate(std::size_t arm);
  // G(arm) += g / p_chosen when the arm is still active; no-op otherwise.
  void add_importance_weighted(std::size_t arm, double g, double p_chosen);

 private:
  std::vector<std::size_t> active_;
  std::vector<double> cumulative_;
  double eta_;
  std::size_t tau_;
  std::size_t batch_index_ = 0;
};

// Softmax of -eta * G over the active arms with max-subtraction.
// Throws SwitchError(kEmptyPool) when no arm is active.
ArmDistribution probabilities(const BanditState& state);

// Inverse-CDF draw over the distribution's arm ordering.
std::size_t sample_arm(const ArmDistribution& dist, SeededStream& rng);

// Value-returning form of BanditState::add_importance_weighted.
BanditState update_estimates(BanditState state, std::size_t chosen, double g, double p_chosen);

// Everything a switching run needs besides its own hyperparameters.
struct SwitchingProblem {
  const Plant& plant;
  const PolicyPool& pool;
  const NoiseSequence& noise;  // at least `horizon` entries
  const CostFunction& cost;
  StateVector initial_state;
  std::size_t horizon;  // number of stages t = 0 .. horizon - 1
};

struct SwitchingConfig {
  double eta = 0.01;
  std::size_t tau = 1;
  CertParams cert;
  EscalationRule escalation;
  // Exp3 / Exp3-batch are bounded-loss learners: each stage cost reaches them
  // as min(c, clip_ceiling) / clip_ceiling, a loss in [0, 1].
  double clip_ceiling = 1e9;
  // Optional non-increasing learning-rate schedule indexed by batch; overrides eta.
  std::function<double(std::size_t)> eta_schedule;
  bool record_steps = true;
};

struct EpisodeRecord {
  std::size_t batch = 0;
  std::size_t arm = 0;
  std::size_t t_start = 0;
  std::size_t t_end = 0;  // exclusive
  bool broke = false;
  double cost_sum = 0.0;
  double avg_cost = 0.0;  // cost_sum / tau, even for truncated batches
  double p_chosen = 1.0;
  double anchor_norm = 0.0;
  StateVector anchor;
  CertParams cert;  // certificate in force during the batch
  std::size_t tau = 0;
};

struct DeactivationEvent {
  std::size_t arm = 0;
  std::size_t batch = 0;
  std::size_t t = 0;  // stage whose successor state failed the check
};

enum class TrialOutcome { kCompleted, kDiverged, kEmptyPool, kRestartBudgetExhausted };

std::string_view to_string(TrialOutcome outcome);

struct TrialResult {
  Algorithm algorithm = Algorithm::kExp3Iss;
  std::size_t horizon = 0;
  std::size_t tau = 0;  // initial batch length
  TrialOutcome outcome = TrialOutcome::kCompleted;
  std::size_t restarts = 0;
  CertParams final_cert;

  // Per stage t (size = stages executed).
  std::vector<double> costs;
  std::vector<std::uint32_t> arms;
  std::vector<std::uint32_t> batches;
  std::vector<std::uint32_t> pool_sizes;
  std::vector<std::uint8_t> broke;
  // ||x_t|| for t = 0 .. stages executed (one more than costs when not diverged).
  std::vector<double> state_norms;
  double max_state_norm = 0.0;
  double cost_sum = 0.0;
  std::size_t stages = 0;

  std::vector<EpisodeRecord> episodes;
  std::vector<DeactivationEvent> deactivations;
  std::vector<std::size_t> final_active;
  StateVector final_state;

  bool diverged() const { return outcome == TrialOutcome::kDiverged; }
  std::size_t num_batches() const { return episodes.size(); }
  std::size_t num_breaks() const { return deactivations.size(); }
};

// Called once per batch for the weight-based learners with the distribution
// the arm was drawn from.
using DistributionObserver =
    std::function<void(std::size_t batch, const ArmDistribution& dist, std::size_t chosen)>;

// Requires cfg.tau >= min_batch_length(cert.kappa, cert.rho).
TrialResult run_exp3_iss(const SwitchingProblem& problem, const SwitchingConfig& cfg, SeededStream& rng,
                         const DistributionObserver& observer = {});
// Per-step exponential weights (tau = 1), no certificate.
TrialResult run_exp3(const SwitchingProblem& problem, const SwitchingConfig& cfg, SeededStream& rng,
                     const DistributionObserver& observer = {});
// Batched exponential weights, no certificate.
TrialResult run_exp3_batch(const SwitchingProblem& problem, const SwitchingConfig& cfg, SeededStream& rng,
                           const DistributionObserver& observer = {});
// Permutes the pool once with rng, then always plays the first unfalsified arm.
TrialResult run_fbs(const SwitchingProblem& problem, const SwitchingConfig& cfg, SeededStream& rng);

TrialResult run_algorithm(Algorithm algorithm, const SwitchingProblem& problem, const SwitchingConfig& cfg,
                          SeededStream& rng, const DistributionObserver& observer = {});

struct RecommendedParams {
  double eta;
  std::size_t tau;
};

// eta = c_eta / (N^{2/3} T^{1/3}), tau = max(ceil(T^{1/3} N^{-1/3}), min_batch_length).
RecommendedParams recommended_params(std::size_t num_arms, std::size_t horizon, const CertParams& cert,
                                     double c_eta = 1.0);

}  // namespace switchctl
