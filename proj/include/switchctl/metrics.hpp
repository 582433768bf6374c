#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "switchctl/certificate.hpp"
#include "switchctl/controllers.hpp"
#include "switchctl/cost.hpp"
#include "switchctl/dynamics.hpp"
#include "switchctl/switching.hpp"

namespace switchctl {

// Sum of recorded stage costs; +infinity for a diverged trial.
double total_cost(const TrialResult& trial);

struct FixedPolicyRollout {
  double total_cost = 0.0;  // +infinity when diverged
  bool certified = true;    // envelope anchored at t = 0 held for every state
  bool diverged = false;
  double state_norm_sum = 0.0;
  std::vector<double> costs;  // filled only when requested
};

// Runs one policy for the whole horizon on the given noise.
FixedPolicyRollout rollout_fixed_policy(const Plant& plant, const Policy& policy, const NoiseSequence& noise,
                                        const CostFunction& cost, const StateVector& x0, std::size_t horizon,
                                        const CertParams& cert, bool record_costs = false);

struct BenchmarkEntry {
  std::size_t arm = 0;
  double total_cost = 0.0;
  bool certified = false;
};

struct BenchmarkSet {
  std::vector<BenchmarkEntry> entries;
  std::optional<std::size_t> best_arm;  // lowest-cost certified arm, ties to the lowest index

  bool feasible() const { return best_arm.has_value(); }
  // Throws SwitchError(kInfeasible) when no arm certified.
  double value() const;
};

// Every candidate run fixed from t = 0 on the same disturbance sequence.
BenchmarkSet benchmark_costs(const Plant& plant, const PolicyPool& pool, const NoiseSequence& noise,
                             const CertParams& cert, const CostFunction& cost, const StateVector& x0,
                             std::size_t horizon);

// Mean total cost of the non-diverged runs minus the benchmark. Negative
// values are returned as-is. Throws kInvalidArgument if every run diverged.
double policy_regret(std::span<const TrialResult> runs, double benchmark);

// Batchwise counterfactual comparison: the comparator is replayed from each
// batch anchor with the same disturbances for the same number of stages.
// Returns sum over batches of (realized batch cost - comparator batch cost).
double aux_regret(const TrialResult& trial, std::size_t comparator, const Plant& plant, const PolicyPool& pool,
                  const NoiseSequence& noise, const CostFunction& cost);

struct FiniteGainSums {
  double s1 = 0.0;
  double s2 = 0.0;
  double s4 = 0.0;
};

FiniteGainSums finite_gain_sums(std::span<const double> state_norms);
inline FiniteGainSums finite_gain_sums(const TrialResult& trial) { return finite_gain_sums(trial.state_norms); }

struct L1BoundInputs {
  double kappa = 1.0;
  double rho = 0.5;
  std::size_t tau = 1;
  double margin = 1.0;
  double lipschitz_dynamics = 1.0;
  double lipschitz_policy = 1.0;
  std::size_t breaks = 0;   // M
  std::size_t batches = 0;  // J
  std::size_t horizon = 0;  // T
  double x0_norm = 0.0;
  double pi0_bar = 0.0;
};

struct L1BoundCoefficients {
  double gamma;
  double alpha1;
  double alpha2;
  double alpha3;
};

// Throws SwitchError(kConditionViolated) if kappa rho^tau >= 1 or gamma <= 1.
L1BoundCoefficients l1_bound_coefficients(const L1BoundInputs& in);
double theoretical_l1_bound(const L1BoundInputs& in);

// ceil((T - M) / tau) + M
std::size_t batch_count_bound(std::size_t horizon, std::size_t tau, std::size_t breaks);

// Linear-interpolation percentile of an unsorted sample, q in [0, 1].
double percentile(std::vector<double> values, double q);

struct RegretReport {
  std::vector<double> algorithm_costs;  // per trial, +inf when diverged
  std::vector<double> benchmark_costs;  // per trial, +inf when infeasible
  std::vector<std::optional<std::size_t>> benchmark_arms;
  std::vector<double> regrets;  // per trial, +inf when diverged or infeasible
  std::size_t diverged = 0;
  std::size_t infeasible = 0;
  double mean_regret = 0.0;  // over trials with a finite regret
  double p75_lo = 0.0;
  double p75_hi = 0.0;
  double min_regret = 0.0;
  double max_regret = 0.0;
};

RegretReport make_regret_report(std::span<const double> algorithm_costs, std::span<const BenchmarkSet> benchmarks);

}  // namespace switchctl
