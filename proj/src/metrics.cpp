#include "switchctl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "switchctl/error.hpp"

namespace switchctl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double total_cost(const TrialResult& trial) { return trial.diverged() ? kInf : trial.cost_sum; }

FixedPolicyRollout rollout_fixed_policy(const Plant& plant, const Policy& policy, const NoiseSequence& noise,
                                        const CostFunction& cost, const StateVector& x0, std::size_t horizon,
                                        const CertParams& cert, bool record_costs) {
  if (noise.size() < horizon) throw SwitchError(ErrorCode::kInvalidArgument, "noise sequence shorter than horizon");
  FixedPolicyRollout out;
  if (record_costs) out.costs.reserve(horizon);
  StateVector x = x0;
  const double anchor_norm = x0.norm();
  out.state_norm_sum = anchor_norm;
  for (std::size_t t = 0; t < horizon; ++t) {
    const ControlVector u = policy.act(x);
    const double c = cost(t, x, u);
    out.total_cost += c;
    if (record_costs) out.costs.push_back(c);
    x = plant.step(x, u, noise.at(t));
    const double n = x.norm();
    if (!std::isfinite(n) || n > kOverflowGuard) {
      out.diverged = true;
      out.certified = false;
      out.total_cost = kInf;
      break;
    }
    out.state_norm_sum += n;
    if (out.certified && !check_envelope(n, anchor_norm, t + 1, cert)) out.certified = false;
  }
  return out;
}

double BenchmarkSet::value() const {
  if (!best_arm) throw SwitchError(ErrorCode::kInfeasible, "no candidate satisfied the certificate on this noise");
  return entries[*best_arm].total_cost;
}

BenchmarkSet benchmark_costs(const Plant& plant, const PolicyPool& pool, const NoiseSequence& noise,
                             const CertParams& cert, const CostFunction& cost, const StateVector& x0,
                             std::size_t horizon) {
  BenchmarkSet set;
  set.entries.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const FixedPolicyRollout r = rollout_fixed_policy(plant, *pool[i], noise, cost, x0, horizon, cert);
    set.entries.push_back({i, r.total_cost, r.certified});
    if (r.certified && (!set.best_arm || r.total_cost < set.entries[*set.best_arm].total_cost)) set.best_arm = i;
  }
  return set;
}

double policy_regret(std::span<const TrialResult> runs, double benchmark) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const TrialResult& r : runs) {
    if (r.diverged()) continue;
    sum += r.cost_sum;
    ++n;
  }
  if (n == 0) throw SwitchError(ErrorCode::kInvalidArgument, "policy regret needs at least one non-diverged run");
  return sum / static_cast<double>(n) - benchmark;
}

double aux_regret(const TrialResult& trial, std::size_t comparator, const Plant& plant, const PolicyPool& pool,
                  const NoiseSequence& noise, const CostFunction& cost) {
  if (comparator >= pool.size()) throw SwitchError(ErrorCode::kInvalidArgument, "comparator arm out of range");
  const Policy& policy = *pool[comparator];
  double total = 0.0;
  for (const EpisodeRecord& ep : trial.episodes) {
    if (ep.arm == comparator) continue;
    StateVector x = ep.anchor;
    double counterfactual = 0.0;
    for (std::size_t t = ep.t_start; t < ep.t_end; ++t) {
      const ControlVector u = policy.act(x);
      counterfactual += cost(t, x, u);
      x = plant.step(x, u, noise.at(t));
    }
    total += ep.cost_sum - counterfactual;
  }
  return total;
}

FiniteGainSums finite_gain_sums(std::span<const double> state_norms) {
  FiniteGainSums s;
  for (double n : state_norms) {
    const double sq = n * n;
    s.s1 += n;
    s.s2 += sq;
    s.s4 += sq * sq;
  }
  return s;
}

L1BoundCoefficients l1_bound_coefficients(const L1BoundInputs& in) {
  const double decay = in.kappa * std::pow(in.rho, static_cast<double>(in.tau));
  if (!(decay < 1.0)) throw SwitchError(ErrorCode::kConditionViolated, "kappa * rho^tau must be < 1");
  const double gamma = in.lipschitz_dynamics * (1.0 + in.lipschitz_policy) * in.kappa;
  if (!(gamma > 1.0)) throw SwitchError(ErrorCode::kConditionViolated, "L_f (1 + L_pi) kappa must be > 1");
  L1BoundCoefficients c;
  c.gamma = gamma;
  c.alpha1 = in.kappa / ((1.0 - in.rho) * (1.0 - decay));
  c.alpha2 = c.alpha1 * gamma / (gamma - 1.0);
  c.alpha3 = c.alpha2 * (gamma / (1.0 - decay) + in.lipschitz_dynamics * (2.0 + in.lipschitz_policy));
  return c;
}

double theoretical_l1_bound(const L1BoundInputs& in) {
  const L1BoundCoefficients c = l1_bound_coefficients(in);
  const double growth = std::pow(c.gamma, static_cast<double>(in.breaks));
  return in.margin * (static_cast<double>(in.horizon) + c.alpha1 * static_cast<double>(in.batches)) +
         c.alpha2 * growth * in.x0_norm + c.alpha3 * growth * (in.margin + in.pi0_bar);
}

std::size_t batch_count_bound(std::size_t horizon, std::size_t tau, std::size_t breaks) {
  if (tau == 0) throw SwitchError(ErrorCode::kInvalidArgument, "tau must be >= 1");
  if (breaks > horizon) throw SwitchError(ErrorCode::kInvalidArgument, "breaks cannot exceed the horizon");
  const std::size_t rest = horizon - breaks;
  return (rest + tau - 1) / tau + breaks;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

RegretReport make_regret_report(std::span<const double> algorithm_costs, std::span<const BenchmarkSet> benchmarks) {
  if (algorithm_costs.size() != benchmarks.size()) {
    throw SwitchError(ErrorCode::kInvalidArgument, "one benchmark set is needed per trial");
  }
  RegretReport report;
  std::vector<double> finite;
  for (std::size_t i = 0; i < algorithm_costs.size(); ++i) {
    const double alg = algorithm_costs[i];
    const BenchmarkSet& bench = benchmarks[i];
    report.algorithm_costs.push_back(alg);
    report.benchmark_arms.push_back(bench.best_arm);
    report.benchmark_costs.push_back(bench.feasible() ? bench.value() : kInf);
    if (!std::isfinite(alg)) ++report.diverged;
    if (!bench.feasible()) ++report.infeasible;
    const double regret = (std::isfinite(alg) && bench.feasible()) ? alg - bench.value() : kInf;
    report.regrets.push_back(regret);
    if (std::isfinite(regret)) finite.push_back(regret);
  }
  if (!finite.empty()) {
    report.mean_regret = std::accumulate(finite.begin(), finite.end(), 0.0) / static_cast<double>(finite.size());
    report.p75_lo = percentile(finite, 0.125);
    report.p75_hi = percentile(finite, 0.875);
    report.min_regret = *std::min_element(finite.begin(), finite.end());
    report.max_regret = *std::max_element(finite.begin(), finite.end());
  } else {
    report.mean_regret = report.p75_lo = report.p75_hi = report.min_regret = report.max_regret =
        std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

}  // namespace switchctl
