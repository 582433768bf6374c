#pragma once

#include <cstddef>

namespace switchctl {

// Exponential input-to-state envelope: ||x_{a+k}|| <= kappa * rho^k * ||x_a|| + margin,
// where margin stands for beta * w_max.
struct CertParams {
  double kappa = 1.5;
  double rho = 0.995;
  double margin = 75.0;

  // Throws SwitchError(kInvalidArgument) unless kappa >= 1, 0 < rho < 1, margin > 0.
  void validate() const;
};

struct EscalationRule {
  bool enabled = false;
  double d_kappa = 0.5;
  double d_margin = 10.0;
  std::size_t max_restarts = 0;

  void validate() const;
};

// Inclusive: equality passes.
bool check_envelope(double next_norm, double anchor_norm, std::size_t steps_since_anchor, const CertParams& p);

// Smallest integer tau with tau >= log(2 sqrt(2) kappa) / (-log rho).
std::size_t min_batch_length(double kappa, double rho);

// kappa += d_kappa, margin += d_margin, rho <- (1 + rho) / 2.
// `restarts_so_far` is the number of escalations already applied; throws
// SwitchError(kRestartBudgetExhausted) once it reaches rule.max_restarts.
CertParams escalate(const CertParams& p, const EscalationRule& rule, std::size_t restarts_so_far);

}  // namespace switchctl
