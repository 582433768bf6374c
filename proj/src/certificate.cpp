#include "switchctl/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "switchctl/error.hpp"

namespace switchctl {

void CertParams::validate() const {
  if (!(kappa >= 1.0 && std::isfinite(kappa))) {
    throw SwitchError(ErrorCode::kInvalidArgument, "certificate kappa must be finite and >= 1");
  }
  if (!(rho > 0.0 && rho < 1.0)) throw SwitchError(ErrorCode::kInvalidArgument, "certificate rho must be in (0, 1)");
  if (!(margin > 0.0 && std::isfinite(margin))) {
    throw SwitchError(ErrorCode::kInvalidArgument, "certificate margin must be finite and > 0");
  }
}

void EscalationRule::validate() const {
  if (!enabled) return;
  if (!(d_kappa > 0 && std::isfinite(d_kappa) && d_margin > 0 && std::isfinite(d_margin))) {
    throw SwitchError(ErrorCode::kInvalidArgument, "escalation steps must be finite and > 0");
  }
}

bool check_envelope(double next_norm, double anchor_norm, std::size_t steps_since_anchor, const CertParams& p) {
  const double bound = p.kappa * std::pow(p.rho, static_cast<double>(steps_since_anchor)) * anchor_norm + p.margin;
  return next_norm <= bound;
}

std::size_t min_batch_length(double kappa, double rho) {
  CertParams{kappa, rho, 1.0}.validate();
  const double ratio = std::log(2.0 * std::numbers::sqrt2 * kappa) / -std::log(rho);
  return static_cast<std::size_t>(std::max(1.0, std::ceil(ratio)));
}

CertParams escalate(const CertParams& p, const EscalationRule& rule, std::size_t restarts_so_far) {
  if (!rule.enabled || restarts_so_far >= rule.max_restarts) {
    throw SwitchError(ErrorCode::kRestartBudgetExhausted, "no candidate passes any tried certificate");
  }
  CertParams next = p;
  next.kappa += rule.d_kappa;
  next.margin += rule.d_margin;
  next.rho = 0.5 * (1.0 + p.rho);
  return next;
}

}  // namespace switchctl
