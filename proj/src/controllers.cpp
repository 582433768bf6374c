#include "switchctl/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "switchctl/error.hpp"

namespace switchctl {

std::string LinearGain::describe() const {
  std::ostringstream os;
  os << "K=" << gain_;
  return os.str();
}

std::optional<double> LinearGain::lipschitz_constant() const { return std::abs(gain_); }

void GeometricPDGains::validate() const {
  if (!(k_p > 0 && k_d > 0 && k_p_theta > 0 && k_d_theta > 0)) {
    throw SwitchError(ErrorCode::kInvalidArgument, "geometric PD gains must be > 0");
  }
  if (!(thrust_clip > 0 && torque_clip > 0)) {
    throw SwitchError(ErrorCode::kInvalidArgument, "geometric PD clip limits must be > 0");
  }
  if (!(arm_length > 0 && mass_estimate > 0 && inertia_estimate > 0)) {
    throw SwitchError(ErrorCode::kInvalidArgument, "geometric PD estimates and arm length must be > 0");
  }
}

double wrap_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

namespace {

double clip(double v, double limit) { return std::clamp(v, -limit, limit); }

}  // namespace

ControlVector geometric_pd_act(const StateVector& s, const GeometricPDGains& g) {
  const double theta = s[2];
  const double acc_x = -g.k_p * s[0] - g.k_d * s[3];
  const double acc_y = -g.k_p * s[1] - g.k_d * s[4];
  const double thrust_x = acc_x;
  const double thrust_y = acc_y + g.gravity;

  // Attitude whose thrust axis (-sin, cos) is aligned with the desired thrust.
  const double theta_des = std::atan2(-thrust_x, thrust_y);
  const double thrust = g.mass_estimate * (-std::sin(theta) * thrust_x + std::cos(theta) * thrust_y);

  const double angle_error = wrap_angle(theta - theta_des);
  const double alpha_des = -g.k_p_theta * angle_error - g.k_d_theta * s[5];
  const double torque = g.inertia_estimate * alpha_des;

  // [1 1; r -r] (u1, u2) = (h, tau)
  const double h = clip(thrust, g.thrust_clip);
  const double tau = clip(torque, g.torque_clip) / g.arm_length;
  return ControlVector{0.5 * (h + tau), 0.5 * (h - tau)};
}

GeometricPD::GeometricPD(std::size_t id, GeometricPDGains gains) : Policy(id), gains_(gains) {
  gains_.validate();
}

std::string GeometricPD::describe() const {
  std::ostringstream os;
  os << "kp=" << gains_.k_p << " kd=" << gains_.k_d << " kpt=" << gains_.k_p_theta << " kdt=" << gains_.k_d_theta;
  return os.str();
}

PolicyPool build_scalar_pool(const std::vector<double>& gains) {
  if (gains.empty()) throw SwitchError(ErrorCode::kEmptyPool, "scalar pool needs at least one gain");
  PolicyPool pool;
  pool.reserve(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i) pool.push_back(std::make_shared<LinearGain>(i, gains[i]));
  return pool;
}

PolicyPool build_quadrotor_pool(const GeometricPDGains& nominal, const std::vector<double>& scales) {
  nominal.validate();
  if (scales.empty()) throw SwitchError(ErrorCode::kEmptyPool, "quadrotor pool needs at least one scale");
  const double damping_ratio = nominal.k_d / nominal.k_p;
  const double attitude_damping_ratio = nominal.k_d_theta / nominal.k_p_theta;

  PolicyPool pool;
  pool.reserve(scales.size() * scales.size() * scales.size() * scales.size());
  for (double s_p : scales) {
    for (double s_d : scales) {
      for (double s_pt : scales) {
        for (double s_dt : scales) {
          GeometricPDGains g = nominal;
          g.k_p = s_p * nominal.k_p;
          g.k_d = g.k_p * s_d * damping_ratio;
          g.k_p_theta = s_pt * nominal.k_p_theta;
          g.k_d_theta = g.k_p_theta * s_dt * attitude_damping_ratio;
          pool.push_back(std::make_shared<GeometricPD>(pool.size(), g));
        }
      }
    }
  }
  return pool;
}

}  // namespace switchctl
