#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "switchctl/dynamics.hpp"
#include "switchctl/vector.hpp"

namespace switchctl {

// Candidate controller. Switching algorithms only ever call act().
class Policy {
 public:
  explicit Policy(std::size_t id) : id_(id) {}
  virtual ~Policy() = default;

  std::size_t id() const { return id_; }
  virtual ControlVector act(const StateVector& state) const = 0;
  virtual std::string describe() const = 0;
  // Known Lipschitz constant of act(), if it has a closed form.
  virtual std::optional<double> lipschitz_constant() const { return std::nullopt; }

 private:
  std::size_t id_;
};

using PolicyPool = std::vector<std::shared_ptr<const Policy>>;

// u = K x on the scalar plant.
class LinearGain final : public Policy {
 public:
  LinearGain(std::size_t id, double gain) : Policy(id), gain_(gain) {}
  double gain() const { return gain_; }
  ControlVector act(const StateVector& state) const override { return ControlVector{gain_ * state[0]}; }
  std::string describe() const override;
  std::optional<double> lipschitz_constant() const override;

 private:
  double gain_;
};

struct GeometricPDGains {
  double k_p = 40.0;
  double k_d = 10.0;
  double k_p_theta = 400.0;
  double k_d_theta = 100.0;
  double mass_estimate = 2.0;
  double inertia_estimate = 1.0;
  double arm_length = 1.0;
  double gravity = kGravity;
  double thrust_clip = 1e3;
  double torque_clip = 1e4;

  void validate() const;
};

// Wrap an angle to (-pi, pi].
double wrap_angle(double angle);

// Planar geometric PD law: desired acceleration -> desired thrust vector ->
// desired attitude, then thrust/torque through a clipped two-rotor mixer.
ControlVector geometric_pd_act(const StateVector& state, const GeometricPDGains& gains);

class GeometricPD final : public Policy {
 public:
  GeometricPD(std::size_t id, GeometricPDGains gains);
  const GeometricPDGains& gains() const { return gains_; }
  ControlVector act(const StateVector& state) const override { return geometric_pd_act(state, gains_); }
  std::string describe() const override;

 private:
  GeometricPDGains gains_;
};

// One LinearGain per entry, ids in list order. Throws kEmptyPool on [].
PolicyPool build_scalar_pool(const std::vector<double>& gains);

// Cartesian product of scale factors over (k_p, k_d/k_p, k_p_theta,
// k_d_theta/k_p_theta). k_p varies slowest and the attitude damping ratio
// fastest, so id = ((i_p * S + i_d) * S + i_pt) * S + i_dt for S scales.
// Estimates, arm length and clip limits are copied from the nominal gains.
PolicyPool build_quadrotor_pool(const GeometricPDGains& nominal, const std::vector<double>& scales);

}  // namespace switchctl
