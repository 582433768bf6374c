#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "switchctl/rng.hpp"
#include "switchctl/vector.hpp"

namespace switchctl {

// A trial is frozen as diverged the first step the state norm exceeds this.
inline constexpr double kOverflowGuard = 1e12;

inline constexpr double kGravity = 9.81;

// Discrete-time plant x_{t+1} = f(x_t, u_t, w_t).
class Plant {
 public:
  virtual ~Plant() = default;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t control_dim() const = 0;
  virtual std::size_t disturbance_dim() const = 0;
  virtual StateVector step(const StateVector& x, const ControlVector& u, const Disturbance& w) const = 0;
};

double scalar_step(double x, double u, double w);

// x_{t+1} = x_t + 0.01 u_t + w_t
class ScalarPlant final : public Plant {
 public:
  std::size_t state_dim() const override { return 1; }
  std::size_t control_dim() const override { return 1; }
  std::size_t disturbance_dim() const override { return 1; }
  StateVector step(const StateVector& x, const ControlVector& u, const Disturbance& w) const override;
};

struct QuadrotorParams {
  double mass = 1.0;
  double inertia = 1.0;
  double arm_length = 1.0;
  double drag_x = 1e-4;
  double drag_theta = 1e-8;
  double gravity = kGravity;
  double dt = 0.01;

  // Throws SwitchError(kInvalidArgument) on non-physical values.
  void validate() const;
};

// State ordering: (x, y, theta, xdot, ydot, thetadot).
// Control: propeller thrusts (u1, u2). Disturbance: (thrust, torque).
// Positive total thrust points along (-sin theta, cos theta), i.e. up at theta = 0.
StateVector quadrotor_step(const StateVector& s, const ControlVector& u, const Disturbance& w,
                           const QuadrotorParams& p);

class QuadrotorPlant final : public Plant {
 public:
  explicit QuadrotorPlant(QuadrotorParams params);
  const QuadrotorParams& params() const { return params_; }
  std::size_t state_dim() const override { return 6; }
  std::size_t control_dim() const override { return 2; }
  std::size_t disturbance_dim() const override { return 2; }
  StateVector step(const StateVector& x, const ControlVector& u, const Disturbance& w) const override;

 private:
  QuadrotorParams params_;
};

enum class DisturbanceKind { kUniform, kGaussian };

struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::kUniform;
  std::size_t dim = 1;
  double lo = -0.3;       // uniform
  double hi = 0.7;        // uniform
  double sigma = 0.1;     // gaussian
  double truncation = 4;  // gaussian: entries resampled until |w_i| <= truncation * sigma

  static DisturbanceSpec uniform(double lo, double hi, std::size_t dim = 1);
  static DisturbanceSpec gaussian(double sigma, double truncation, std::size_t dim);

  // Per-channel bound on |w_i|.
  double channel_bound() const;
  // Euclidean bound on the whole vector.
  double w_max() const;
  void validate() const;
};

Disturbance sample_disturbance(const DisturbanceSpec& spec, SeededStream& rng);

// Pre-drawn disturbance sequence w_0 .. w_{len-1}, shared by an algorithm run
// and all of its benchmark rollouts.
class NoiseSequence {
 public:
  NoiseSequence() = default;
  NoiseSequence(std::size_t dim, std::vector<double> flat);

  static NoiseSequence generate(const DisturbanceSpec& spec, std::size_t length, SeededStream& rng);
  static NoiseSequence zeros(std::size_t dim, std::size_t length);

  std::size_t size() const { return dim_ == 0 ? 0 : flat_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  Disturbance at(std::size_t t) const;

  // FNV-1a over the raw bytes; equal sequences give equal checksums.
  std::uint64_t checksum() const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> flat_;
};

}  // namespace switchctl
