#include "switchctl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "switchctl/error.hpp"

namespace switchctl {

double scalar_step(double x, double u, double w) { return x + 0.01 * u + w; }

StateVector ScalarPlant::step(const StateVector& x, const ControlVector& u, const Disturbance& w) const {
  return StateVector{scalar_step(x[0], u[0], w[0])};
}

void QuadrotorParams::validate() const {
  if (!(mass > 0 && inertia > 0 && arm_length > 0 && dt > 0)) {
    throw SwitchError(ErrorCode::kInvalidArgument, "quadrotor mass, inertia, arm_length and dt must be > 0");
  }
  if (!(drag_x >= 0 && drag_theta >= 0)) {
    throw SwitchError(ErrorCode::kInvalidArgument, "quadrotor drag constants must be >= 0");
  }
}

StateVector quadrotor_step(const StateVector& s, const ControlVector& u, const Disturbance& w,
                           const QuadrotorParams& p) {
  const double theta = s[2];
  const double vx = s[3];
  const double vy = s[4];
  const double omega = s[5];

  const double thrust = u[0] + u[1] + w[0];
  const double speed = std::hypot(vx, vy);
  const double ax = (thrust / p.mass) * -std::sin(theta) - (p.drag_x / p.mass) * speed * vx;
  const double ay = (thrust / p.mass) * std::cos(theta) - p.gravity - (p.drag_x / p.mass) * speed * vy;
  const double alpha = (p.arm_length * (u[0] - u[1]) + w[1]) / p.inertia -
                       (p.drag_theta / p.inertia) * std::abs(omega) * omega;

  // Symplectic Euler: velocities first, positions from the new velocities.
  StateVector next(6);
  next[3] = vx + p.dt * ax;
  next[4] = vy + p.dt * ay;
  next[5] = omega + p.dt * alpha;
  next[0] = s[0] + p.dt * next[3];
  next[1] = s[1] + p.dt * next[4];
  next[2] = theta + p.dt * next[5];
  return next;
}

QuadrotorPlant::QuadrotorPlant(QuadrotorParams params) : params_(params) { params_.validate(); }

StateVector QuadrotorPlant::step(const StateVector& x, const ControlVector& u, const Disturbance& w) const {
  return quadrotor_step(x, u, w, params_);
}

DisturbanceSpec DisturbanceSpec::uniform(double lo, double hi, std::size_t dim) {
  DisturbanceSpec spec;
  spec.kind = DisturbanceKind::kUniform;
  spec.lo = lo;
  spec.hi = hi;
  spec.dim = dim;
  return spec;
}

DisturbanceSpec DisturbanceSpec::gaussian(double sigma, double truncation, std::size_t dim) {
  DisturbanceSpec spec;
  spec.kind = DisturbanceKind::kGaussian;
  spec.sigma = sigma;
  spec.truncation = truncation;
  spec.dim = dim;
  return spec;
}

double DisturbanceSpec::channel_bound() const {
  if (kind == DisturbanceKind::kUniform) return std::max(std::abs(lo), std::abs(hi));
  return truncation * sigma;
}

double DisturbanceSpec::w_max() const { return channel_bound() * std::sqrt(static_cast<double>(dim)); }

void DisturbanceSpec::validate() const {
  if (dim == 0 || dim > kMaxDim) {
    throw SwitchError(ErrorCode::kInvalidArgument, "disturbance dimension must be in [1, 6]");
  }
  if (kind == DisturbanceKind::kUniform) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo <= hi)) {
      throw SwitchError(ErrorCode::kInvalidArgument, "uniform disturbance needs finite lo <= hi");
    }
  } else if (!(sigma >= 0 && std::isfinite(sigma) && truncation > 0 && std::isfinite(truncation))) {
    throw SwitchError(ErrorCode::kInvalidArgument, "gaussian disturbance needs sigma >= 0 and truncation > 0");
  }
}

Disturbance sample_disturbance(const DisturbanceSpec& spec, SeededStream& rng) {
  Disturbance w(spec.dim);
  for (std::size_t i = 0; i < spec.dim; ++i) {
    if (spec.kind == DisturbanceKind::kUniform) {
      w[i] = rng.uniform(spec.lo, spec.hi);
    } else {
      const double bound = spec.truncation * spec.sigma;
      double v;
      do {
        v = spec.sigma * rng.standard_normal();
      } while (std::abs(v) > bound);
      w[i] = v;
    }
  }
  return w;
}

NoiseSequence::NoiseSequence(std::size_t dim, std::vector<double> flat) : dim_(dim), flat_(std::move(flat)) {
  if (dim_ == 0 || flat_.size() % dim_ != 0) {
    throw SwitchError(ErrorCode::kInvalidArgument, "noise buffer size is not a multiple of its dimension");
  }
}

NoiseSequence NoiseSequence::generate(const DisturbanceSpec& spec, std::size_t length, SeededStream& rng) {
  spec.validate();
  std::vector<double> flat;
  flat.reserve(length * spec.dim);
  for (std::size_t t = 0; t < length; ++t) {
    const Disturbance w = sample_disturbance(spec, rng);
    for (std::size_t i = 0; i < spec.dim; ++i) flat.push_back(w[i]);
  }
  return NoiseSequence(spec.dim, std::move(flat));
}

NoiseSequence NoiseSequence::zeros(std::size_t dim, std::size_t length) {
  return NoiseSequence(dim, std::vector<double>(dim * length, 0.0));
}

Disturbance NoiseSequence::at(std::size_t t) const {
  return Disturbance(std::span<const double>(flat_.data() + t * dim_, dim_));
}

std::uint64_t NoiseSequence::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : flat_) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace switchctl
