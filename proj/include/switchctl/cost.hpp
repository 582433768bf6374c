#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "switchctl/vector.hpp"

namespace switchctl {

// Stage cost c(t, x, u) >= 0.
class CostFunction {
 public:
  using Fn = std::function<double(std::size_t, const StateVector&, const ControlVector&)>;

  CostFunction(std::string name, Fn fn, double zero_cost_bound = 0.0)
      : name_(std::move(name)), fn_(std::move(fn)), zero_cost_bound_(zero_cost_bound) {}

  double operator()(std::size_t t, const StateVector& x, const ControlVector& u) const { return fn_(t, x, u); }
  const std::string& name() const { return name_; }
  // Upper bound on c(t, 0, 0).
  double zero_cost_bound() const { return zero_cost_bound_; }

  // x^2 on the scalar plant.
  static CostFunction scalar_quadratic();
  // ||(x, y)||^2 on the planar quadrotor.
  static CostFunction position_quadratic();

 private:
  std::string name_;
  Fn fn_;
  double zero_cost_bound_;
};

inline CostFunction CostFunction::scalar_quadratic() {
  return CostFunction("scalar_quadratic",
                      [](std::size_t, const StateVector& x, const ControlVector&) { return x[0] * x[0]; });
}

inline CostFunction CostFunction::position_quadratic() {
  return CostFunction("position_quadratic", [](std::size_t, const StateVector& x, const ControlVector&) {
    return x[0] * x[0] + x[1] * x[1];
  });
}

}  // namespace switchctl
