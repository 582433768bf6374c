#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>

namespace switchctl {

// Largest vector the testbeds need (planar quadrotor state).
inline constexpr std::size_t kMaxDim = 6;

// Small fixed-capacity real vector. The tag keeps states, controls and
// disturbances from being mixed up at call sites.
template <class Tag>
class SmallVec {
 public:
  SmallVec() = default;
  explicit SmallVec(std::size_t dim) : dim_(dim) { assert(dim <= kMaxDim); }
  SmallVec(std::initializer_list<double> values) : dim_(values.size()) {
    assert(values.size() <= kMaxDim);
    std::size_t i = 0;
    for (double v : values) data_[i++] = v;
  }
  explicit SmallVec(std::span<const double> values) : dim_(values.size()) {
    assert(values.size() <= kMaxDim);
    for (std::size_t i = 0; i < dim_; ++i) data_[i] = values[i];
  }

  std::size_t size() const noexcept { return dim_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() noexcept { return {data_.data(), dim_}; }
  std::span<const double> values() const noexcept { return {data_.data(), dim_}; }

  double norm() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) s += data_[i] * data_[i];
    return std::sqrt(s);
  }

  bool all_finite() const noexcept {
    for (std::size_t i = 0; i < dim_; ++i) {
      if (!std::isfinite(data_[i])) return false;
    }
    return true;
  }

  friend bool operator==(const SmallVec& a, const SmallVec& b) {
    if (a.dim_ != b.dim_) return false;
    for (std::size_t i = 0; i < a.dim_; ++i) {
      if (a.data_[i] != b.data_[i]) return false;
    }
    return true;
  }

 private:
  std::array<double, kMaxDim> data_{};
  std::size_t dim_ = 0;
};

struct StateTag {};
struct ControlTag {};
struct DisturbanceTag {};

using StateVector = SmallVec<StateTag>;
using ControlVector = SmallVec<ControlTag>;
using Disturbance = SmallVec<DisturbanceTag>;

}  // namespace switchctl
