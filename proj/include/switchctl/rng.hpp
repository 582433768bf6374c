#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace switchctl {

// Stream identifiers used when splitting the master seed. Each trial owns one
// stream per purpose so that the disturbance sequence is shared across
// algorithms while the algorithm's own randomness stays independent of it.
enum class StreamId : std::uint64_t {
  kNoise = 0,
  kAlgorithm = 1,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed for (master, trial, stream): splitmix64(master ^ splitmix64(4 * trial + stream)).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t trial, StreamId stream) noexcept;

// Deterministic random stream. The real-valued conversions are done here
// rather than with <random> distributions, whose outputs are
// implementation-defined; results are bitwise reproducible on any platform.
class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n) by rejection (no modulo bias).
  std::size_t uniform_index(std::size_t n);

  // Standard normal via the Marsaglia polar method.
  double standard_normal();

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace switchctl
