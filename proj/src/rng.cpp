#include "switchctl/rng.hpp"

#include <cmath>
#include <limits>

#include "switchctl/error.hpp"

namespace switchctl {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyPool: return "EMPTY_POOL";
    case ErrorCode::kRestartBudgetExhausted: return "RESTART_BUDGET_EXHAUSTED";
    case ErrorCode::kInfeasible: return "INFEASIBLE";
    case ErrorCode::kConditionViolated: return "CONDITION_VIOLATED";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kConfig: return "CONFIG";
  }
  return "UNKNOWN";
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t trial, StreamId stream) noexcept {
  return splitmix64(master_seed ^ splitmix64(4 * trial + static_cast<std::uint64_t>(stream)));
}

std::size_t SeededStream::uniform_index(std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return static_cast<std::size_t>(r % range);
}

double SeededStream::standard_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

}  // namespace switchctl
