#ifndef SGOPT_COMMON_HPP
#define SGOPT_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgopt {

/// Thrown on violated preconditions (invalid levels, indices, degrees, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

/// Thrown when a linear solve or an iteration fails numerically.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg, double condition_estimate = -1.0)
      : std::runtime_error(msg), condition_estimate_(condition_estimate) {}
  double condition_estimate() const { return condition_estimate_; }

 private:
  double condition_estimate_;
};

/// Binomial coefficient, computed multiplicatively to avoid intermediate
/// overflow for the d = 10 grid-count table checks.
inline std::uint64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (std::int64_t j = 1; j <= k; ++j) {
    result = result * static_cast<std::uint64_t>(n - k + j) / static_cast<std::uint64_t>(j);
  }
  return result;
}

inline std::int64_t ipow2(int e) { return std::int64_t{1} << e; }

// SplitMix64 step, used to derive independent substreams from one seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based stream splitting: every logical task derives its RNG from
/// (seed, stream id), so results do not depend on thread count or interleaving.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    state_ = splitmix64(s);
    if (state_ == 0) state_ = 0x853c49e6748fea9bULL;
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [a, b).
  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  /// Standard normal via Box-Muller.
  double normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 1e-300) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

}  // namespace sgopt

#endif
