#pragma once

#include <array>
#include <cstdint>

namespace platelat {

/// Counter-based Philox4x32-10 generator keyed by (seed, stream).
///
/// Output depends only on the key and the number of draws, so a chain is reproducible from its
/// seed on any platform. Distinct streams are statistically independent; replicas use one each.
class Philox {
 public:
  using result_type = std::uint64_t;

  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n); n > 0. Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal deviate (Box-Muller, no caching so the stream stays position-determined).
  double normal();

  std::uint64_t draws() const { return draws_; }

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  std::uint64_t draws_ = 0;
};

}  // namespace platelat
