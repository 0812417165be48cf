#ifndef STREAMFILTER_RNG_HPP_
#define STREAMFILTER_RNG_HPP_

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace streamfilter {

/// Hash-mix a parent key with a child label. Used to derive independent
/// stream keys hierarchically: seed -> time -> chain -> purpose.
std::uint64_t derive_key(std::uint64_t parent, std::uint64_t label);

/// Stream labels so that different phases of one update never share draws.
enum class Purpose : std::uint64_t {
  data = 1,
  init = 2,
  filter = 3,
  jump = 4,
  transition = 5,
  resample = 6,
  gibbs = 7,
  tune = 8,
};

/// Counter-based generator (Philox4x32-10). The output is a pure function of
/// (key, draw index), so any chain can be reproduced without replaying the
/// others. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key = 0) : key_(key) {}

  /// Stream keyed by a path of labels below `seed`.
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Uniform integer in [0, n). Rejection on the raw 64-bit stream; no
  /// floating-point index arithmetic.
  std::uint64_t index(std::uint64_t n);
  /// Gamma with shape k and scale theta.
  double gamma(double shape, double scale);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;  // 32-bit words consumed from block_
  std::normal_distribution<double> normal_;
};

}  // namespace streamfilter

#endif  // STREAMFILTER_RNG_HPP_
