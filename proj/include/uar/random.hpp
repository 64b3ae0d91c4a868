#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace uar {

/**
 * @brief Deterministic random stream identified by a seed and a path of tags.
 *
 * Child streams obtained with derive() depend only on the parent's key, never
 * on how many numbers the parent has already produced. Replicate r of a cell
 * can therefore be regenerated in isolation, and parallel schedules give the
 * same numbers as serial ones.
 */
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  [[nodiscard]] RandomStream derive(std::uint64_t tag) const;
  [[nodiscard]] RandomStream derive(std::initializer_list<std::uint64_t> tags) const;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  /// Unit-rate exponential.
  double exponential();
  double normal();
  /// +1 or -1 with probability 1/2 each.
  int sign();
  /// Uniform integer on [0, n).
  std::size_t index(std::size_t n);
  std::uint64_t bits() { return engine_(); }

  [[nodiscard]] const std::vector<std::uint64_t>& key() const { return key_; }

 private:
  explicit RandomStream(std::vector<std::uint64_t> key);

  std::vector<std::uint64_t> key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Hash used to mix stream keys and to fold doubles (alpha, theta) into tags.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t tag_of(double value);

}  // namespace uar
