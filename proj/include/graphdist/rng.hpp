#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace graphdist {

/// Deterministic random stream. mt19937_64 is fully pinned by the standard;
/// the distribution helpers are hand-rolled (std:: distributions are
/// implementation-defined) so identical seeds give identical streams on
/// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = eng_();
      if (r >= threshold) return r % n;
    }
  }

  /// Fisher-Yates with the unbiased index sampler.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Derive an independent substream (order of fork() calls is part of the
  /// deterministic contract).
  Rng fork() { return Rng(eng_()); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace graphdist
