#pragma once

#include <cstdint>
#include <random>

namespace upscaler {

/// SplitMix64 finalizer. Used to derive independent sub-stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Sub-stream derivation: seed of stream `stream` under parent `seed` is
/// splitmix64(seed ^ splitmix64(stream + 0x9E3779B97F4A7C15)).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// Seedable, splittable generator. The engine is std::mt19937_64 (its output
// sequence is fixed by the standard); the distributions below are implemented
// here so that results are bit-identical across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent generator for sub-stream `stream`.
  Rng split(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi], unbiased (rejection sampling).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p) { return uniform() < p; }
  /// Standard normal via the Box-Muller transform (both outputs used).
  double normal();
  /// Poisson(lambda): multiplication method below 30, PTRS rejection above.
  std::int64_t poisson(double lambda);

  template <class It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::int64_t>(last - first);
    for (std::int64_t i = n - 1; i > 0; --i) {
      const auto j = uniform_int(0, i);
      std::iter_swap(first + i, first + j);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace upscaler
