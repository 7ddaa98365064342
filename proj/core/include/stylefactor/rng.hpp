#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stylefactor {

/// Seeded generator used by every stochastic routine. Uniform draws are built
/// directly from the 64-bit engine output so sampler trajectories do not
/// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t UniformIndex(std::size_t n);

  /// Gamma(shape, 1) variate.
  double Gamma(double shape);

  /// Symmetric Dirichlet draw of the given dimension; always sums to 1.
  std::vector<double> Dirichlet(std::size_t dim, double concentration);

  /// Index drawn proportionally to non-negative weights (need not be normalized).
  std::size_t Categorical(std::span<const double> weights);

  std::uint64_t NextRaw() { return engine_(); }

  /// Text form of the full engine state; restores bit-exactly.
  std::string Serialize() const;
  static Rng Deserialize(std::string_view state);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t MixSeed(std::uint64_t value);

/// FNV-1a 64-bit hash, rendered by callers as hex digests.
std::uint64_t Fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);

std::string HexDigest(std::uint64_t value);

}  // namespace stylefactor
