#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace owcl {

/// Seeded generator used everywhere randomness enters the pipeline.
///
/// The bit stream is std::mt19937_64 (fully specified by the standard);
/// uniforms take the top 53 bits and normals use the Box-Muller transform,
/// so draws do not depend on the standard library's distribution classes,
/// which are implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi].
  double uniform(double lo, double hi);
  /// Uniform integer on [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal.
  double normal();

private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// SplitMix64 finalizer over (base, stream); gives independent per-stream seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace owcl
