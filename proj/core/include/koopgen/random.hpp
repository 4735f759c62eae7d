#pragma once

#include <cstdint>
#include <random>

namespace koopgen {

/// Seeded generator whose output is bit-identical across platforms and
/// standard libraries. The std:: distributions are implementation-defined,
/// so the transforms from raw 64-bit words are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform01();

  /// Uniform on the open interval (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; caches the second variate.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent stream seed from a base seed and a tag
/// (SplitMix64 finaliser).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

}  // namespace koopgen
