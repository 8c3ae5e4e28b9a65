#pragma once

#include <cstdint>
#include <random>

namespace gvcpanel {

// Deterministic RNG: mt19937_64 engine with our own variate transforms, so
// streams are reproducible across standard libraries (std distributions are
// not pinned by the standard, the engine is).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  // Uniform on [0,1) with 53 random bits.
  double uniform01();
  // Uniform integer in [0, n), rejection sampled. n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);
  // Standard normal via Marsaglia polar method (one spare cached).
  double normal();

  // Derive an independent stream, e.g. one per Monte Carlo replication.
  Rng fork(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 finalizer; used for seed derivation.
std::uint64_t mix_u64(std::uint64_t x);

}  // namespace gvcpanel
