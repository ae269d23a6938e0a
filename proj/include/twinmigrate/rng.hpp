#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace twinmigrate {

// SplitMix64 finalizer. Used to derive independent sub-stream seeds so that a
// value keyed by (seed, tag, index...) does not depend on how many other
// values were drawn before it.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

// Platform-identical random stream: std::mt19937_64 (fully specified by the
// standard) plus hand-rolled transforms, since the std distributions are
// implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Box-Muller, cosine branch. Always consumes exactly two uniforms.
  double normal(double mean, double stddev);

 private:
  std::mt19937_64 engine_;
};

}  // namespace twinmigrate
