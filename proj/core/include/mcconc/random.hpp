#pragma once

#include <cstdint>
#include <random>

namespace mcconc {

std::uint64_t splitmix64(std::uint64_t& state);

// Per-thread random source. Variates are built from raw 64-bit draws so the
// consumed stream does not depend on the standard library's distributions.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  // Independent stream for replica `index` of a run seeded with `seed`.
  static RandomStream derive(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();       // [0, 1)
  double uniform_open();  // (0, 1)
  double exponential();   // rate 1
  double normal();        // Box-Muller, two uniforms per call
  bool bernoulli(double p);

 private:
  std::mt19937_64 engine_;
};

}  // namespace mcconc
