#pragma once

#include <cstdint>
#include <random>

namespace urbangen {

// std::uniform_real_distribution is implementation-defined; this maps the
// fully specified mt19937_64 stream to doubles identically on every platform.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace urbangen
