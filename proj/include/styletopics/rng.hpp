#pragma once

#include <cstdint>
#include <random>

namespace styletopics {

// Seeded generator with a fixed, portable output sequence.
//
// The engine is MT19937-64 (std::mt19937_64), whose output is pinned by the
// C++ standard. The standard distributions are implementation-defined, so the
// conversions to doubles and bounded integers are done here:
//   uniform01()      -> top 53 bits of one draw, scaled by 2^-53, in [0, 1)
//   uniform_index(n) -> rejection sampling on one draw, unbiased, in [0, n)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint32_t uniform_index(std::uint32_t n) {
    const std::uint64_t range = n;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range + 1) % range;
    std::uint64_t x = engine_();
    while (x > limit) x = engine_();
    return static_cast<std::uint32_t>(x % range);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace styletopics
