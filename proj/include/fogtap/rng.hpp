#pragma once

#include <cstdint>
#include <random>

namespace fogtap {

struct RngSeed {
  std::uint64_t value = 0;
};

// SplitMix64 finalizer; used to derive independent sub-stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic random stream. The engine is fully specified by the standard,
// and uniforms are produced by explicit bit manipulation rather than
// std::uniform_real_distribution, so sequences are identical across
// standard library implementations.
class RngStream {
 public:
  explicit RngStream(RngSeed seed) : engine_(seed.value) {}

  // Uniform variate on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next_u64() { return engine_(); }

  // Independent stream keyed by `index`; does not advance this stream.
  [[nodiscard]] static RngStream substream(RngSeed master, std::uint64_t index) {
    return RngStream(RngSeed{mix_seed(mix_seed(master.value) ^ mix_seed(index + 1))});
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fogtap
