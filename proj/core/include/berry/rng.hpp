#pragma once

#include <array>
#include <cstdint>

namespace berry {

// Philox4x32-10 block: a counter-based generator whose output is a pure
// function of (key, counter).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

// Sequential view of the Philox stream keyed by (seed, stream). Draw k of
// stream s under seed q is the same value no matter which thread asks for it
// or in which order streams are visited.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint32_t next_u32();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace berry
