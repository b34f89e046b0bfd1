#pragma once

// Reproducible random streams.
//
// The generator is Philox4x32-10 (Salmon et al., counter-based). Uniform
// doubles take the top 53 bits of a 64-bit draw; normals use the Box-Muller
// transform and consume draws in pairs. Only this header's algorithms touch
// raw bits, so every stream is bit-reproducible across platforms that share
// a correctly rounded libm for log/sin/cos/sqrt.

#include <array>
#include <cstdint>
#include <span>

namespace agmm {

// splitmix64 finaliser (Steele, Lea and Flood).
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Stream tags used when deriving per-purpose seeds.
enum class StreamTag : std::uint64_t {
  Params = 1,
  Data = 2,
  InitVanilla = 3,
  InitSpectral = 4,
  Restart = 5,
  MonteCarlo = 6,
};

// derive_seed(base, index, tag) =
//   splitmix64(splitmix64(base + 0x9E3779B97F4A7C15 * (index + 1))
//              ^ (0xD1B54A32D192ED03 * (tag + 1)))
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index, std::uint64_t tag) noexcept;
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index, StreamTag tag) noexcept {
  return derive_seed(base_seed, index, static_cast<std::uint64_t>(tag));
}

// One Philox4x32-10 block for the given counter and key.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                          std::array<std::uint32_t, 2> key) noexcept;

class Philox4x32 {
 public:
  explicit Philox4x32(std::uint64_t seed) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  // Uniform in [0, 1).
  double uniform() noexcept;
  // Uniform in the open interval (0, 1).
  double uniform_open() noexcept;
  // Uniform integer in [0, n); n > 0.
  std::uint64_t uniform_index(std::uint64_t n) noexcept;
  double normal() noexcept;
  void fill_normal(std::span<double> out) noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace agmm
