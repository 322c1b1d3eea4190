#pragma once

#include <array>
#include <cstdint>

namespace rmdim {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// Output block b of stream `key` is a pure function of (key, b), so any path can
// be regenerated without replaying the others.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;

  explicit Philox4x32(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  /// Raw 128-bit block for counter value `c`.
  std::array<std::uint32_t, 4> block(std::uint64_t c) const noexcept {
    std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(c),
                                     static_cast<std::uint32_t>(c >> 32), 0u, 0u};
    std::array<std::uint32_t, 2> k = key_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k[1], static_cast<std::uint32_t>(p0)};
      k[0] += 0x9E3779B9u;
      k[1] += 0xBB67AE85u;
    }
    return ctr;
  }

  result_type operator()() noexcept {
    const auto b = block(counter_++);
    return (std::uint64_t{b[0]} << 32) | b[1];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by rejection; bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t v;
    do {
      v = (*this)();
    } while (v >= limit);
    return v % bound;
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t counter_;
};

/// Stream key for path `index` under `seed`.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index) noexcept { return seed ^ index; }

}  // namespace rmdim
