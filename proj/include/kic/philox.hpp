#pragma once

// Philox4x64-10 counter-based generator (Salmon et al., SC'11), the variant
// implemented by numpy.random.Philox.  The 128-bit key is (seed, stream):
// distinct stream ids select statistically independent sequences, which makes
// per-member ensemble streams reproducible regardless of draw order.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

namespace kic {

class Philox4x64 {
 public:
  using result_type = std::uint64_t;

  explicit Philox4x64(std::uint64_t seed, std::uint64_t stream = 0) : key_{seed, stream} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  // numpy semantics: the counter is incremented before each block, so the
  // first block of key (s, t) is block({1,0,0,0}, {s, t}).
  result_type operator()() {
    if (index_ == 4) {
      advance_counter();
      buffer_ = block(counter_, key_);
      index_ = 0;
    }
    return buffer_[index_++];
  }

  static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> x,
                                            std::array<std::uint64_t, 2> k) {
    constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ull;
    constexpr std::uint64_t M1 = 0xCA5A826395121157ull;
    constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ull;
    constexpr std::uint64_t W1 = 0xBB67AE8584CAA73Bull;
    for (int round = 0; round < 10; ++round) {
      const unsigned __int128 p0 = static_cast<unsigned __int128>(M0) * x[0];
      const unsigned __int128 p1 = static_cast<unsigned __int128>(M1) * x[2];
      const std::uint64_t lo0 = static_cast<std::uint64_t>(p0);
      const std::uint64_t hi0 = static_cast<std::uint64_t>(p0 >> 64);
      const std::uint64_t lo1 = static_cast<std::uint64_t>(p1);
      const std::uint64_t hi1 = static_cast<std::uint64_t>(p1 >> 64);
      x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
      k[0] += W0;
      k[1] += W1;
    }
    return x;
  }

 private:
  void advance_counter() {
    for (auto& word : counter_)
      if (++word != 0) break;
  }

  std::array<std::uint64_t, 4> counter_{0, 0, 0, 0};
  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> buffer_{};
  int index_ = 4;
};

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Philox4x64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Standard complex normal, E|z|^2 = 1, via the polar transform.  Uses a
// (0, 1] uniform for the radius so the log never sees zero.
inline std::complex<double> complex_normal(Philox4x64& g) {
  const double u1 = static_cast<double>((g() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform_unit(g);
  const double r = std::sqrt(-std::log(u1));
  return std::polar(r, 2.0 * M_PI * u2);
}

}  // namespace kic
