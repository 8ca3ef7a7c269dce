#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace recal {

/// Philox4x64-10 counter-based generator (Salmon et al., Random123).
/// Output is a pure function of (key, counter), so any replicate can be
/// regenerated independently of scheduling.
class Philox4x64 {
 public:
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Block block(Block ctr, Key key) {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint64_t kM0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kM1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kW0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kW1 = 0xBB67AE8584CAA73BULL;

  static void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
  }

  static Block round(const Block& c, const Key& k) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Sequential draws from one (seed, stream, replicate) substream.
/// Counter layout: {block index, replicate, 0, 0}; key: {seed, stream}.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t replicate)
      : key_{seed, stream}, replicate_(replicate) {}

  std::uint64_t next_u64() {
    if (pos_ == 4) {
      buf_ = Philox4x64::block({block_++, replicate_, 0, 0}, key_);
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal by Box–Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  Philox4x64::Key key_;
  std::uint64_t replicate_;
  std::uint64_t block_ = 0;
  Philox4x64::Block buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace recal
