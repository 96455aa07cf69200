#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace bdex {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011).
///
/// A stream is identified by a 64-bit key; `split(i)` derives an
/// independent stream by rekeying, so replica `i` of seed `s` is a pure
/// function of `(s, i)`. Output is bit-identical across platforms because
/// every derived variate is computed here from raw 32-bit words instead of
/// through the implementation-defined `<random>` distributions.
class Philox {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox(std::uint64_t seed = 0, std::uint64_t stream = 0) {
    key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    counter_ = {0, 0, static_cast<std::uint32_t>(stream),
                static_cast<std::uint32_t>(stream >> 32)};
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Independent generator for sub-stream `id` (replica, worker, ...).
  Philox split(std::uint64_t id) const {
    // Mix the current key with the id through one Philox block so nearby
    // ids land on unrelated keys.
    Block b = bijection({static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32),
                         0x5eed5eedu, 0x0b5e55edu},
                        key_);
    Philox out;
    out.key_ = {b[0], b[1]};
    out.counter_ = {0, 0, b[2], b[3]};
    return out;
  }

  result_type operator()() {
    if (avail_ < 2) refill();
    const std::uint64_t lo = buffer_[4 - avail_];
    const std::uint64_t hi = buffer_[5 - avail_];
    avail_ -= 2;
    return lo | (hi << 32);
  }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1].
  double uniform_pos() { return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n) by Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (true) {
      __extension__ using u128 = unsigned __int128;
      const u128 m = static_cast<u128>((*this)()) * n;
      if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  /// Raw block function, exposed for known-answer tests.
  static Block bijection(Block ctr, Key key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

 private:
  void refill() {
    buffer_ = bijection(counter_, key_);
    avail_ = 4;
    if (++counter_[0] == 0) ++counter_[1];
  }

  Key key_{};
  Block counter_{};
  Block buffer_{};
  int avail_ = 0;
};

}  // namespace bdex
