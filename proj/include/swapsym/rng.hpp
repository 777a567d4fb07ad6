#pragma once

// Counter-based random numbers (Philox4x32-10). Every draw is a pure function
// of (seed, path, step, purpose, draw index), so simulation output does not
// depend on thread count or evaluation order.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace swapsym {

using Philox4x32 = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline Philox4x32 philox4x32_10(Philox4x32 ctr, PhiloxKey key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Purpose tags separating independent substreams of one (path, step).
enum class Purpose : std::uint32_t {
  diffusion = 1,
  jump_count = 2,
  jump_size = 3,
  grid = 4,
  random_time = 5,
  inner = 6,
  parameters = 7,
};

/// Sequential view of one substream.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t path, std::uint64_t step, Purpose purpose)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        step_(static_cast<std::uint32_t>(step)),
        path_(static_cast<std::uint32_t>(path)),
        tag_(static_cast<std::uint32_t>(purpose) | static_cast<std::uint32_t>(path >> 32) << 16 |
             static_cast<std::uint32_t>(step >> 32) << 24) {}

  std::uint32_t next_u32() {
    if (used_ == 4) refill();
    return block_[used_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return hi << 32 | next_u32();
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  /// Poisson variate by inversion; large means are split into chunks.
  std::uint64_t poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > 30.0) {
      total += poisson_small(30.0);
      mean -= 30.0;
    }
    return total + poisson_small(mean);
  }

  double exponential(double mean) { return -mean * std::log(uniform()); }

 private:
  std::uint64_t poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    double p = std::exp(-mean);
    double cdf = p;
    const double u = uniform();
    std::uint64_t k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }

  void refill() {
    block_ = philox4x32_10({counter_++, step_, path_, tag_}, key_);
    used_ = 0;
  }

  PhiloxKey key_;
  std::uint32_t step_;
  std::uint32_t path_;
  std::uint32_t tag_;
  std::uint32_t counter_ = 0;
  Philox4x32 block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace swapsym
