// Copyright 2026 The squeezesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/// \file
/// Counter-based random streams.
///
/// Every stream is a Philox4x32-10 generator addressed by (seed, stream id,
/// purpose). Two streams with different addresses never share a counter, so
/// trials can be generated in any order or on any thread and still reproduce
/// bit-for-bit.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace squeezesim {

/// The Philox4x32 block function with 10 rounds.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 public:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

namespace detail {

// 256-layer ziggurat for the standard normal (Marsaglia & Tsang layout with
// Doornik's base strip). Layer 0 is the base strip that also carries the tail.
struct ZigguratTables {
  static constexpr int kLayers = 256;
  static constexpr double kR = 3.6541528853610088;
  static constexpr double kArea = 0.00492867323399;

  std::array<double, kLayers + 1> x{};
  std::array<double, kLayers> ratio{};

  ZigguratTables() {
    const double f = std::exp(-0.5 * kR * kR);
    x[0] = kArea / f;
    x[1] = kR;
    for (int i = 2; i < kLayers; ++i) {
      x[i] = std::sqrt(-2.0 * std::log(kArea / x[i - 1] +
                                       std::exp(-0.5 * x[i - 1] * x[i - 1])));
    }
    x[kLayers] = 0.0;
    for (int i = 0; i < kLayers; ++i) ratio[i] = x[i + 1] / x[i];
  }
};

inline const ZigguratTables& ziggurat() {
  static const ZigguratTables tables;
  return tables;
}

}  // namespace detail

/// A seekable random stream. Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint32_t;

  /// Well-known purposes inside a trial. Any 32-bit tag is allowed.
  enum Purpose : std::uint32_t {
    kGeneral = 0,
    kCloud = 1,
    kSpins = 2,
    kProbe1 = 3,
    kProbe2 = 4,
    kPhases = 5,
    kBootstrap = 6,
    kRamsey = 7,
  };

  RngStream(std::uint64_t seed, std::uint64_t stream_id,
            std::uint32_t purpose = kGeneral) noexcept
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_id_(stream_id),
        purpose_(purpose) {}

  /// A sibling stream with the same seed and stream id but another purpose.
  [[nodiscard]] RngStream with_purpose(std::uint32_t purpose) const noexcept {
    return RngStream(seed(), stream_id_, purpose);
  }

  [[nodiscard]] std::uint64_t seed() const noexcept {
    return std::uint64_t{key_[0]} | (std::uint64_t{key_[1]} << 32);
  }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }
  [[nodiscard]] std::uint32_t purpose() const noexcept { return purpose_; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    if (used_ == kBuffered) refill();
    return buffer_[used_++];
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t hi = (*this)();
    return (hi << 32) | (*this)();
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n) by multiply-shift; n must be < 2^32.
  std::uint32_t below(std::uint32_t n) noexcept {
    return static_cast<std::uint32_t>((std::uint64_t{(*this)()} * n) >> 32);
  }

  /// Standard normal deviate.
  double normal() noexcept {
    const auto& zig = detail::ziggurat();
    for (;;) {
      // One word per attempt: 8 bits pick the layer, 24 give a signed
      // uniform on (-1, 1).
      const std::uint32_t bits = (*this)();
      const int layer = static_cast<int>(bits & 0xFF);
      const double u = (static_cast<double>(bits >> 8) + 0.5) * 0x1.0p-23 - 1.0;
      if (std::abs(u) < zig.ratio[layer]) return u * zig.x[layer];
      if (layer == 0) return tail(u > 0.0);
      const double x = u * zig.x[layer];
      const double f0 = std::exp(-0.5 * (zig.x[layer] * zig.x[layer] - x * x));
      const double f1 =
          std::exp(-0.5 * (zig.x[layer + 1] * zig.x[layer + 1] - x * x));
      if (f1 + uniform() * (f0 - f1) < 1.0) return x;
    }
  }

  double normal(double mean, double stddev) noexcept {
    return mean + stddev * normal();
  }

 private:
  double tail(bool positive) noexcept {
    constexpr double r = detail::ZigguratTables::kR;
    double x = 0.0;
    double y = 0.0;
    do {
      x = -std::log(uniform()) / r;
      y = -std::log(uniform());
    } while (2.0 * y <= x * x);
    return positive ? r + x : -(r + x);
  }

  static constexpr int kBlocks = 16;
  static constexpr int kBuffered = 4 * kBlocks;

  // Runs kBlocks Philox blocks side by side (structure of arrays so the
  // rounds vectorise), producing the same words as kBlocks sequential calls.
  void refill() noexcept {
    alignas(64) std::uint32_t c0[kBlocks], c1[kBlocks], c2[kBlocks], c3[kBlocks];
    for (int b = 0; b < kBlocks; ++b) {
      const std::uint64_t blk = block_ + static_cast<std::uint64_t>(b);
      c0[b] = static_cast<std::uint32_t>(blk);
      c1[b] = static_cast<std::uint32_t>(blk >> 32) ^ (purpose_ << 16);
      c2[b] = static_cast<std::uint32_t>(stream_id_);
      c3[b] = static_cast<std::uint32_t>(stream_id_ >> 32);
    }
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      for (int b = 0; b < kBlocks; ++b) {
        const std::uint64_t p0 = std::uint64_t{Philox4x32::kMul0} * c0[b];
        const std::uint64_t p1 = std::uint64_t{Philox4x32::kMul1} * c2[b];
        const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[b] ^ k0;
        const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[b] ^ k1;
        c1[b] = static_cast<std::uint32_t>(p1);
        c3[b] = static_cast<std::uint32_t>(p0);
        c0[b] = n0;
        c2[b] = n2;
      }
      k0 += Philox4x32::kWeyl0;
      k1 += Philox4x32::kWeyl1;
    }
    for (int b = 0; b < kBlocks; ++b) {
      buffer_[4 * b] = c0[b];
      buffer_[4 * b + 1] = c1[b];
      buffer_[4 * b + 2] = c2[b];
      buffer_[4 * b + 3] = c3[b];
    }
    block_ += kBlocks;
    used_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t stream_id_;
  std::uint32_t purpose_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, kBuffered> buffer_{};
  int used_ = kBuffered;
};

/// SplitMix64 finaliser over (seed, index): independent master seeds for
/// sub-experiments derived from one user seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace squeezesim
