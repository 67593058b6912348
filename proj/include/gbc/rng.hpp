// Copyright 2026 The gbc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace gbc {

// Philox-4x32-10 counter-based generator (Salmon et al., SC'11).  The raw
// 32-bit outputs are pure integer arithmetic and reproduce bit-for-bit on
// any platform.  A (seed, stream) pair addresses an independent substream;
// the block counter advances within it.  This is what makes parallel Monte
// Carlo results independent of the worker partition: worker w never owns a
// generator, it owns a set of (stream index, counter) cells.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  static constexpr std::string_view algorithm() { return "philox4x32-10"; }

  static Block generate(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t counter) {
    std::uint32_t k0 = static_cast<std::uint32_t>(seed);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
    Block c{static_cast<std::uint32_t>(counter),
            static_cast<std::uint32_t>(counter >> 32),
            static_cast<std::uint32_t>(stream),
            static_cast<std::uint32_t>(stream >> 32)};
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
      }
      c = single_round(c, k0, k1);
    }
    return c;
  }

 private:
  static Block single_round(const Block& c, std::uint32_t k0,
                            std::uint32_t k1) {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    return Block{hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
  }
};

// A cheap value type: copying an RngStream forks the exact position.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Independent substream; used one-per-sample in Monte Carlo loops.
  RngStream substream(std::uint64_t index) const {
    // Mix so that (stream, index) pairs never collide with plain streams.
    return RngStream(seed_, stream_ * 0x9E3779B97F4A7C15ull + index + 1);
  }

  std::uint64_t next_u64() {
    if (half_) {
      half_ = false;
      return pending_;
    }
    const auto block = Philox4x32::generate(seed_, stream_, counter_++);
    pending_ = (std::uint64_t{block[2]} << 32) | block[3];
    half_ = true;
    return (std::uint64_t{block[0]} << 32) | block[1];
  }

  // Uniform on (0, 1); never returns 0 so it is safe under log().
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_normal() {
    if (have_normal_) {
      have_normal_ = false;
      return spare_normal_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_normal_ = radius * std::sin(angle);
    have_normal_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
  std::uint64_t pending_ = 0;
  bool half_ = false;
  bool have_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace gbc
