// Copyright 2026 The ldpsgd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef LDPSGD_RNG_HPP_
#define LDPSGD_RNG_HPP_

#include <array>
#include <cstdint>
#include <limits>

namespace ldpsgd {

// Philox4x32-10 counter-based generator. A stream is identified by a 64-bit
// key (the seed) and a 64-bit stream id held in the upper half of the
// counter, so substreams for (seed, replication) or (seed, replicate) are
// independent of how work is scheduled across threads.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32() : Philox4x32(0, 0) {}
  Philox4x32(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Raw ten-round bijection, exposed for known-answer tests.
  static Block encrypt(Block counter, Key key);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_index_ = 0;
  Block buffer_{};
  int next_word_ = 4;
};

using Rng = Philox4x32;

// Stream ids used across the library. Keeping them in one place avoids two
// subsystems silently sharing a substream.
namespace streams {
inline constexpr std::uint64_t kData = 0x1;
inline constexpr std::uint64_t kPrivacy = 0x2;
inline constexpr std::uint64_t kBootstrap = 0x3;
}  // namespace streams

// Derives a 64-bit seed for replication `index` under `master_seed`
// (splitmix64 finalizer over both words).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

// Uniform on the open interval (0, 1) with 53 bits of resolution.
double uniform01(Rng& rng);

// Standard normal draw.
double standard_normal(Rng& rng);

}  // namespace ldpsgd

#endif  // LDPSGD_RNG_HPP_
