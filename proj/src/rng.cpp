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
#include "ldpsgd/rng.hpp"

#include <boost/random/normal_distribution.hpp>

namespace ldpsgd {
namespace {

constexpr std::uint32_t kMultiplier0 = 0xD2511F53;
constexpr std::uint32_t kMultiplier1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {}

Philox4x32::Block Philox4x32::encrypt(Block ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMultiplier0, ctr[0], hi0, lo0);
    mulhilo(kMultiplier1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

void Philox4x32::refill() {
  const Block ctr = {static_cast<std::uint32_t>(block_index_),
                     static_cast<std::uint32_t>(block_index_ >> 32),
                     static_cast<std::uint32_t>(stream_id_),
                     static_cast<std::uint32_t>(stream_id_ >> 32)};
  const Key key = {static_cast<std::uint32_t>(seed_),
                   static_cast<std::uint32_t>(seed_ >> 32)};
  buffer_ = encrypt(ctr, key);
  ++block_index_;
  next_word_ = 0;
}

Philox4x32::result_type Philox4x32::operator()() {
  if (next_word_ >= 4) refill();
  const std::uint64_t lo = buffer_[next_word_];
  const std::uint64_t hi = buffer_[next_word_ + 1];
  next_word_ += 2;
  return (hi << 32) | lo;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ (index * 0xD1B54A32D192ED03ULL));
}

double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

double standard_normal(Rng& rng) {
  // The ziggurat sampler is stateless, so constructing it per call is free.
  boost::random::normal_distribution<double> normal;
  return normal(rng);
}

}  // namespace ldpsgd
