//
// Copyright 2026 The OTAFD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef OTAFD_RNG_HPP_
#define OTAFD_RNG_HPP_

#include <cstdint>
#include <random>

namespace otafd {

// Stream purposes for hierarchical seed derivation. Every random draw in a
// run belongs to exactly one (purpose, round, device) stream, so parallel
// execution cannot change the sampled values.
enum class StreamTag : std::uint64_t {
  kFading = 1,
  kChannelNoise = 2,
  kDpNoise = 3,
  kDataGen = 4,
  kPartition = 5,
  kModelInit = 6,
  kConfigDraw = 7,
  kReplication = 8,
  kTest = 9,
};

// splitmix64 finalizer; the standard 64-bit avalanche mix.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent child seed from a base seed and up to three tags.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix64(base ^ 0x8b72e7c4e0f2a3d1ULL);
  s = mix64(s ^ mix64(a));
  s = mix64(s ^ mix64(b));
  s = mix64(s ^ mix64(c));
  return s;
}

constexpr std::uint64_t derive_seed(std::uint64_t base, StreamTag tag,
                                    std::uint64_t b = 0, std::uint64_t c = 0) {
  return derive_seed(base, static_cast<std::uint64_t>(tag), b, c);
}

// A seeded random stream. Distribution state is owned by the stream, so a
// given seed always reproduces the same draw sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return unit_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
  double gamma(double shape) {
    std::gamma_distribution<double> g(shape, 1.0);
    return g(engine_);
  }
  std::uint64_t next_u64() { return engine_(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
    return d(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

}  // namespace otafd

#endif  // OTAFD_RNG_HPP_
