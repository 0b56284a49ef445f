// Copyright 2026 The transeval Authors
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

#ifndef TRANSEVAL_RNG_HPP_
#define TRANSEVAL_RNG_HPP_

#include <cstdint>

// Counter-based pseudo-random streams. Every random quantity in the library
// is a pure function of (key, counter), so results do not depend on call
// order, thread scheduling or platform. The exact formulas are documented in
// docs/rng.md and must not change without bumping report versions.
namespace transeval::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kDeriveSalt = 0xD1B54A32D192ED03ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// Element `counter` of the stream identified by `key`. Equal to the
// (counter+1)-th output of a SplitMix64 generator seeded with `key`.
constexpr std::uint64_t At(std::uint64_t key, std::uint64_t counter) {
  return Mix64(key + (counter + 1) * kGolden);
}

// Key of child stream `index` of `key`. Used for (master, repeat, fold,
// tree) hierarchies.
constexpr std::uint64_t Derive(std::uint64_t key, std::uint64_t index) {
  return At(Mix64(key ^ kDeriveSalt), index);
}

// Top 52 bits mapped to the open interval (0, 1). With 53 bits the
// largest value would round to 1.0.
constexpr double ToUniform(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

__extension__ using Uint128 = unsigned __int128;

// Uniform integer in [0, n) by 128-bit multiply-high.
constexpr std::uint64_t ToIndex(std::uint64_t bits, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<Uint128>(bits) * n) >> 64);
}

// Inverse standard-normal CDF, Acklam's rational approximation
// (relative error below 1.15e-9). `p` must lie in (0, 1).
double InverseNormalCdf(double p);

inline double ToNormal(std::uint64_t bits) {
  return InverseNormalCdf(ToUniform(bits));
}

// Sequential view over one stream.
class CounterStream {
 public:
  explicit constexpr CounterStream(std::uint64_t key, std::uint64_t start = 0)
      : key_(key), counter_(start) {}

  constexpr std::uint64_t NextBits() { return At(key_, counter_++); }
  constexpr double NextUniform() { return ToUniform(NextBits()); }
  double NextNormal() { return ToNormal(NextBits()); }
  constexpr std::uint64_t NextIndex(std::uint64_t n) {
    return ToIndex(NextBits(), n);
  }

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace transeval::rng

#endif  // TRANSEVAL_RNG_HPP_
