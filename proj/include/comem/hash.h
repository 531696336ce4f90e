// Copyright 2026 The ComEM Authors.
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

// Platform-stable hashing and random streams. std::hash and the standard
// distributions are implementation-defined, so anything that must be
// reproducible across builds goes through these instead.

#ifndef COMEM_HASH_H_
#define COMEM_HASH_H_

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace comem {

constexpr std::uint64_t Fnv1a64(std::string_view data,
                                std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Hash of a sequence of fields. Each field is length-prefixed so that
// ("ab","c") and ("a","bc") differ.
inline std::uint64_t HashFields(std::uint64_t seed,
                                std::initializer_list<std::string_view> fields) {
  std::uint64_t h = Mix64(seed);
  for (std::string_view f : fields) {
    std::uint64_t len = f.size();
    h = Fnv1a64(
        std::string_view(reinterpret_cast<const char *>(&len), sizeof len), h);
    h = Fnv1a64(f, h);
  }
  return Mix64(h);
}

// Maps a 64-bit hash to [0, 1) using the top 53 bits.
constexpr double UnitInterval(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// SplitMix64 stream; the same seed gives the same sequence everywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t Next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound). Modulo bias is negligible for the small bounds
  // used here.
  std::uint64_t Below(std::uint64_t bound) { return Next() % bound; }

  double Uniform() { return UnitInterval(Next()); }

 private:
  std::uint64_t state_;
};

}  // namespace comem

#endif  // COMEM_HASH_H_
