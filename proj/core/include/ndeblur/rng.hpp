// ndeblur/rng.hpp

// Copyright 2026  The ndeblur Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef NDEBLUR_RNG_HPP
#define NDEBLUR_RNG_HPP

#include <cstdint>
#include <random>

namespace ndeblur {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive decorrelated seeds from (seed, tag,
// index) tuples so that parallel producers can own independent streams while
// keeping the whole schedule a pure function of the master seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(a) ^ (0x9e3779b97f4a7c15ULL + b));
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix64(mix64(a, b) ^ mix64(c));
}

// Stream tags; keep values stable, they participate in seed derivation.
enum class RngStream : std::uint64_t {
  kKernelSynth = 1,
  kWeightInit = 2,
  kWhitening = 3,
  kTrainBatch = 4,
  kValidation = 5,
  kNoise = 6,
  kCorpus = 7,
  kBenchmark = 8,
};

inline Rng make_rng(std::uint64_t seed, RngStream stream, std::uint64_t index = 0) {
  return Rng(mix64(seed, static_cast<std::uint64_t>(stream), index));
}

}  // namespace ndeblur

#endif  // NDEBLUR_RNG_HPP
