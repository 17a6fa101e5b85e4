// Copyright 2026 The bipdetect Authors.
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

#ifndef BIPDETECT_COUNTER_RNG_H_
#define BIPDETECT_COUNTER_RNG_H_

// Counter-based random numbers (Philox4x32-10). Every variate is a pure
// function of (key, counter), so samples can be generated in any order and
// on any number of threads with identical results.

#include <array>
#include <cstdint>

namespace bipdetect {

using PhiloxCounter = std::array<uint32_t, 4>;
using PhiloxKey = std::array<uint32_t, 2>;

namespace philox_detail {

constexpr uint32_t kMul0 = 0xD2511F53u;
constexpr uint32_t kMul1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

constexpr void MulHiLo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  const uint64_t product = static_cast<uint64_t>(a) * b;
  hi = static_cast<uint32_t>(product >> 32);
  lo = static_cast<uint32_t>(product);
}

}  // namespace philox_detail

constexpr PhiloxCounter Philox4x32(PhiloxCounter ctr, PhiloxKey key) {
  using namespace philox_detail;
  for (int round = 0; round < 10; ++round) {
    uint32_t hi0 = 0, lo0 = 0, hi1 = 0, lo1 = 0;
    MulHiLo(kMul0, ctr[0], hi0, lo0);
    MulHiLo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

constexpr PhiloxKey KeyFromSeed(uint64_t seed) {
  return {static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)};
}

// Stream tags keep the different consumers of one seed disjoint.
enum class Stream : uint32_t {
  kCell = 1,
  kSupport = 2,
  kDerive = 3,
};

// Roles for DeriveSeed: one independent family of trial seeds per purpose.
enum TrialRole : uint32_t {
  kRoleCalibration = 11,
  kRoleNull = 12,
  kRoleAlternative = 13,
  kRoleDiagnostic = 14,
};

// Uniform double in [0, 1) with 53 random bits.
inline double UniformAt(uint64_t seed, Stream stream, uint32_t a, uint32_t b) {
  const PhiloxCounter out = Philox4x32(
      {a, b, static_cast<uint32_t>(stream), 0u}, KeyFromSeed(seed));
  const uint64_t bits =
      ((static_cast<uint64_t>(out[0]) << 32) | out[1]) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

// Child seed for (role, index), e.g. one per Monte Carlo trial.
inline uint64_t DeriveSeed(uint64_t seed, uint32_t role, uint64_t index) {
  const PhiloxCounter out = Philox4x32(
      {static_cast<uint32_t>(index), static_cast<uint32_t>(index >> 32), role,
       static_cast<uint32_t>(Stream::kDerive)},
      KeyFromSeed(seed));
  return (static_cast<uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace bipdetect

#endif  // BIPDETECT_COUNTER_RNG_H_
