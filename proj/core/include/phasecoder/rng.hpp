// Copyright 2026 The Phasecoder Authors. All Rights Reserved.
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

#ifndef PHASECODER_RNG_HPP_
#define PHASECODER_RNG_HPP_

#include <cstdint>
#include <random>
#include <string>

namespace phasecoder {

// Deterministic random stream. The engine is std::mt19937_64 (bit-exact by
// the standard); all distributions are implemented here so that generated
// sequences do not depend on the standard library vendor.
//
// Independent child streams are derived with a splitmix64 hash of
// (seed, stream index), so per-scene / per-record workers never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  // Raw 64 random bits.
  std::uint64_t bits();

  // Uniform double in [0, 1) with 53-bit resolution.
  double uniform();

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  // Uniform integer in [lo, hi], both ends inclusive. Requires lo <= hi.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Standard normal via the Box-Muller transform (no cached spare, so the
  // stream state is exactly the engine state).
  double normal();

  // Bernoulli draw.
  bool chance(double p);

  // Independent stream for worker `index` (scene, record, ...).
  Rng child(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }

  // Engine state as text, for resumable checkpoints.
  std::string save_state() const;
  void restore_state(const std::string& state);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// splitmix64 finalizer; used for seed mixing.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace phasecoder

#endif  // PHASECODER_RNG_HPP_
