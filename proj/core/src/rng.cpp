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

#include "phasecoder/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace phasecoder {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

std::uint64_t Rng::bits() { return engine_(); }

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());  // full range
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span + 1) % span;
  std::uint64_t draw = engine_();
  while (draw > limit) draw = engine_();
  return lo + static_cast<std::int64_t>(draw % span);
}

double Rng::normal() {
  // Box-Muller; u clamped away from 0 so log() stays finite.
  double u = uniform();
  if (u < 1e-300) u = 1e-300;
  const double v = uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586477 * v);
}

bool Rng::chance(double p) { return uniform() < p; }

Rng Rng::child(std::uint64_t index) const {
  Rng derived(0);
  derived.seed_ = splitmix64(seed_ ^ splitmix64(index + 0x51ed2701a7b5e3f2ULL));
  derived.engine_.seed(derived.seed_);
  return derived;
}

std::string Rng::save_state() const {
  std::ostringstream os;
  os << seed_ << ' ' << engine_;
  return os.str();
}

void Rng::restore_state(const std::string& state) {
  std::istringstream is(state);
  is >> seed_ >> engine_;
  if (is.fail()) throw std::invalid_argument("Rng: malformed state string");
}

}  // namespace phasecoder
