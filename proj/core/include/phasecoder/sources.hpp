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

#ifndef PHASECODER_SOURCES_HPP_
#define PHASECODER_SOURCES_HPP_

#include <filesystem>
#include <memory>
#include <vector>

#include "phasecoder/rng.hpp"

namespace phasecoder {

// Speech-like excitation: alternating voiced segments (harmonic stacks with
// drifting pitch and formant-shaped partial amplitudes) and unvoiced bursts
// (high-passed noise), under syllable-rate envelopes. Broadband and
// transient-rich; suitable as a localization source signal. 16 kHz mono.
std::vector<double> synth_speech(Rng& rng, double duration_s);

// Distractor generator: colored-noise bursts, harmonic hums, or click
// trains, chosen per call. 16 kHz mono.
std::vector<double> synth_distractor(Rng& rng, double duration_s);

// Supplies mono source signals for scene rendering.
class SpeechSource {
 public:
  virtual ~SpeechSource() = default;
  virtual std::vector<double> next(Rng& rng) = 0;
};

// Default corpus: synth_speech with a per-scene random duration.
class SyntheticSpeechSource : public SpeechSource {
 public:
  SyntheticSpeechSource(double min_duration_s, double max_duration_s)
      : min_s_(min_duration_s), max_s_(max_duration_s) {}
  std::vector<double> next(Rng& rng) override;

 private:
  double min_s_;
  double max_s_;
};

// Reads mono (or first-channel) 16 kHz WAV files from a directory, chosen
// uniformly per scene. Files are indexed in sorted order for determinism.
class WavDirSpeechSource : public SpeechSource {
 public:
  explicit WavDirSpeechSource(const std::filesystem::path& dir);
  std::vector<double> next(Rng& rng) override;

 private:
  std::vector<std::filesystem::path> files_;
};

}  // namespace phasecoder

#endif  // PHASECODER_SOURCES_HPP_
