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

#ifndef PHASECODER_AUDIO_HPP_
#define PHASECODER_AUDIO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace phasecoder {

// Channel-planar multichannel audio.
struct MultiChannelAudio {
  int sample_rate = 16000;
  std::vector<std::vector<float>> channels;

  int num_channels() const { return static_cast<int>(channels.size()); }
  std::int64_t num_samples() const {
    return channels.empty() ? 0
                            : static_cast<std::int64_t>(channels[0].size());
  }
};

enum class WavFormat { kPcm16, kFloat32 };

// Writes an interleaved RIFF/WAVE file. All channels must share one length.
void write_wav(const std::filesystem::path& path,
               const MultiChannelAudio& audio,
               WavFormat format = WavFormat::kFloat32);

// Reads PCM16 or IEEE-float32 WAV files with any channel count.
// Throws DataError on malformed or unsupported files.
MultiChannelAudio read_wav(const std::filesystem::path& path);

// Mean over channels, the mono down-mix convention used throughout.
std::vector<float> mean_channel(const MultiChannelAudio& audio);

}  // namespace phasecoder

#endif  // PHASECODER_AUDIO_HPP_
