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

#include "tool_util.hpp"

#include <fstream>

#include "phasecoder/dsp.hpp"
#include "phasecoder/errors.hpp"
#include "phasecoder/simulation.hpp"

namespace phasecoder::tools {

MicArray load_array_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("array file: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("array file: bad JSON: " + std::string(e.what()));
  }
  MicArray array;
  for (const auto& m : j) {
    array.mics.push_back({m.at(0).get<double>(), m.at(1).get<double>(),
                          m.at(2).get<double>()});
  }
  array.validate();
  return array;
}

MicArray resolve_array(const std::filesystem::path& wav,
                       const std::string& array_flag) {
  if (!array_flag.empty()) return load_array_file(array_flag);
  const std::filesystem::path sidecar(wav.string() + ".array.json");
  if (std::filesystem::exists(sidecar)) return load_array_file(sidecar);
  throw DataError("no mic geometry: pass --array or provide " +
                  sidecar.string());
}

std::vector<Eigen::VectorXf> sliding_embeddings(
    const MultiChannelAudio& audio, const MicArray& array,
    const Model<float>& model, const LabelScheme& scheme, int hop_samples) {
  const int channels = audio.num_channels();
  if (channels != array.count()) {
    throw DataError("sliding_embeddings: WAV channels do not match the array");
  }
  const std::int64_t len = audio.num_samples();
  std::vector<Eigen::VectorXf> out;
  for (std::int64_t start = 0; start < len; start += hop_samples) {
    Snippet snip;
    snip.audio.resize(static_cast<std::size_t>(channels));
    for (int c = 0; c < channels; ++c) {
      auto& dst = snip.audio[static_cast<std::size_t>(c)];
      dst.assign(dsp::kSnippetSamples, 0.0f);
      const auto& src = audio.channels[static_cast<std::size_t>(c)];
      const std::int64_t n =
          std::min<std::int64_t>(dsp::kSnippetSamples, len - start);
      for (std::int64_t i = 0; i < n; ++i) {
        dst[static_cast<std::size_t>(i)] =
            src[static_cast<std::size_t>(start + i)];
      }
    }
    const Prediction pred = predict(snip, array, model, scheme);
    out.push_back(pred.spatial_embedding);
  }
  return out;
}

}  // namespace phasecoder::tools
