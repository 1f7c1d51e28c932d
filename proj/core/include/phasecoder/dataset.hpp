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

#ifndef PHASECODER_DATASET_HPP_
#define PHASECODER_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "phasecoder/geometry.hpp"
#include "phasecoder/simulation.hpp"

namespace phasecoder {

// Per-snippet label record as stored in the manifest.
struct SnippetRecord {
  LabelTriple labels;
  bool speech_present = true;
  std::optional<double> snr_db;
};

struct SceneRecord {
  int id = 0;
  std::uint64_t seed = 0;
  std::string wav;  // path relative to the dataset root
  Room room;
  MicArray array;
  Vec3 source;
  SourceTruth truth;
  std::optional<Vec3> distractor_position;
  std::vector<SnippetRecord> snippets;
};

// manifest.json: grids, class counts, and one record per scene with
// per-snippet labels.
struct DatasetManifest {
  int version = 1;
  LabelScheme scheme = LabelScheme::defaults();
  std::vector<SceneRecord> scenes;

  void save(const std::filesystem::path& dataset_dir) const;
  static DatasetManifest load(const std::filesystem::path& dataset_dir);
};

// Random-access view over all snippets of a dataset directory. Audio is
// cached in RAM as 16-bit samples by default; pass cache_in_ram = false to
// re-read WAV files per access.
class SnippetDataset {
 public:
  explicit SnippetDataset(const std::filesystem::path& dataset_dir,
                          bool cache_in_ram = true);

  const DatasetManifest& manifest() const { return manifest_; }
  const LabelScheme& scheme() const { return manifest_.scheme; }
  std::size_t size() const { return index_.size(); }

  struct Item {
    Snippet snippet;
    const MicArray* array = nullptr;
    int scene_id = 0;
    int mic_count = 0;
  };
  Item get(std::size_t index) const;

  // Metadata without touching audio.
  const SnippetRecord& record(std::size_t index) const;
  int scene_of(std::size_t index) const;
  const SceneRecord& scene(int scene_id) const;

 private:
  struct IndexEntry {
    int scene = 0;        // scene id
    std::size_t slot = 0;  // position in manifest_.scenes
    int offset = 0;        // snippet index within the scene
  };

  std::filesystem::path root_;
  DatasetManifest manifest_;
  std::vector<IndexEntry> index_;
  std::vector<std::pair<int, std::size_t>> slot_of_;  // sorted (id, slot)
  std::size_t slot_for(int scene_id) const;
  bool cached_;
  // Per scene: planar int16 audio (channel-major) and per-channel length.
  mutable std::vector<std::vector<std::int16_t>> cache_;
  mutable std::vector<std::int64_t> cache_len_;

  void load_scene_audio(int scene_id) const;
};

}  // namespace phasecoder

#endif  // PHASECODER_DATASET_HPP_
