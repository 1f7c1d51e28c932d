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

#include "phasecoder/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "phasecoder/audio.hpp"
#include "phasecoder/dsp.hpp"
#include "phasecoder/errors.hpp"
#include "phasecoder/json_util.hpp"

namespace phasecoder {

namespace {

nlohmann::json label_to_json(const OneHotLabel& l) {
  return {{"index", l.index}, {"classes", l.num_classes}};
}

OneHotLabel label_from_json(const nlohmann::json& j) {
  OneHotLabel l;
  l.index = j.at("index").get<int>();
  l.num_classes = j.at("classes").get<int>();
  if (l.index < 0 || l.index >= l.num_classes) {
    throw DataError("manifest: label index out of range");
  }
  return l;
}

nlohmann::json scene_to_json(const SceneRecord& s) {
  nlohmann::json mics = nlohmann::json::array();
  for (const Vec3& m : s.array.mics) mics.push_back(vec3_to_json(m));
  nlohmann::json snippets = nlohmann::json::array();
  for (const SnippetRecord& r : s.snippets) {
    nlohmann::json jr = {{"azimuth", label_to_json(r.labels.azimuth)},
                         {"elevation", label_to_json(r.labels.elevation)},
                         {"distance", label_to_json(r.labels.distance)},
                         {"speech_present", r.speech_present}};
    if (r.snr_db.has_value()) jr["snr_db"] = *r.snr_db;
    snippets.push_back(std::move(jr));
  }
  nlohmann::json j = {{"id", s.id},
                      {"seed", s.seed},
                      {"wav", s.wav},
                      {"room", room_to_json(s.room)},
                      {"mics", mics},
                      {"source", vec3_to_json(s.source)},
                      {"truth", truth_to_json(s.truth)},
                      {"snippets", snippets}};
  if (s.distractor_position.has_value()) {
    j["distractor_position"] = vec3_to_json(*s.distractor_position);
  }
  return j;
}

SceneRecord scene_from_json(const nlohmann::json& j) {
  SceneRecord s;
  s.id = j.at("id").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.wav = j.at("wav").get<std::string>();
  s.room = room_from_json(j.at("room"));
  for (const auto& m : j.at("mics")) s.array.mics.push_back(vec3_from_json(m));
  s.source = vec3_from_json(j.at("source"));
  s.truth = truth_from_json(j.at("truth"));
  if (j.contains("distractor_position")) {
    s.distractor_position = vec3_from_json(j.at("distractor_position"));
  }
  for (const auto& jr : j.at("snippets")) {
    SnippetRecord r;
    r.labels.azimuth = label_from_json(jr.at("azimuth"));
    r.labels.elevation = label_from_json(jr.at("elevation"));
    r.labels.distance = label_from_json(jr.at("distance"));
    r.speech_present = jr.at("speech_present").get<bool>();
    if (jr.contains("snr_db")) r.snr_db = jr.at("snr_db").get<double>();
    s.snippets.push_back(std::move(r));
  }
  return s;
}

}  // namespace

void DatasetManifest::save(const std::filesystem::path& dataset_dir) const {
  nlohmann::json j;
  j["version"] = version;
  j["sample_rate"] = dsp::kSampleRate;
  j["snippet_samples"] = dsp::kSnippetSamples;
  j["label_scheme"] = scheme_to_json(scheme);
  j["class_counts"] = {{"azimuth", scheme.azimuth_classes()},
                       {"elevation", scheme.elevation_classes()},
                       {"distance", scheme.distance_classes()}};
  nlohmann::json scenes_json = nlohmann::json::array();
  for (const SceneRecord& s : scenes) scenes_json.push_back(scene_to_json(s));
  j["scenes"] = std::move(scenes_json);

  std::ofstream out(dataset_dir / "manifest.json");
  if (!out) {
    throw DataError("manifest: cannot write to " + dataset_dir.string());
  }
  out << j.dump(1) << '\n';
}

DatasetManifest DatasetManifest::load(
    const std::filesystem::path& dataset_dir) {
  const auto path = dataset_dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw DataError("manifest: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest: bad JSON: " + std::string(e.what()));
  }
  DatasetManifest m;
  m.version = j.value("version", 1);
  m.scheme = scheme_from_json(j.at("label_scheme"));
  for (const auto& js : j.at("scenes")) {
    m.scenes.push_back(scene_from_json(js));
  }
  return m;
}

SnippetDataset::SnippetDataset(const std::filesystem::path& dataset_dir,
                               bool cache_in_ram)
    : root_(dataset_dir),
      manifest_(DatasetManifest::load(dataset_dir)),
      cached_(cache_in_ram) {
  for (std::size_t i = 0; i < manifest_.scenes.size(); ++i) {
    const SceneRecord& s = manifest_.scenes[i];
    slot_of_.emplace_back(s.id, i);
    for (int k = 0; k < static_cast<int>(s.snippets.size()); ++k) {
      index_.push_back({s.id, i, k});
    }
  }
  std::sort(slot_of_.begin(), slot_of_.end());
  cache_.resize(manifest_.scenes.size());
  cache_len_.assign(manifest_.scenes.size(), 0);
}

std::size_t SnippetDataset::slot_for(int scene_id) const {
  const auto it = std::lower_bound(
      slot_of_.begin(), slot_of_.end(), std::make_pair(scene_id, std::size_t{0}));
  if (it == slot_of_.end() || it->first != scene_id) {
    throw DataError("dataset: unknown scene id " + std::to_string(scene_id));
  }
  return it->second;
}

const SnippetRecord& SnippetDataset::record(std::size_t index) const {
  const IndexEntry& e = index_.at(index);
  return scene(e.scene).snippets[static_cast<std::size_t>(e.offset)];
}

int SnippetDataset::scene_of(std::size_t index) const {
  return index_.at(index).scene;
}

const SceneRecord& SnippetDataset::scene(int scene_id) const {
  return manifest_.scenes[slot_for(scene_id)];
}

void SnippetDataset::load_scene_audio(int scene_id) const {
  const std::size_t slot = slot_for(scene_id);
  if (!cache_[slot].empty()) return;
  const SceneRecord& s = manifest_.scenes[slot];
  const MultiChannelAudio audio = read_wav(root_ / s.wav);
  if (audio.num_channels() != s.array.count()) {
    throw DataError("dataset: channel count mismatch for " + s.wav);
  }
  const std::int64_t len = audio.num_samples();
  cache_len_[slot] = len;
  auto& buf = cache_[slot];
  buf.resize(static_cast<std::size_t>(len) * audio.channels.size());
  std::size_t k = 0;
  for (const auto& ch : audio.channels) {
    for (float x : ch) {
      const double clamped = std::clamp(static_cast<double>(x), -1.0, 1.0);
      buf[k++] = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
    }
  }
}

SnippetDataset::Item SnippetDataset::get(std::size_t index) const {
  const IndexEntry& e = index_.at(index);
  const std::size_t slot = e.slot;
  const SceneRecord& s = manifest_.scenes[slot];
  const int channels = s.array.count();
  const std::int64_t begin =
      static_cast<std::int64_t>(e.offset) * dsp::kSnippetSamples;

  Item item;
  item.array = &s.array;
  item.scene_id = s.id;
  item.mic_count = channels;
  item.snippet.scene_id = s.id;
  const SnippetRecord& rec = s.snippets[static_cast<std::size_t>(e.offset)];
  item.snippet.labels = rec.labels;
  item.snippet.speech_present = rec.speech_present;
  item.snippet.snr_db = rec.snr_db;
  item.snippet.audio.resize(static_cast<std::size_t>(channels));

  if (cached_) {
    load_scene_audio(e.scene);
    const auto& buf = cache_[slot];
    const std::int64_t len = cache_len_[slot];
    if (begin + dsp::kSnippetSamples > len) {
      throw DataError("dataset: snippet range past audio end");
    }
    for (int c = 0; c < channels; ++c) {
      auto& dst = item.snippet.audio[static_cast<std::size_t>(c)];
      dst.resize(dsp::kSnippetSamples);
      const std::size_t base =
          static_cast<std::size_t>(c) * static_cast<std::size_t>(len) +
          static_cast<std::size_t>(begin);
      for (int i = 0; i < dsp::kSnippetSamples; ++i) {
        dst[static_cast<std::size_t>(i)] =
            static_cast<float>(buf[base + static_cast<std::size_t>(i)]) /
            32767.0f;
      }
    }
    return item;
  }

  const MultiChannelAudio audio = read_wav(root_ / s.wav);
  if (audio.num_channels() != channels ||
      begin + dsp::kSnippetSamples > audio.num_samples()) {
    throw DataError("dataset: bad audio for " + s.wav);
  }
  for (int c = 0; c < channels; ++c) {
    const auto& ch = audio.channels[static_cast<std::size_t>(c)];
    item.snippet.audio[static_cast<std::size_t>(c)] = std::vector<float>(
        ch.begin() + begin, ch.begin() + begin + dsp::kSnippetSamples);
  }
  return item;
}

}  // namespace phasecoder
