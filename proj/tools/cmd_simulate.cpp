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

#include <cstdio>
#include <memory>

#include "phasecoder/dataset.hpp"
#include "phasecoder/dsp.hpp"
#include "phasecoder/errors.hpp"
#include "phasecoder/parallel.hpp"
#include "phasecoder/sources.hpp"
#include "tool_util.hpp"

namespace phasecoder::tools {

namespace {

std::string shard_path(int scene_id, int shard_size) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "shard_%03d/scene_%06d.wav",
                scene_id / shard_size, scene_id);
  return buf;
}

}  // namespace

int cmd_simulate(const nlohmann::json& args) {
  const auto out_dir = std::filesystem::path(args.at("out").get<std::string>());
  const auto seed = args.at("seed").get<std::uint64_t>();
  const int num_scenes = args.at("num_scenes").get<int>();
  const int shard_size = args.at("shard_size").get<int>();
  const bool distractors = args.at("distractors").get<bool>();
  const bool pcm16 = args.at("pcm16").get<bool>();
  const WavFormat wav_format =
      pcm16 ? WavFormat::kPcm16 : WavFormat::kFloat32;
  if (num_scenes <= 0) throw DataError("simulate: num_scenes must be > 0");

  SceneSamplerConfig sampler;
  const std::string table = args.at("material_table").get<std::string>();
  if (!table.empty()) sampler.materials = load_material_table(table);
  sampler.min_mics = args.at("min_mics").get<int>();
  sampler.max_mics = args.at("max_mics").get<int>();

  RenderOptions render;
  render.max_order = args.at("max_order").get<int>();

  const double snr_min = args.at("snr_min").get<double>();
  const double snr_max = args.at("snr_max").get<double>();
  const double speech_min = args.at("speech_min").get<double>();
  const double speech_max = args.at("speech_max").get<double>();
  const std::string speech_dir = args.at("speech_dir").get<std::string>();

  std::filesystem::create_directories(out_dir);
  for (int shard = 0; shard <= (num_scenes - 1) / shard_size; ++shard) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "shard_%03d", shard);
    std::filesystem::create_directories(out_dir / buf);
  }

  std::unique_ptr<SpeechSource> speech_source;
  if (speech_dir.empty()) {
    speech_source =
        std::make_unique<SyntheticSpeechSource>(speech_min, speech_max);
  } else {
    speech_source = std::make_unique<WavDirSpeechSource>(speech_dir);
  }

  DatasetManifest manifest;
  manifest.scheme = render.scheme;
  manifest.scenes.resize(static_cast<std::size_t>(num_scenes));

  const Rng master(seed);
  std::atomic<std::int64_t> clipped{0};

  parallel_for(
      static_cast<std::size_t>(num_scenes), args.at("threads").get<int>(),
      [&](std::size_t i) {
        Rng rng = master.child(i);
        const Scene scene = sample_scene(rng, sampler);
        const std::vector<double> speech = speech_source->next(rng);

        std::optional<DistractorInput> distractor;
        double snr_db = 0.0;
        if (distractors) {
          DistractorInput d;
          d.position = sample_in_room_position(
              rng, scene.room, centroid(scene.array), 0.1,
              sampler.wall_margin);
          d.samples = synth_distractor(
              rng, static_cast<double>(speech.size()) / dsp::kSampleRate);
          snr_db = rng.uniform(snr_min, snr_max);
          distractor = std::move(d);
        }

        const RenderResult rendered =
            render_snippets(scene, speech, distractor, snr_db, rng, render);
        clipped += rendered.clipped_samples;

        SceneRecord record;
        record.id = static_cast<int>(i);
        record.seed = rng.seed();
        record.room = scene.room;
        record.array = scene.array;
        record.source = scene.source;
        record.truth = scene.truth;
        if (distractor.has_value()) {
          record.distractor_position = distractor->position;
        }
        for (const Snippet& s : rendered.snippets) {
          record.snippets.push_back(
              {s.labels, s.speech_present, s.snr_db});
        }

        if (!rendered.snippets.empty()) {
          record.wav = shard_path(record.id, shard_size);
          MultiChannelAudio audio;
          audio.sample_rate = dsp::kSampleRate;
          const int channels = scene.array.count();
          audio.channels.resize(static_cast<std::size_t>(channels));
          for (const Snippet& s : rendered.snippets) {
            for (int c = 0; c < channels; ++c) {
              auto& dst = audio.channels[static_cast<std::size_t>(c)];
              const auto& src = s.audio[static_cast<std::size_t>(c)];
              dst.insert(dst.end(), src.begin(), src.end());
            }
          }
          write_wav(out_dir / record.wav, audio, wav_format);
        } else {
          log_event("warn", "scene_without_snippets",
                    {{"scene", record.id}});
        }
        manifest.scenes[i] = std::move(record);
      });

  manifest.save(out_dir);
  write_provenance(out_dir, "simulate", args);
  log_event("info", "simulate_done",
            {{"scenes", num_scenes},
             {"clipped_samples", clipped.load()},
             {"out", out_dir.string()}});
  return 0;
}

}  // namespace phasecoder::tools
