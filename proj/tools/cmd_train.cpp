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

#include <fstream>
#include <memory>

#include "phasecoder/checkpoint.hpp"
#include "phasecoder/errors.hpp"
#include "phasecoder/training.hpp"
#include "tool_util.hpp"

namespace phasecoder::tools {

namespace {

TrainConfig stage_from_json(const nlohmann::json& j, const std::string& name) {
  TrainConfig c;
  c.stage = j.value("stage", name);
  c.steps = j.value("steps", c.steps);
  c.schedule_steps = j.value("schedule_steps", c.schedule_steps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.peak_lr = j.value("peak_lr", c.peak_lr);
  c.end_lr = j.value("end_lr", c.end_lr);
  c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.grad_clip_norm = j.value("grad_clip_norm", c.grad_clip_norm);
  return c;
}

std::filesystem::path stage_data(const nlohmann::json& stage,
                                 const std::string& fallback,
                                 const std::string& name) {
  const std::string dir = stage.value("data", fallback);
  if (dir.empty()) {
    throw DataError("train: no dataset for " + name +
                    " (set stage data in the config or pass --data)");
  }
  return dir;
}

void check_scheme(const LabelScheme& scheme, const ModelConfig& config) {
  if (scheme.azimuth_classes() != config.azimuth_classes ||
      scheme.elevation_classes() != config.elevation_classes ||
      scheme.distance_classes() != config.distance_classes) {
    throw DataError(
        "train: dataset label grids do not match the model class counts");
  }
}

}  // namespace

int cmd_train(const nlohmann::json& args) {
  const std::filesystem::path config_path =
      args.at("config").get<std::string>();
  std::ifstream in(config_path);
  if (!in) throw DataError("train: cannot open config " + config_path.string());
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("train: bad config JSON: " + std::string(e.what()));
  }

  ModelConfig model_config;
  if (cfg.contains("model")) {
    model_config = config_from_json(cfg.at("model"));
  } else {
    model_config = ModelConfig::preset(cfg.value("preset", "medium"));
  }

  LossWeights weights;
  if (cfg.contains("loss_weights")) {
    const auto& w = cfg.at("loss_weights");
    weights.azimuth = w.value("azimuth", weights.azimuth);
    weights.elevation = w.value("elevation", weights.elevation);
    weights.distance = w.value("distance", weights.distance);
  }

  TrainConfig stage1 = stage_from_json(cfg.value("stage1", nlohmann::json::object()), "clean");
  TrainConfig stage2 = stage_from_json(cfg.value("stage2", nlohmann::json::object()), "noisy");
  stage1.seed = cfg.value("seed", std::uint64_t{0});
  stage2.seed = stage1.seed;
  if (!cfg.contains("stage2")) stage2.steps = 0;

  const std::string fallback_data = args.at("data").get<std::string>();
  const std::filesystem::path out_dir = args.at("out").get<std::string>();
  std::filesystem::create_directories(out_dir);

  const auto clean_dir = stage_data(
      cfg.value("stage1", nlohmann::json::object()), fallback_data, "stage1");
  const SnippetDataset clean(clean_dir);
  check_scheme(clean.scheme(), model_config);

  std::unique_ptr<SnippetDataset> noisy;
  if (stage2.steps > 0) {
    const auto noisy_dir = stage_data(
        cfg.value("stage2", nlohmann::json::object()), fallback_data,
        "stage2");
    noisy = std::make_unique<SnippetDataset>(noisy_dir);
    check_scheme(noisy->scheme(), model_config);
  }

  std::ofstream log_stream(out_dir / "train_log.jsonl", std::ios::app);
  RunHooks hooks;
  hooks.log = &log_stream;
  hooks.log_every = cfg.value("log_every", std::int64_t{50});
  hooks.out_dir = out_dir;
  hooks.checkpoint_every = cfg.value("checkpoint_every", std::int64_t{0});
  hooks.threads = args.at("threads").get<int>();
  hooks.scheme = clean.scheme();
  hooks.order = cfg.value("order", "frame_major") == "channel_major"
                    ? FlattenOrder::kChannelMajor
                    : FlattenOrder::kFrameMajor;

  const std::string resume = args.at("resume").get<std::string>();
  TrainState state;
  std::string resume_stage = "clean";
  if (!resume.empty()) {
    const Container c = read_container(resume);
    resume_stage = c.header.value("stage", "clean");
    state = load_train_state(resume);
    log_event("info", "resumed",
              {{"from", resume}, {"step", state.step},
               {"stage", resume_stage}});
  } else {
    state = TrainState::init(model_config, stage1.seed);
  }

  const auto save_stage_state = [&](const std::string& stage_name) {
    Container probe;  // tag the stage so --resume restarts in the right one
    save_train_state(out_dir / "train_state.bin", state, hooks.scheme);
    Container c = read_container(out_dir / "train_state.bin");
    c.header["stage"] = stage_name;
    write_container(out_dir / "train_state.bin", c);
    (void)probe;
  };

  if (resume_stage == "clean" && state.stage_step < stage1.steps) {
    run_stage(state, clean, stage1, weights, hooks);
    save_stage_state("clean");
  }
  if (stage2.steps > 0) {
    if (resume_stage == "clean") {
      state.stage_step = 0;
      state.moment1.set_zero();
      state.moment2.set_zero();
      state.permutation.clear();
      state.cursor = 0;
    }
    run_stage(state, *noisy, stage2, weights, hooks);
    save_stage_state("noisy");
  }

  Checkpoint final_ckpt{state.params, hooks.scheme, state.step,
                        state.rng.save_state()};
  save_checkpoint(out_dir / "model.ckpt", final_ckpt);
  write_provenance(out_dir, "train",
                   {{"args", args}, {"resolved_config", cfg}});
  log_event("info", "train_done",
            {{"steps", state.step}, {"loss", state.last_loss}});
  return 0;
}

}  // namespace phasecoder::tools
