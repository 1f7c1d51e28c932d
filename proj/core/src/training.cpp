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

#include "phasecoder/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "phasecoder/checkpoint.hpp"
#include "phasecoder/errors.hpp"

namespace phasecoder {

double lr_at(std::int64_t step, const TrainConfig& config) {
  config.validate();
  if (step < 0) throw std::invalid_argument("lr_at: negative step");
  if (step < config.warmup_steps) {
    return config.peak_lr * static_cast<double>(step) /
           static_cast<double>(config.warmup_steps);
  }
  const std::int64_t horizon = config.horizon();
  if (step >= horizon) return config.end_lr;
  const double t = static_cast<double>(step - config.warmup_steps) /
                   static_cast<double>(horizon - config.warmup_steps);
  return config.end_lr +
         (config.peak_lr - config.end_lr) * 0.5 * (1.0 + std::cos(kPi * t));
}

TrainExample make_example(const SnippetDataset::Item& item, int embed_dim,
                          FlattenOrder order) {
  const PatchSequence seq =
      compute_patch_sequence(item.snippet, *item.array, embed_dim, order);
  TrainExample ex;
  ex.patches = seq.patches.cast<float>();
  ex.positional = seq.positional.cast<float>();
  ex.labels = item.snippet.labels;
  return ex;
}

TrainState TrainState::init(const ModelConfig& config, std::uint64_t seed) {
  TrainState state;
  state.rng = Rng(seed);
  state.params = init_params<float>(config, state.rng);
  state.moment1 = ModelParams<float>::zeros(config);
  state.moment2 = ModelParams<float>::zeros(config);
  return state;
}

void save_train_state(const std::filesystem::path& path,
                      const TrainState& state, const LabelScheme& scheme,
                      const std::string& stage_tag) {
  Container c;
  c.header["kind"] = "train_state";
  c.header["format_version"] = kCheckpointVersion;
  c.header["config"] = config_to_json(state.params.config);
  c.header["label_scheme"] = scheme_to_json(scheme);
  c.header["stage"] = stage_tag;
  c.header["step"] = state.step;
  c.header["stage_step"] = state.stage_step;
  c.header["cursor"] = state.cursor;
  c.header["rng_state"] = state.rng.save_state();
  c.header["last_loss"] = state.last_loss;
  c.header["clamp_warnings"] = state.clamp_warnings;
  detail::params_to_container(state.params, c, "params.");
  detail::params_to_container(state.moment1, c, "m1.");
  detail::params_to_container(state.moment2, c, "m2.");
  std::vector<float> perm(state.permutation.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    perm[i] = static_cast<float>(state.permutation[i]);
  }
  c.add_tensor("permutation",
               {static_cast<std::int64_t>(perm.size()), 1}, std::move(perm));
  write_container(path, c);
}

TrainState load_train_state(const std::filesystem::path& path,
                            LabelScheme* scheme_out,
                            std::string* stage_tag_out) {
  const Container c = read_container(path);
  if (c.header.value("kind", "") != "train_state") {
    throw DataError("load_train_state: not a train_state file: " +
                    path.string());
  }
  if (stage_tag_out != nullptr) {
    *stage_tag_out = c.header.value("stage", "clean");
  }
  const ModelConfig config = config_from_json(c.header.at("config"));
  TrainState state;
  state.params = ModelParams<float>::zeros(config);
  state.moment1 = ModelParams<float>::zeros(config);
  state.moment2 = ModelParams<float>::zeros(config);
  detail::params_from_container(c, state.params, "params.");
  detail::params_from_container(c, state.moment1, "m1.");
  detail::params_from_container(c, state.moment2, "m2.");
  state.step = c.header.at("step").get<std::int64_t>();
  state.stage_step = c.header.at("stage_step").get<std::int64_t>();
  state.cursor = c.header.at("cursor").get<std::size_t>();
  state.rng.restore_state(c.header.at("rng_state").get<std::string>());
  state.last_loss = c.header.value("last_loss", 0.0);
  state.clamp_warnings = c.header.value("clamp_warnings", std::int64_t{0});
  const auto& perm = c.tensor("permutation");
  state.permutation.resize(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    state.permutation[i] = static_cast<std::uint32_t>(perm[i]);
  }
  if (scheme_out != nullptr) {
    *scheme_out = scheme_from_json(c.header.at("label_scheme"));
  }
  return state;
}

namespace {

void check_labels(const LabelTriple& labels, const ModelConfig& config) {
  if (labels.azimuth.num_classes != config.azimuth_classes ||
      labels.elevation.num_classes != config.elevation_classes ||
      labels.distance.num_classes != config.distance_classes) {
    throw DataError("train: label class counts do not match the model");
  }
}

void write_diagnostics(const std::filesystem::path& out_dir,
                       const TrainState& state, const LossResult& bad) {
  if (out_dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  nlohmann::json j = {{"event", "non_finite_loss"},
                      {"step", state.step},
                      {"stage_step", state.stage_step},
                      {"loss", bad.total},
                      {"loss_azimuth", bad.ce_azimuth},
                      {"loss_elevation", bad.ce_elevation},
                      {"loss_distance", bad.ce_distance}};
  double param_norm = 0.0;
  state.params.visit([&param_norm](const std::string&, const auto& t) {
    param_norm += static_cast<double>(
        t.template cast<double>().squaredNorm());
  });
  j["param_norm"] = std::sqrt(param_norm);
  std::ofstream out(out_dir / "diagnostics.json");
  out << j.dump(1) << '\n';
}

double grad_global_norm(const ModelParams<float>& g) {
  double sq = 0.0;
  g.visit([&sq](const std::string&, const auto& t) {
    sq += static_cast<double>(t.template cast<double>().squaredNorm());
  });
  return std::sqrt(sq);
}

void scale_params(ModelParams<float>& g, float s) {
  g.visit([s](const std::string&, auto& t) { t *= s; });
}

void add_params(ModelParams<float>& dst, const ModelParams<float>& src) {
  std::vector<std::pair<const float*, Eigen::Index>> from;
  src.visit([&from](const std::string&, const auto& t) {
    from.emplace_back(t.data(), t.size());
  });
  std::size_t k = 0;
  dst.visit([&from, &k](const std::string&, auto& t) {
    const auto [ptr, n] = from[k++];
    for (Eigen::Index i = 0; i < n; ++i) t.data()[i] += ptr[i];
  });
}

}  // namespace

LossResult train_step(TrainState& state,
                      const std::vector<TrainExample>& batch,
                      const TrainConfig& config, const LossWeights& weights,
                      const RunHooks& hooks) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  const ModelConfig& mc = state.params.config;
  for (const TrainExample& ex : batch) check_labels(ex.labels, mc);

  const Model<float> model(state.params);
  const int workers =
      std::max(1, std::min<int>(hooks.threads,
                                static_cast<int>(batch.size())));
  const float inv_batch = 1.0f / static_cast<float>(batch.size());

  std::vector<ModelParams<float>> grads(
      static_cast<std::size_t>(workers), ModelParams<float>::zeros(mc));
  std::vector<LossResult> losses(batch.size());

  // Static partition: worker w owns examples [w*B/W, (w+1)*B/W).
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&](int w) {
    try {
      Workspace<float> ws;
      const std::size_t begin = batch.size() * static_cast<std::size_t>(w) /
                                static_cast<std::size_t>(workers);
      const std::size_t end =
          batch.size() * (static_cast<std::size_t>(w) + 1) /
          static_cast<std::size_t>(workers);
      for (std::size_t i = begin; i < end; ++i) {
        const TrainExample& ex = batch[i];
        const ModelOutput<float> out =
            model.forward_cached(ex.patches, ex.positional, ws);
        losses[i] = loss(out, ex.labels, weights);
        VecX<float> d_az = out.probs_az;
        d_az(ex.labels.azimuth.index) -= 1.0f;
        d_az *= static_cast<float>(weights.azimuth) * inv_batch;
        VecX<float> d_el = out.probs_el;
        d_el(ex.labels.elevation.index) -= 1.0f;
        d_el *= static_cast<float>(weights.elevation) * inv_batch;
        VecX<float> d_dist = out.probs_dist;
        d_dist(ex.labels.distance.index) -= 1.0f;
        d_dist *= static_cast<float>(weights.distance) * inv_batch;
        model.backward(ws, d_az, d_el, d_dist,
                       grads[static_cast<std::size_t>(w)]);
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(error_mu);
      if (!error) error = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  LossResult mean;
  for (const LossResult& l : losses) {
    mean.total += l.total;
    mean.ce_azimuth += l.ce_azimuth;
    mean.ce_elevation += l.ce_elevation;
    mean.ce_distance += l.ce_distance;
    mean.clamped += l.clamped;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  mean.total *= inv;
  mean.ce_azimuth *= inv;
  mean.ce_elevation *= inv;
  mean.ce_distance *= inv;
  state.clamp_warnings += mean.clamped;

  if (!std::isfinite(mean.total)) {
    write_diagnostics(hooks.out_dir, state, mean);
    throw NumericError("train_step: non-finite loss at step " +
                       std::to_string(state.step));
  }

  // Ordered reduction keeps the result independent of scheduling.
  for (int w = 1; w < workers; ++w) {
    add_params(grads[0], grads[static_cast<std::size_t>(w)]);
  }
  if (config.grad_clip_norm > 0.0) {
    const double norm = grad_global_norm(grads[0]);
    if (norm > config.grad_clip_norm) {
      scale_params(grads[0],
                   static_cast<float>(config.grad_clip_norm / norm));
    }
  }

  const double lr = lr_at(state.stage_step, config);
  adamw_update(state.params, state.moment1, state.moment2, grads[0],
               state.stage_step + 1, lr, config.weight_decay);
  ++state.step;
  ++state.stage_step;
  state.last_loss = mean.total;
  return mean;
}

namespace {

std::vector<std::size_t> next_batch_indices(TrainState& state,
                                            std::size_t dataset_size,
                                            int batch_size) {
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(batch_size));
  while (out.size() < static_cast<std::size_t>(batch_size)) {
    if (state.cursor >= state.permutation.size()) {
      // Reshuffled epoch.
      if (state.permutation.size() != dataset_size) {
        state.permutation.resize(dataset_size);
        for (std::size_t i = 0; i < dataset_size; ++i) {
          state.permutation[i] = static_cast<std::uint32_t>(i);
        }
      }
      for (std::size_t i = dataset_size; i > 1; --i) {
        const auto j = static_cast<std::size_t>(
            state.rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(state.permutation[i - 1], state.permutation[j]);
      }
      state.cursor = 0;
    }
    out.push_back(state.permutation[state.cursor++]);
  }
  return out;
}

}  // namespace

void run_stage(TrainState& state, const SnippetDataset& dataset,
               const TrainConfig& config, const LossWeights& weights,
               const RunHooks& hooks) {
  config.validate();
  if (dataset.size() == 0) throw DataError("run_stage: empty dataset");
  const int embed_dim = state.params.config.embed_dim;
  const auto t0 = std::chrono::steady_clock::now();

  while (state.stage_step < config.steps) {
    const std::vector<std::size_t> indices =
        next_batch_indices(state, dataset.size(), config.batch_size);

    std::vector<TrainExample> batch(indices.size());
    const int workers = std::max(
        1, std::min<int>(hooks.threads, static_cast<int>(indices.size())));
    std::vector<std::thread> pool;
    auto assemble = [&](int w) {
      const std::size_t begin = indices.size() * static_cast<std::size_t>(w) /
                                static_cast<std::size_t>(workers);
      const std::size_t end = indices.size() *
                              (static_cast<std::size_t>(w) + 1) /
                              static_cast<std::size_t>(workers);
      for (std::size_t i = begin; i < end; ++i) {
        batch[i] = make_example(dataset.get(indices[i]), embed_dim,
                                hooks.order);
      }
    };
    if (workers == 1) {
      assemble(0);
    } else {
      for (int w = 0; w < workers; ++w) pool.emplace_back(assemble, w);
      for (auto& th : pool) th.join();
      pool.clear();
    }

    const LossResult l = train_step(state, batch, config, weights, hooks);

    if (hooks.log != nullptr &&
        (state.stage_step % hooks.log_every == 0 ||
         state.stage_step == config.steps)) {
      const double wall_ms =
          std::chrono::duration<double, std::milli>(
              std::chrono::steady_clock::now() - t0)
              .count();
      nlohmann::json line = {{"step", state.step},
                             {"stage", config.stage},
                             {"stage_step", state.stage_step},
                             {"loss", l.total},
                             {"loss_azimuth", l.ce_azimuth},
                             {"loss_elevation", l.ce_elevation},
                             {"loss_distance", l.ce_distance},
                             {"lr", lr_at(state.stage_step - 1, config)},
                             {"wall_ms", wall_ms}};
      (*hooks.log) << line.dump() << '\n' << std::flush;
    }
    if (hooks.checkpoint_every > 0 && !hooks.out_dir.empty() &&
        state.stage_step % hooks.checkpoint_every == 0) {
      save_train_state(hooks.out_dir / "train_state.bin", state, hooks.scheme,
                       config.stage);
    }
    if (hooks.should_stop && state.stage_step % hooks.stop_poll_every == 0 &&
        hooks.should_stop(state)) {
      break;
    }
  }
}

TrainState run_curriculum(const TrainConfig& stage1, const TrainConfig& stage2,
                          const ModelConfig& model_config,
                          const SnippetDataset& clean_data,
                          const SnippetDataset* noisy_data,
                          const LossWeights& weights, const RunHooks& hooks) {
  TrainState state = TrainState::init(model_config, stage1.seed);
  run_stage(state, clean_data, stage1, weights, hooks);

  if (stage2.steps > 0) {
    if (noisy_data == nullptr) {
      throw DataError("run_curriculum: stage 2 requested without noisy data");
    }
    // Stage 2 resumes the parameters with a fresh optimizer and schedule.
    state.stage_step = 0;
    state.moment1.set_zero();
    state.moment2.set_zero();
    state.permutation.clear();
    state.cursor = 0;
    run_stage(state, *noisy_data, stage2, weights, hooks);
  }
  return state;
}

}  // namespace phasecoder
