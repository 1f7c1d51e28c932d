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

#ifndef PHASECODER_TRAINING_HPP_
#define PHASECODER_TRAINING_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "phasecoder/dataset.hpp"
#include "phasecoder/model.hpp"

namespace phasecoder {

struct LossWeights {
  double azimuth = 1.0;
  double elevation = 1.0;
  double distance = 0.5;
};

struct LossResult {
  double total = 0.0;
  double ce_azimuth = 0.0;
  double ce_elevation = 0.0;
  double ce_distance = 0.0;
  int clamped = 0;  // probabilities clamped at 1e-12
};

inline constexpr double kProbClamp = 1e-12;

// Weighted sum of per-head cross-entropies: CE = -log p[true bin].
template <typename S>
LossResult loss(const ModelOutput<S>& out, const LabelTriple& labels,
                const LossWeights& w) {
  LossResult r;
  const auto ce = [&r](const VecX<S>& probs, const OneHotLabel& label) {
    if (label.index < 0 || label.index >= probs.size()) {
      throw std::invalid_argument("loss: label index out of range");
    }
    double p = static_cast<double>(probs(label.index));
    if (p < kProbClamp) {
      p = kProbClamp;
      ++r.clamped;
    }
    return -std::log(p);
  };
  r.ce_azimuth = ce(out.probs_az, labels.azimuth);
  r.ce_elevation = ce(out.probs_el, labels.elevation);
  r.ce_distance = ce(out.probs_dist, labels.distance);
  r.total = w.azimuth * r.ce_azimuth + w.elevation * r.ce_elevation +
            w.distance * r.ce_distance;
  return r;
}

struct TrainConfig {
  std::string stage = "clean";  // "clean" or "noisy"
  std::int64_t steps = 20000;
  std::int64_t schedule_steps = 0;  // cosine horizon; 0 means == steps
  int batch_size = 32;
  double peak_lr = 1e-4;
  double end_lr = 1e-5;
  std::int64_t warmup_steps = 2000;
  double weight_decay = 0.01;
  double grad_clip_norm = 0.0;  // 0 disables clipping
  std::uint64_t seed = 0;

  std::int64_t horizon() const {
    return schedule_steps > 0 ? schedule_steps : steps;
  }
  void validate() const {
    if (warmup_steps < 0 || steps <= warmup_steps) {
      throw std::invalid_argument("TrainConfig: need steps > warmup >= 0");
    }
    if (!(peak_lr > 0.0) || !(end_lr > 0.0)) {
      throw std::invalid_argument("TrainConfig: rates must be positive");
    }
    if (batch_size <= 0) {
      throw std::invalid_argument("TrainConfig: batch_size must be positive");
    }
  }
};

// Linear warmup 0 -> peak over warmup_steps, then cosine decay from peak to
// end_lr at the schedule horizon; constant end_lr beyond it.
double lr_at(std::int64_t step, const TrainConfig& config);

// One snippet prepared for the model.
struct TrainExample {
  MatX<float> patches;     // L x 258
  MatX<float> positional;  // L x D
  LabelTriple labels;
};

TrainExample make_example(const SnippetDataset::Item& item, int embed_dim,
                          FlattenOrder order = FlattenOrder::kFrameMajor);

// Decoupled AdamW step (beta1 0.9, beta2 0.999, eps 1e-8); per-element math
// in double. `t` is the 1-based update count.
template <typename S>
void adamw_update(ModelParams<S>& params, ModelParams<S>& m, ModelParams<S>& v,
                  const ModelParams<S>& grads, std::int64_t t, double lr,
                  double weight_decay) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));

  std::vector<MatX<S>*> pt, mt, vt;
  std::vector<const MatX<S>*> gt;
  // visit() yields tensors in one fixed order for all four structures; the
  // generic lambda collects raw spans to update in lockstep.
  struct Slot {
    S* p;
    S* m;
    S* v;
    const S* g;
    Eigen::Index n;
  };
  std::vector<Slot> slots;
  {
    std::vector<std::pair<S*, Eigen::Index>> ps, ms, vs;
    std::vector<std::pair<const S*, Eigen::Index>> gs;
    params.visit([&ps](const std::string&, auto& tns) {
      ps.emplace_back(tns.data(), tns.size());
    });
    m.visit([&ms](const std::string&, auto& tns) {
      ms.emplace_back(tns.data(), tns.size());
    });
    v.visit([&vs](const std::string&, auto& tns) {
      vs.emplace_back(tns.data(), tns.size());
    });
    grads.visit([&gs](const std::string&, const auto& tns) {
      gs.emplace_back(tns.data(), tns.size());
    });
    for (std::size_t i = 0; i < ps.size(); ++i) {
      slots.push_back(
          {ps[i].first, ms[i].first, vs[i].first, gs[i].first, ps[i].second});
    }
  }
  for (const Slot& s : slots) {
    for (Eigen::Index i = 0; i < s.n; ++i) {
      const double g = static_cast<double>(s.g[i]);
      const double m_new = kBeta1 * static_cast<double>(s.m[i]) +
                           (1.0 - kBeta1) * g;
      const double v_new = kBeta2 * static_cast<double>(s.v[i]) +
                           (1.0 - kBeta2) * g * g;
      s.m[i] = static_cast<S>(m_new);
      s.v[i] = static_cast<S>(v_new);
      const double m_hat = m_new / bc1;
      const double v_hat = v_new / bc2;
      const double p = static_cast<double>(s.p[i]);
      s.p[i] = static_cast<S>(p - lr * (m_hat / (std::sqrt(v_hat) + kEps) +
                                        weight_decay * p));
    }
  }
}

// Full optimizer state; resumable bit-identically (for one platform and
// thread count) through save/load_train_state.
struct TrainState {
  ModelParams<float> params;
  ModelParams<float> moment1, moment2;
  std::int64_t step = 0;        // completed optimizer steps, all stages
  std::int64_t stage_step = 0;  // steps within the current stage
  Rng rng{0};
  std::vector<std::uint32_t> permutation;  // epoch shuffle of snippet indices
  std::size_t cursor = 0;
  double last_loss = 0.0;
  std::int64_t clamp_warnings = 0;

  static TrainState init(const ModelConfig& config, std::uint64_t seed);
};

void save_train_state(const std::filesystem::path& path,
                      const TrainState& state, const LabelScheme& scheme,
                      const std::string& stage_tag = "clean");
TrainState load_train_state(const std::filesystem::path& path,
                            LabelScheme* scheme_out = nullptr,
                            std::string* stage_tag_out = nullptr);

struct RunHooks {
  std::ostream* log = nullptr;  // JSON-lines training log
  std::int64_t log_every = 50;
  std::filesystem::path out_dir;       // checkpoints + diagnostics
  std::int64_t checkpoint_every = 0;   // 0 disables periodic checkpoints
  int threads = 1;
  LabelScheme scheme = LabelScheme::defaults();
  FlattenOrder order = FlattenOrder::kFrameMajor;
  // Polled between steps; return true to stop the stage early.
  std::function<bool(const TrainState&)> should_stop;
  std::int64_t stop_poll_every = 250;
};

// One AdamW step on a prepared batch. Gradients are averaged over the batch;
// examples are processed in parallel with a static partition so results are
// deterministic for a fixed thread count. Throws NumericError (after writing
// a diagnostics dump if hooks.out_dir is set) when the loss is non-finite.
LossResult train_step(TrainState& state, const std::vector<TrainExample>& batch,
                      const TrainConfig& config, const LossWeights& weights,
                      const RunHooks& hooks);

// Runs config.steps optimizer steps (counted from the current stage_step)
// over reshuffled epochs of the dataset.
void run_stage(TrainState& state, const SnippetDataset& dataset,
               const TrainConfig& config, const LossWeights& weights,
               const RunHooks& hooks);

// Stage 1 on the clean dataset, then stage 2 on the noisy dataset at the
// stage-2 learning rates with fresh optimizer moments and schedule.
// stage2.steps == 0 skips stage 2 entirely.
TrainState run_curriculum(const TrainConfig& stage1, const TrainConfig& stage2,
                          const ModelConfig& model_config,
                          const SnippetDataset& clean_data,
                          const SnippetDataset* noisy_data,
                          const LossWeights& weights, const RunHooks& hooks);

}  // namespace phasecoder

#endif  // PHASECODER_TRAINING_HPP_
