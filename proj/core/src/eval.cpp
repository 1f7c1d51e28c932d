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

#include "phasecoder/eval.hpp"

#include <cmath>
#include <sstream>

#include "phasecoder/errors.hpp"
#include "phasecoder/parallel.hpp"

namespace phasecoder {

double angular_error(double pred_deg, double true_deg) {
  if (!std::isfinite(pred_deg) || !std::isfinite(true_deg)) {
    throw std::invalid_argument("angular_error: non-finite input");
  }
  double d = std::fmod(std::abs(pred_deg - true_deg), 360.0);
  return std::min(d, 360.0 - d);
}

EvalReport evaluate(std::span<const FramePrediction> predictions,
                    std::span<const FrameTruth> ground_truth) {
  if (predictions.size() != ground_truth.size()) {
    throw std::invalid_argument("evaluate: prediction/truth length mismatch");
  }
  EvalReport r;
  double sum_az = 0.0, sum_el = 0.0, sum_dist = 0.0;
  std::int64_t hit10_az = 0, hit10_el = 0;

  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const FrameTruth& t = ground_truth[i];
    if (!t.speech) continue;
    ++r.gated_frames;
    const FramePrediction& p = predictions[i];
    if (!p.azimuth_deg && !p.elevation_deg && !p.distance_m) {
      ++r.missed_frames;
    }
    if (p.azimuth_deg) {
      const double err = angular_error(*p.azimuth_deg, t.truth.azimuth_deg);
      sum_az += err;
      ++r.scored_azimuth;
      if (err <= 10.0) ++hit10_az;
    }
    if (p.elevation_deg) {
      const double err = std::abs(*p.elevation_deg - t.truth.elevation_deg);
      sum_el += err;
      ++r.scored_elevation;
      if (err <= 10.0) ++hit10_el;
    }
    if (p.distance_m) {
      sum_dist += std::abs(*p.distance_m - t.truth.distance_m);
      ++r.scored_distance;
    }
  }

  if (r.gated_frames == 0) return r;  // empty-report marker, not NaN
  r.valid = true;
  r.mae_azimuth_deg =
      r.scored_azimuth > 0 ? sum_az / static_cast<double>(r.scored_azimuth)
                           : 0.0;
  r.mae_elevation_deg =
      r.scored_elevation > 0
          ? sum_el / static_cast<double>(r.scored_elevation)
          : 0.0;
  r.mae_distance_m =
      r.scored_distance > 0
          ? sum_dist / static_cast<double>(r.scored_distance)
          : 0.0;
  r.acc10_azimuth =
      static_cast<double>(hit10_az) / static_cast<double>(r.gated_frames);
  r.acc10_elevation =
      static_cast<double>(hit10_el) / static_cast<double>(r.gated_frames);
  return r;
}

std::map<int, EvalReport> breakdown_by_mic_count(
    std::span<const FramePrediction> predictions,
    std::span<const FrameTruth> ground_truth) {
  if (predictions.size() != ground_truth.size()) {
    throw std::invalid_argument("breakdown: length mismatch");
  }
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    groups[ground_truth[i].mic_count].push_back(i);
  }
  std::map<int, EvalReport> out;
  for (const auto& [count, idx] : groups) {
    std::vector<FramePrediction> p;
    std::vector<FrameTruth> t;
    p.reserve(idx.size());
    t.reserve(idx.size());
    for (std::size_t i : idx) {
      p.push_back(predictions[i]);
      t.push_back(ground_truth[i]);
    }
    out[count] = evaluate(p, t);
  }
  return out;
}

bool frame_rms_gate(std::span<const float> mono_frame, double threshold_dbfs) {
  if (mono_frame.empty()) return false;
  double acc = 0.0;
  for (float x : mono_frame) {
    acc += static_cast<double>(x) * static_cast<double>(x);
  }
  const double rms = std::sqrt(acc / static_cast<double>(mono_frame.size()));
  return 20.0 * std::log10(std::max(rms, 1e-12)) > threshold_dbfs;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j = {{"valid", valid},
                      {"gated_frames", gated_frames},
                      {"missed_frames", missed_frames}};
  if (valid) {
    j["mae_azimuth_deg"] = mae_azimuth_deg;
    j["mae_elevation_deg"] = mae_elevation_deg;
    j["mae_distance_m"] = mae_distance_m;
    j["acc10_azimuth"] = acc10_azimuth;
    j["acc10_elevation"] = acc10_elevation;
    j["scored_azimuth"] = scored_azimuth;
    j["scored_elevation"] = scored_elevation;
    j["scored_distance"] = scored_distance;
  }
  return j;
}

DatasetEval evaluate_dataset(const SnippetDataset& dataset,
                             const Model<float>& model,
                             const LabelScheme& scheme, int threads,
                             bool with_breakdown) {
  DatasetEval result;
  const std::size_t n = dataset.size();
  result.predictions.resize(n);
  result.truths.resize(n);

  parallel_for(n, threads, [&](std::size_t i) {
    const SnippetDataset::Item item = dataset.get(i);
    const Prediction pred = predict(item.snippet, *item.array, model, scheme);
    FramePrediction fp;
    fp.azimuth_deg = pred.azimuth_deg;
    fp.elevation_deg = pred.elevation_deg;
    fp.distance_m = pred.distance_m;
    result.predictions[i] = fp;
    result.truths[i] = {dataset.scene(item.scene_id).truth,
                        item.snippet.speech_present, item.mic_count};
  });

  result.overall = evaluate(result.predictions, result.truths);
  if (with_breakdown) {
    result.by_mic_count =
        breakdown_by_mic_count(result.predictions, result.truths);
  }
  return result;
}

std::string render_report_table(const EvalReport& overall,
                                const std::map<int, EvalReport>& by_mic) {
  std::ostringstream os;
  os << "mics  frames  MAE az(deg)  MAE el(deg)  MAE dist(m)  Acc@10 az  "
        "Acc@10 el\n";
  const auto row = [&os](const std::string& tag, const EvalReport& r) {
    char buf[160];
    if (!r.valid) {
      std::snprintf(buf, sizeof(buf), "%-5s %7lld  (no gated frames)\n",
                    tag.c_str(), static_cast<long long>(r.gated_frames));
    } else {
      std::snprintf(buf, sizeof(buf),
                    "%-5s %7lld  %11.2f  %11.2f  %11.3f  %8.1f%%  %8.1f%%\n",
                    tag.c_str(), static_cast<long long>(r.gated_frames),
                    r.mae_azimuth_deg, r.mae_elevation_deg, r.mae_distance_m,
                    100.0 * r.acc10_azimuth, 100.0 * r.acc10_elevation);
    }
    os << buf;
  };
  for (const auto& [count, report] : by_mic) {
    row(std::to_string(count), report);
  }
  row("all", overall);
  return os.str();
}

}  // namespace phasecoder
