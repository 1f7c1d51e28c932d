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

#ifndef PHASECODER_EVAL_HPP_
#define PHASECODER_EVAL_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phasecoder/dataset.hpp"
#include "phasecoder/geometry.hpp"
#include "phasecoder/model.hpp"

namespace phasecoder {

// Wrap-around angular error: min(|d| mod 360, 360 - |d| mod 360), in
// [0, 180].
double angular_error(double pred_deg, double true_deg);

struct FramePrediction {
  std::optional<double> azimuth_deg;
  std::optional<double> elevation_deg;
  std::optional<double> distance_m;
};

struct FrameTruth {
  SourceTruth truth;
  bool speech = true;
  int mic_count = 0;
};

// Metrics over 250 ms frames where speech is detected. Azimuth error wraps;
// elevation and distance errors are plain absolute differences. Acc@10 is
// inclusive (error <= 10 degrees) and counts no-speech predictions on gated
// frames as misses; MAE averages over frames that carry a numeric
// prediction.
struct EvalReport {
  bool valid = false;  // false when no frame passes the gate
  std::int64_t gated_frames = 0;
  std::int64_t scored_azimuth = 0;
  std::int64_t scored_elevation = 0;
  std::int64_t scored_distance = 0;
  std::int64_t missed_frames = 0;  // gated but predicted as no-speech
  double mae_azimuth_deg = 0.0;
  double mae_elevation_deg = 0.0;
  double mae_distance_m = 0.0;
  double acc10_azimuth = 0.0;
  double acc10_elevation = 0.0;

  nlohmann::json to_json() const;
};

EvalReport evaluate(std::span<const FramePrediction> predictions,
                    std::span<const FrameTruth> ground_truth);

// One EvalReport per mic count present in the data (3..8 in practice).
std::map<int, EvalReport> breakdown_by_mic_count(
    std::span<const FramePrediction> predictions,
    std::span<const FrameTruth> ground_truth);

// Energy-threshold speech gate for external audio, on the mono mean frame:
// RMS above threshold_dbfs (relative to full scale 1.0).
bool frame_rms_gate(std::span<const float> mono_frame,
                    double threshold_dbfs = -50.0);

// Runs the model over every snippet of a dataset.
struct DatasetEval {
  EvalReport overall;
  std::map<int, EvalReport> by_mic_count;
  std::vector<FramePrediction> predictions;
  std::vector<FrameTruth> truths;
};

DatasetEval evaluate_dataset(const SnippetDataset& dataset,
                             const Model<float>& model,
                             const LabelScheme& scheme, int threads,
                             bool with_breakdown);

// Fixed-width text table; one row per mic count plus the overall row.
std::string render_report_table(const EvalReport& overall,
                                const std::map<int, EvalReport>& by_mic);

}  // namespace phasecoder

#endif  // PHASECODER_EVAL_HPP_
