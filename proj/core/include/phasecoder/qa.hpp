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

#ifndef PHASECODER_QA_HPP_
#define PHASECODER_QA_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "phasecoder/dataset.hpp"
#include "phasecoder/geometry.hpp"
#include "phasecoder/rng.hpp"

namespace phasecoder {

enum class QATask {
  kLocalization = 1,
  kReasoning = 2,
  kSpatialTranscription = 3,
  kTargetedTranscription = 4,
};

QATask qa_task_from_int(int task);
std::string qa_task_name(QATask task);

struct QASource {
  SourceTruth truth;
  std::string transcript;
};

struct QARecord {
  QATask task = QATask::kLocalization;
  std::string prompt;
  std::vector<QASource> sources;  // speakers present after dropout
  std::string answer;             // canonical answer string
  std::string question_type;      // reasoning category / targeting kind
  std::string template_id;
  std::uint64_t seed = 0;
  std::optional<bool> yes;       // reasoning label
  std::optional<int> target_index;  // targeted transcription; -1 = no match
};

struct QAConfig {
  LabelScheme scheme = LabelScheme::defaults();
  // Answer string list for elevation, index-aligned with the elevation grid.
  // Defaults to signed rounded grid values ("-90" .. "090").
  std::vector<std::string> elevation_answer_list;
  double speaker_dropout = 0.05;

  static QAConfig defaults();
};

// Canonical value formatting.
std::string azimuth_answer_string(double azimuth_deg, const QAConfig& config);
std::string elevation_answer_string(double elevation_deg,
                                    const QAConfig& config);
std::string distance_answer_string(double distance_m);

// Canonical answer string for a record's ground truth, in the field order of
// the task's system prompt.
std::string format_answer(const QARecord& record, const QAConfig& config);

struct QAGenResult {
  std::vector<QARecord> records;
  int skipped = 0;  // scenes unusable for the requested task
};

// Generates up to max_n records for one task from the given scenes.
// Transcripts come from `transcripts` (the built-in phrase pool when empty).
// Reasoning sets are exactly balanced between yes and no. Each record's
// second speaker, when needed, is placed inside the record's scene room.
QAGenResult generate_qa(std::span<const SceneRecord> scenes,
                        std::span<const std::string> transcripts, QATask task,
                        Rng& rng, int max_n, const QAConfig& config);

// ---------------------------------------------------------------------------
// Parsing

struct ParsedField {
  enum class State { kMissing, kNone, kValue, kMalformed };
  State state = State::kMissing;
  std::string text;

  bool is_value() const { return state == State::kValue; }
  bool is_none() const { return state == State::kNone; }
};

struct ParsedSource {
  ParsedField transcript, azimuth, elevation, distance;
};

// Tolerant parse of arbitrary model-output text. Total function: unknown or
// out-of-list values become kMalformed, absent keys stay kMissing.
struct ParsedAnswer {
  std::vector<ParsedSource> sources;  // slots 1 and 2 for tasks 1/3
  ParsedField binary;                 // task 2 yes/no
  ParsedField transcript;             // task 4 transcript-or-none
};

ParsedAnswer parse_answer(std::string_view text, QATask task,
                          const QAConfig& config);

// ---------------------------------------------------------------------------
// Scoring

struct WerResult {
  double wer = 0.0;
  int edits = 0;
  int ref_words = 0;
  bool empty_reference = false;  // flagged: non-empty hyp vs empty ref
};

// Word error rate: case-folded, punctuation-stripped, word-level edit
// distance over the reference length.
WerResult wer_detailed(std::string_view hypothesis, std::string_view reference);
double wer(std::string_view hypothesis, std::string_view reference);

inline constexpr double kWerHallucinationFilter = 3.0;

struct QAScore {
  int records = 0;
  // Localization fields (tasks 1 and 3).
  std::optional<double> mae_azimuth_deg;
  std::optional<double> mae_elevation_deg;
  std::optional<double> mae_distance_m;
  int scored_fields = 0;
  int malformed_fields = 0;
  int missing_sources = 0;   // truth source with no parsed value
  int spurious_sources = 0;  // parsed value with no truth source
  // Reasoning (task 2).
  std::optional<double> accuracy;
  std::map<std::string, std::pair<int, int>> accuracy_by_type;  // correct/total
  // Transcription (tasks 3 and 4): WER after the > 3.0 filter.
  std::optional<double> wer_mean;
  std::optional<double> wer_median;
  int wer_scored = 0;
  int wer_filtered = 0;
  // Attribution (task 4).
  std::optional<double> attribution_accuracy;

  nlohmann::json to_json() const;
};

QAScore score(std::span<const QARecord> records,
              std::span<const ParsedAnswer> parsed, QATask task,
              const QAConfig& config);

// ---------------------------------------------------------------------------
// Records on disk: JSON-lines, one record per line.

void write_qa_records(const std::filesystem::path& path,
                      std::span<const QARecord> records);
std::vector<QARecord> read_qa_records(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Spatial token export

inline constexpr int kTokenCount = 188;
inline constexpr int kTokenHopMs = 160;
inline constexpr double kTokenHorizonS = 30.0;

struct TokenExport {
  int version = 1;
  int hop_ms = kTokenHopMs;
  int token_dim = 256;
  std::int64_t bsa_id = 255999;
  std::int64_t esa_id = 255998;
  int real_tokens = 0;  // tokens backed by audio; the rest are zero padding
  bool truncated = false;
  Eigen::MatrixXf tokens;  // kTokenCount x token_dim
};

// Strides per-window spatial embeddings (one per 160 ms hop, starting at 0)
// onto the 30 s padded horizon: exactly 188 tokens, zero-padded past the
// audio, truncated (with a flag) beyond 30 s.
TokenExport export_tokens(std::span<const Eigen::VectorXf> embeddings,
                          double audio_duration_s);

void write_token_export(const std::filesystem::path& path,
                        const TokenExport& tokens);
TokenExport read_token_export(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Template access (exposed for verbatim-membership checks)

namespace qa_templates {
std::string_view system_prompt(QATask task);
std::span<const std::string_view> task1_prompts();
std::span<const std::string_view> task3_prompts();
std::span<const std::string_view> reasoning_types();
std::span<const std::string_view> reasoning_prompts(std::string_view type);
std::span<const std::string_view> target_kinds();
std::span<const std::string_view> target_prompts(std::string_view kind);
std::span<const std::string_view> azimuth_values();    // "000" .. "350"
std::span<const std::string_view> elevation_prompt_values();  // "000" .. "180"
std::span<const std::string_view> distance_values();   // decimeter strings
std::span<const std::string_view> phrase_pool();       // bundled transcripts
}  // namespace qa_templates

}  // namespace phasecoder

#endif  // PHASECODER_QA_HPP_
