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

#include "phasecoder/qa.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "phasecoder/container.hpp"
#include "phasecoder/errors.hpp"
#include "phasecoder/eval.hpp"
#include "phasecoder/json_util.hpp"
#include "phasecoder/simulation.hpp"

namespace phasecoder {

namespace {

using qa_templates::azimuth_values;
using qa_templates::distance_values;
using qa_templates::elevation_prompt_values;

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string substitute(std::string_view tmpl, std::string_view key,
                       std::string_view value) {
  std::string out(tmpl);
  const std::string token = "{" + std::string(key) + "}";
  std::size_t pos = 0;
  while ((pos = out.find(token, pos)) != std::string::npos) {
    out.replace(pos, token.size(), value);
    pos += value.size();
  }
  return out;
}

// Directional semantics: azimuth 0 is to the right, 90 in front, 180 to the
// left, 270 behind.
bool is_left(double az) { return az > 90.0 && az < 270.0; }
bool is_right(double az) { return az < 90.0 || az > 270.0; }
bool is_front(double az) { return az > 0.0 && az < 180.0; }
bool is_back(double az) { return az > 180.0 && az < 360.0; }
double leftness(double az) { return -std::cos(deg_to_rad(az)); }

constexpr std::array<double, 9> kDistanceThresholds = {1.0, 1.5, 2.0, 2.5,
                                                       3.0, 3.5, 4.0, 4.5,
                                                       5.0};
constexpr std::array<int, 5> kAngleThresholds = {30, 45, 60, 90, 120};

std::string format_threshold(double v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

}  // namespace

QATask qa_task_from_int(int task) {
  switch (task) {
    case 1:
      return QATask::kLocalization;
    case 2:
      return QATask::kReasoning;
    case 3:
      return QATask::kSpatialTranscription;
    case 4:
      return QATask::kTargetedTranscription;
    default:
      throw DataError("qa: task must be 1..4, got " + std::to_string(task));
  }
}

std::string qa_task_name(QATask task) {
  switch (task) {
    case QATask::kLocalization:
      return "localization";
    case QATask::kReasoning:
      return "reasoning";
    case QATask::kSpatialTranscription:
      return "spatial_transcription";
    case QATask::kTargetedTranscription:
      return "targeted_transcription";
  }
  return "unknown";
}

QAConfig QAConfig::defaults() {
  QAConfig c;
  const LabelGrid& grid = c.scheme.elevation;
  c.elevation_answer_list.reserve(static_cast<std::size_t>(grid.bins()));
  for (int j = 0; j < grid.bins(); ++j) {
    const long v = std::lround(grid.value(j));
    char buf[24];
    if (v < 0) {
      std::snprintf(buf, sizeof(buf), "%ld", v);
    } else {
      std::snprintf(buf, sizeof(buf), "%03ld", v);
    }
    c.elevation_answer_list.emplace_back(buf);
  }
  return c;
}

std::string azimuth_answer_string(double azimuth_deg, const QAConfig& config) {
  const OneHotLabel bin =
      discretize(azimuth_deg, config.scheme.azimuth, true,
                 config.scheme.circular_azimuth);
  return std::string(azimuth_values()[static_cast<std::size_t>(bin.index)]);
}

std::string elevation_answer_string(double elevation_deg,
                                    const QAConfig& config) {
  const OneHotLabel bin =
      discretize(elevation_deg, config.scheme.elevation, true);
  if (config.elevation_answer_list.size() !=
      static_cast<std::size_t>(config.scheme.elevation.bins())) {
    throw DataError("qa: elevation answer list does not match the grid");
  }
  return config.elevation_answer_list[static_cast<std::size_t>(bin.index)];
}

std::string distance_answer_string(double distance_m) {
  const double decimeters = 10.0 * distance_m;
  std::size_t best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  const auto values = distance_values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double err =
        std::abs(decimeters - std::stod(std::string(values[i])));
    if (err < best_err) {
      best_err = err;
      best = i;
    }
  }
  return std::string(values[best]);
}

namespace {

std::string source_fields(const QARecord& record, int slot, bool transcripts,
                          const QAConfig& config) {
  const std::string n = std::to_string(slot + 1);
  const bool present = slot < static_cast<int>(record.sources.size());
  std::string out;
  if (transcripts) {
    out += "transcript_" + n + "=";
    out += present ? "[" + record.sources[static_cast<std::size_t>(slot)]
                               .transcript + "]"
                   : "none";
    out += ", ";
  }
  if (present) {
    const QASource& s = record.sources[static_cast<std::size_t>(slot)];
    out += "azimuth_degrees_" + n + "=" +
           azimuth_answer_string(s.truth.azimuth_deg, config) + ", ";
    out += "elevation_degrees_" + n + "=" +
           elevation_answer_string(s.truth.elevation_deg, config) + ", ";
    out += "distance_meters_" + n + "=" +
           distance_answer_string(s.truth.distance_m);
  } else {
    out += "azimuth_degrees_" + n + "=none, ";
    out += "elevation_degrees_" + n + "=none, ";
    out += "distance_meters_" + n + "=none";
  }
  return out;
}

}  // namespace

std::string format_answer(const QARecord& record, const QAConfig& config) {
  switch (record.task) {
    case QATask::kLocalization:
      return source_fields(record, 0, false, config) + ", " +
             source_fields(record, 1, false, config);
    case QATask::kSpatialTranscription:
      return source_fields(record, 0, true, config) + ", " +
             source_fields(record, 1, true, config);
    case QATask::kReasoning:
      if (!record.yes.has_value()) {
        throw DataError("format_answer: reasoning record lacks yes/no label");
      }
      return *record.yes ? "yes" : "no";
    case QATask::kTargetedTranscription: {
      if (!record.target_index.has_value() || *record.target_index < 0) {
        return "none";
      }
      const auto idx = static_cast<std::size_t>(*record.target_index);
      if (idx >= record.sources.size()) {
        throw DataError("format_answer: target index out of range");
      }
      return "[" + record.sources[idx].transcript + "]";
    }
  }
  throw DataError("format_answer: bad task");
}

// ---------------------------------------------------------------------------
// Generation

namespace {

struct Candidate {
  std::vector<QASource> sources;  // post-dropout, chronological
  bool valid = true;
};

Candidate build_sources(const SceneRecord& scene, int desired,
                        std::span<const std::string> pool, Rng& rng,
                        const QAConfig& config) {
  Candidate c;
  std::vector<QASource> pre;
  pre.push_back(
      {scene.truth,
       std::string(pool[static_cast<std::size_t>(rng.uniform_int(
           0, static_cast<std::int64_t>(pool.size()) - 1))])});
  if (desired == 2) {
    MicArray array = scene.array;
    Vec3 second;
    try {
      second = sample_in_room_position(rng, scene.room, centroid(array), 0.1,
                                       0.2);
    } catch (const DataError&) {
      c.valid = false;
      return c;
    }
    std::string transcript;
    do {
      transcript = std::string(pool[static_cast<std::size_t>(rng.uniform_int(
          0, static_cast<std::int64_t>(pool.size()) - 1))]);
    } while (pool.size() > 1 && transcript == pre[0].transcript);
    pre.push_back({source_truth(second, array), transcript});
  }
  for (const QASource& s : pre) {
    if (!rng.chance(config.speaker_dropout)) c.sources.push_back(s);
  }
  return c;
}

std::string pick(std::span<const std::string_view> list, Rng& rng,
                 std::size_t* index_out = nullptr) {
  const auto i = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(list.size()) - 1));
  if (index_out != nullptr) *index_out = i;
  return std::string(list[i]);
}

bool reasoning_truth(const std::string& type, double threshold_m,
                     int threshold_deg, const std::vector<QASource>& sources) {
  const auto types = qa_templates::reasoning_types();
  const bool single = sources.size() == 1;
  const bool multi = sources.size() == 2;
  if (type == types[0]) {
    return single && sources[0].truth.distance_m > threshold_m;
  }
  if (type == types[1]) {
    return single && sources[0].truth.distance_m < threshold_m;
  }
  if (type == types[2]) return single && is_left(sources[0].truth.azimuth_deg);
  if (type == types[3]) return single && is_right(sources[0].truth.azimuth_deg);
  if (type == types[4]) return single && is_front(sources[0].truth.azimuth_deg);
  if (type == types[5]) return single && is_back(sources[0].truth.azimuth_deg);
  if (type == types[6]) {
    return multi &&
           sources[0].truth.distance_m < sources[1].truth.distance_m;
  }
  if (type == types[7]) {
    return multi &&
           sources[0].truth.distance_m > sources[1].truth.distance_m;
  }
  if (type == types[8]) {
    return multi && angular_error(sources[0].truth.azimuth_deg,
                                  sources[1].truth.azimuth_deg) <
                        static_cast<double>(threshold_deg);
  }
  if (type == types[9]) {
    return multi && angular_error(sources[0].truth.azimuth_deg,
                                  sources[1].truth.azimuth_deg) >
                        static_cast<double>(threshold_deg);
  }
  throw DataError("reasoning_truth: unknown type " + type);
}

// Target resolution for targeted transcription. Returns the index into
// `sources` of the single matching speaker, -1 for no match, or -2 when the
// criterion is ambiguous (two matches) and the record should be resampled.
int resolve_target(const std::string& kind,
                   const std::vector<QASource>& sources,
                   const std::optional<SourceTruth>& queried) {
  const auto kinds = qa_templates::target_kinds();
  const auto area_target = [&sources](auto&& predicate) {
    int found = -1;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (predicate(sources[i].truth.azimuth_deg)) {
        if (found >= 0) return -2;
        found = static_cast<int>(i);
      }
    }
    return found;
  };
  if (kind == kinds[0] || kind == kinds[1]) {
    // Specific location / distance: match against the queried values.
    if (!queried.has_value()) return -1;
    int found = -1;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const SourceTruth& t = sources[i].truth;
      const bool dist_ok = std::abs(t.distance_m - queried->distance_m) <= 0.5;
      const bool az_ok =
          kind == kinds[1] ||
          angular_error(t.azimuth_deg, queried->azimuth_deg) <= 15.0;
      if (dist_ok && az_ok) {
        if (found >= 0) return -2;
        found = static_cast<int>(i);
      }
    }
    return found;
  }
  if (kind == kinds[2]) return area_target(is_left);
  if (kind == kinds[3]) return area_target(is_right);
  if (kind == kinds[4]) return area_target(is_front);
  if (kind == kinds[5]) return area_target(is_back);
  if (sources.size() != 2) return -1;  // comparisons need two speakers
  const double d0 = sources[0].truth.distance_m;
  const double d1 = sources[1].truth.distance_m;
  if (kind == kinds[6]) return d0 == d1 ? -2 : (d0 < d1 ? 0 : 1);
  if (kind == kinds[7]) return d0 == d1 ? -2 : (d0 > d1 ? 0 : 1);
  const double l0 = leftness(sources[0].truth.azimuth_deg);
  const double l1 = leftness(sources[1].truth.azimuth_deg);
  if (kind == kinds[8]) return l0 == l1 ? -2 : (l0 > l1 ? 0 : 1);
  if (kind == kinds[9]) return l0 == l1 ? -2 : (l0 < l1 ? 0 : 1);
  throw DataError("resolve_target: unknown kind " + kind);
}

}  // namespace

QAGenResult generate_qa(std::span<const SceneRecord> scenes,
                        std::span<const std::string> transcripts, QATask task,
                        Rng& rng, int max_n, const QAConfig& config) {
  if (scenes.empty()) throw DataError("generate_qa: no scenes");
  if (max_n <= 0) return {};

  std::vector<std::string> builtin;
  if (transcripts.empty()) {
    for (std::string_view p : qa_templates::phrase_pool()) {
      builtin.emplace_back(p);
    }
  }
  const std::span<const std::string> pool =
      transcripts.empty() ? std::span<const std::string>(builtin)
                          : transcripts;

  QAGenResult result;
  const int want_yes = (max_n + 1) / 2;
  const int want_no = max_n - want_yes;
  int got_yes = 0, got_no = 0;

  const std::int64_t attempt_budget =
      static_cast<std::int64_t>(max_n) * 1000 + 1000;
  std::uint64_t attempt = 0;
  while (static_cast<int>(result.records.size()) < max_n) {
    if (static_cast<std::int64_t>(attempt) > attempt_budget) {
      throw DataError("generate_qa: attempt budget exhausted");
    }
    Rng rec_rng = rng.child(attempt++);
    const auto& scene = scenes[static_cast<std::size_t>(rec_rng.uniform_int(
        0, static_cast<std::int64_t>(scenes.size()) - 1))];

    QARecord record;
    record.task = task;
    record.seed = rec_rng.seed();

    if (task == QATask::kReasoning) {
      const int desired = rec_rng.chance(0.5) ? 1 : 2;
      const auto types = qa_templates::reasoning_types();
      // Types 0..5 are single-speaker, 6..9 two-speaker.
      const std::size_t type_idx =
          desired == 1
              ? static_cast<std::size_t>(rec_rng.uniform_int(0, 5))
              : static_cast<std::size_t>(rec_rng.uniform_int(6, 9));
      const std::string type(types[type_idx]);
      const double thr_m = kDistanceThresholds[static_cast<std::size_t>(
          rec_rng.uniform_int(0, static_cast<std::int64_t>(
                                     kDistanceThresholds.size()) -
                                     1))];
      const int thr_deg = kAngleThresholds[static_cast<std::size_t>(
          rec_rng.uniform_int(
              0, static_cast<std::int64_t>(kAngleThresholds.size()) - 1))];
      std::size_t tmpl_idx = 0;
      std::string prompt =
          pick(qa_templates::reasoning_prompts(type), rec_rng, &tmpl_idx);
      prompt = substitute(prompt, "distance", format_threshold(thr_m));
      prompt = substitute(prompt, "angle", std::to_string(thr_deg));

      const Candidate c =
          build_sources(scene, desired, pool, rec_rng, config);
      if (!c.valid) {
        ++result.skipped;
        continue;
      }
      const bool yes = reasoning_truth(type, thr_m, thr_deg, c.sources);
      if (yes && got_yes >= want_yes) continue;
      if (!yes && got_no >= want_no) continue;
      (yes ? got_yes : got_no)++;

      record.prompt = std::move(prompt);
      record.sources = c.sources;
      record.question_type = type;
      record.template_id = type + ":" + std::to_string(tmpl_idx);
      record.yes = yes;
      record.answer = format_answer(record, config);
      result.records.push_back(std::move(record));
      continue;
    }

    if (task == QATask::kLocalization ||
        task == QATask::kSpatialTranscription) {
      const int desired = rec_rng.chance(0.5) ? 1 : 2;
      std::size_t tmpl_idx = 0;
      record.prompt = task == QATask::kLocalization
                          ? pick(qa_templates::task1_prompts(), rec_rng,
                                 &tmpl_idx)
                          : pick(qa_templates::task3_prompts(), rec_rng,
                                 &tmpl_idx);
      record.template_id = "task" +
                           std::to_string(task == QATask::kLocalization ? 1
                                                                        : 3) +
                           ":" + std::to_string(tmpl_idx);
      const Candidate c =
          build_sources(scene, desired, pool, rec_rng, config);
      if (!c.valid) {
        ++result.skipped;
        continue;
      }
      record.sources = c.sources;
      record.answer = format_answer(record, config);
      result.records.push_back(std::move(record));
      continue;
    }

    // Targeted transcription.
    const auto kinds = qa_templates::target_kinds();
    const std::size_t kind_idx = static_cast<std::size_t>(
        rec_rng.uniform_int(0, static_cast<std::int64_t>(kinds.size()) - 1));
    const std::string kind(kinds[kind_idx]);
    const bool comparison = kind_idx >= 6;
    const int desired = comparison ? 2 : (rec_rng.chance(0.5) ? 1 : 2);

    const Candidate c = build_sources(scene, desired, pool, rec_rng, config);
    if (!c.valid) {
      ++result.skipped;
      continue;
    }

    std::optional<SourceTruth> queried;
    std::size_t tmpl_idx = 0;
    std::string prompt =
        pick(qa_templates::target_prompts(kind), rec_rng, &tmpl_idx);
    if (kind == kinds[0] || kind == kinds[1]) {
      // Query the location of a surviving speaker when everyone survived;
      // after a dropout, query the scene's own source position so that the
      // truthful answer degrades to `none` when that speaker vanished.
      const QASource* q = nullptr;
      if (!c.sources.empty() &&
          static_cast<int>(c.sources.size()) == desired) {
        q = &c.sources[static_cast<std::size_t>(rec_rng.uniform_int(
            0, static_cast<std::int64_t>(c.sources.size()) - 1))];
      }
      SourceTruth qt;
      if (q != nullptr) {
        qt = q->truth;
      } else {
        // Target vanished in dropout: query the scene's own source position.
        qt = scene.truth;
        rec_rng.uniform_int(0, 1);  // keep the draw count stable
      }
      queried = qt;
      const long az = std::lround(qt.azimuth_deg / 10.0) * 10 % 360;
      prompt = substitute(prompt, "azimuth", std::to_string(az));
      prompt = substitute(prompt, "distance",
                          format_threshold(std::round(qt.distance_m * 10.0) /
                                           10.0));
    }

    const int target = resolve_target(kind, c.sources, queried);
    if (target == -2) continue;  // ambiguous; resample

    record.prompt = std::move(prompt);
    record.sources = c.sources;
    record.question_type = kind;
    record.template_id = kind + ":" + std::to_string(tmpl_idx);
    record.target_index = target;
    record.answer = format_answer(record, config);
    result.records.push_back(std::move(record));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

bool in_list(std::span<const std::string_view> list, std::string_view value) {
  return std::find(list.begin(), list.end(), value) != list.end();
}

ParsedField classify_scalar(std::string raw,
                            std::span<const std::string_view> primary,
                            std::span<const std::string_view> secondary = {}) {
  ParsedField f;
  const std::string v = trim(raw);
  if (v.empty()) return f;  // missing
  if (to_lower(v) == "none") {
    f.state = ParsedField::State::kNone;
    return f;
  }
  if (in_list(primary, v) || (!secondary.empty() && in_list(secondary, v))) {
    f.state = ParsedField::State::kValue;
    f.text = v;
    return f;
  }
  f.state = ParsedField::State::kMalformed;
  f.text = v;
  return f;
}

// Locates `key` followed by '=' and returns the raw value: a bracketed
// span for transcripts, otherwise the run up to the next comma.
std::optional<std::string> extract_value(std::string_view text,
                                         const std::string& key) {
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string_view::npos) {
    std::size_t p = pos + key.size();
    while (p < text.size() &&
           std::isspace(static_cast<unsigned char>(text[p]))) {
      ++p;
    }
    if (p >= text.size() || text[p] != '=') {
      pos += key.size();
      continue;
    }
    ++p;
    while (p < text.size() &&
           std::isspace(static_cast<unsigned char>(text[p]))) {
      ++p;
    }
    if (p < text.size() && text[p] == '[') {
      const std::size_t close = text.find(']', p + 1);
      if (close == std::string_view::npos) {
        return std::string(text.substr(p));  // unterminated bracket
      }
      return "[" + std::string(text.substr(p + 1, close - p - 1)) + "]";
    }
    const std::size_t comma = text.find(',', p);
    const std::size_t end =
        comma == std::string_view::npos ? text.size() : comma;
    return std::string(text.substr(p, end - p));
  }
  return std::nullopt;
}

std::string strip_noise(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    if (ch != '`') out.push_back(ch);
  }
  return trim(out);
}

ParsedField parse_transcript_field(const std::optional<std::string>& raw) {
  ParsedField f;
  if (!raw.has_value()) return f;
  const std::string v = trim(*raw);
  if (v.empty()) return f;
  if (to_lower(v) == "none") {
    f.state = ParsedField::State::kNone;
    return f;
  }
  f.state = ParsedField::State::kValue;
  if (v.front() == '[' && v.back() == ']') {
    f.text = v.substr(1, v.size() - 2);
  } else {
    f.text = v;
  }
  return f;
}

}  // namespace

ParsedAnswer parse_answer(std::string_view text, QATask task,
                          const QAConfig& config) {
  ParsedAnswer out;
  const std::string clean = strip_noise(text);

  if (task == QATask::kReasoning) {
    std::string word = to_lower(clean);
    while (!word.empty() &&
           std::ispunct(static_cast<unsigned char>(word.back()))) {
      word.pop_back();
    }
    if (word == "yes" || word == "no") {
      out.binary.state = ParsedField::State::kValue;
      out.binary.text = word;
    } else if (word.empty()) {
      out.binary.state = ParsedField::State::kMissing;
    } else {
      out.binary.state = ParsedField::State::kMalformed;
      out.binary.text = clean;
    }
    return out;
  }

  if (task == QATask::kTargetedTranscription) {
    out.transcript = parse_transcript_field(
        clean.empty() ? std::nullopt : std::make_optional(clean));
    return out;
  }

  std::vector<std::string_view> elevation_list;
  elevation_list.reserve(config.elevation_answer_list.size());
  for (const std::string& s : config.elevation_answer_list) {
    elevation_list.push_back(s);
  }

  out.sources.resize(2);
  for (int slot = 0; slot < 2; ++slot) {
    const std::string n = std::to_string(slot + 1);
    ParsedSource& src = out.sources[static_cast<std::size_t>(slot)];
    src.transcript =
        parse_transcript_field(extract_value(clean, "transcript_" + n));
    if (auto v = extract_value(clean, "azimuth_degrees_" + n)) {
      src.azimuth = classify_scalar(*v, azimuth_values());
    }
    if (auto v = extract_value(clean, "elevation_degrees_" + n)) {
      src.elevation =
          classify_scalar(*v, elevation_list, elevation_prompt_values());
    }
    auto dist = extract_value(clean, "distance_meters_" + n);
    if (!dist.has_value()) {
      dist = extract_value(clean, "distance_decimeters_" + n);
    }
    if (dist.has_value()) {
      src.distance = classify_scalar(*dist, distance_values());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scoring

namespace {

double parsed_azimuth_deg(const ParsedField& f) {
  return std::stod(f.text);
}

double parsed_elevation_deg(const ParsedField& f) { return std::stod(f.text); }

double parsed_distance_m(const ParsedField& f) {
  return std::stod(f.text) / 10.0;
}

struct Accumulator {
  double sum = 0.0;
  int n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  std::optional<double> mean() const {
    if (n == 0) return std::nullopt;
    return sum / n;
  }
};

std::optional<double> median(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  if (v.size() % 2 == 1) return v[mid];
  return 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

QAScore score(std::span<const QARecord> records,
              std::span<const ParsedAnswer> parsed, QATask task,
              const QAConfig& config) {
  if (records.size() != parsed.size()) {
    throw DataError("score: record/answer length mismatch");
  }
  QAScore s;
  s.records = static_cast<int>(records.size());

  Accumulator az, el, dist, attribution;
  std::vector<double> wers;
  int correct = 0, answered = 0;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const QARecord& rec = records[i];
    const ParsedAnswer& ans = parsed[i];

    if (task == QATask::kReasoning) {
      ++answered;
      const bool correct_here =
          ans.binary.is_value() &&
          (ans.binary.text == "yes") == rec.yes.value_or(false);
      if (correct_here) ++correct;
      auto& [c, t] = s.accuracy_by_type[rec.question_type];
      t += 1;
      c += correct_here ? 1 : 0;
      continue;
    }

    if (task == QATask::kTargetedTranscription) {
      const bool no_target =
          !rec.target_index.has_value() || *rec.target_index < 0;
      bool correct_here = false;
      if (no_target) {
        correct_here = ans.transcript.is_none() ||
                       ans.transcript.state == ParsedField::State::kMissing;
      } else if (ans.transcript.is_value()) {
        const auto idx = static_cast<std::size_t>(*rec.target_index);
        const std::string& target = rec.sources[idx].transcript;
        const WerResult wt = wer_detailed(ans.transcript.text, target);
        if (wt.wer <= kWerHallucinationFilter) {
          wers.push_back(wt.wer);
        } else {
          ++s.wer_filtered;
        }
        correct_here = true;
        for (std::size_t j = 0; j < rec.sources.size(); ++j) {
          if (j == idx) continue;
          const double wo = wer(ans.transcript.text,
                                rec.sources[j].transcript);
          // Attribution: the transcript must be closer to the target than to
          // any other speaker (ties only count for exact matches).
          if (!(wt.wer < wo || (wt.wer == wo && wt.wer == 0.0))) {
            correct_here = false;
          }
        }
      }
      attribution.add(correct_here ? 1.0 : 0.0);
      continue;
    }

    // Tasks 1 and 3: per-slot localization fields (+ transcripts for 3).
    for (int slot = 0; slot < 2; ++slot) {
      const bool has_truth =
          slot < static_cast<int>(rec.sources.size());
      const ParsedSource* src =
          slot < static_cast<int>(ans.sources.size())
              ? &ans.sources[static_cast<std::size_t>(slot)]
              : nullptr;
      if (!has_truth) {
        if (src != nullptr &&
            (src->azimuth.is_value() || src->elevation.is_value() ||
             src->distance.is_value() || src->transcript.is_value())) {
          ++s.spurious_sources;
        }
        continue;
      }
      const SourceTruth& truth =
          rec.sources[static_cast<std::size_t>(slot)].truth;
      if (src == nullptr || (!src->azimuth.is_value() &&
                             !src->elevation.is_value() &&
                             !src->distance.is_value())) {
        ++s.missing_sources;
      }
      if (src == nullptr) continue;
      const auto tally = [&s](const ParsedField& f) {
        if (f.state == ParsedField::State::kMalformed) ++s.malformed_fields;
      };
      tally(src->azimuth);
      tally(src->elevation);
      tally(src->distance);

      if (src->azimuth.is_value()) {
        az.add(angular_error(parsed_azimuth_deg(src->azimuth),
                             truth.azimuth_deg));
        ++s.scored_fields;
      }
      if (src->elevation.is_value()) {
        el.add(std::abs(parsed_elevation_deg(src->elevation) -
                        truth.elevation_deg));
        ++s.scored_fields;
      }
      if (src->distance.is_value()) {
        dist.add(std::abs(parsed_distance_m(src->distance) -
                          truth.distance_m));
        ++s.scored_fields;
      }
      if (task == QATask::kSpatialTranscription &&
          src->transcript.is_value()) {
        const WerResult w = wer_detailed(
            src->transcript.text,
            rec.sources[static_cast<std::size_t>(slot)].transcript);
        if (w.wer <= kWerHallucinationFilter) {
          wers.push_back(w.wer);
        } else {
          ++s.wer_filtered;
        }
      }
    }
  }

  s.mae_azimuth_deg = az.mean();
  s.mae_elevation_deg = el.mean();
  s.mae_distance_m = dist.mean();
  if (task == QATask::kReasoning && answered > 0) {
    s.accuracy = static_cast<double>(correct) / answered;
  }
  if (!wers.empty() || s.wer_filtered > 0) {
    s.wer_scored = static_cast<int>(wers.size());
    if (!wers.empty()) {
      double total = 0.0;
      for (double w : wers) total += w;
      s.wer_mean = total / static_cast<double>(wers.size());
      s.wer_median = median(wers);
    }
  }
  s.attribution_accuracy = attribution.mean();
  return s;
}

nlohmann::json QAScore::to_json() const {
  nlohmann::json j = {{"records", records}};
  const auto put = [&j](const char* key, const std::optional<double>& v) {
    if (v.has_value()) j[key] = *v;
  };
  put("mae_azimuth_deg", mae_azimuth_deg);
  put("mae_elevation_deg", mae_elevation_deg);
  put("mae_distance_m", mae_distance_m);
  put("accuracy", accuracy);
  put("wer_mean", wer_mean);
  put("wer_median", wer_median);
  put("attribution_accuracy", attribution_accuracy);
  if (scored_fields > 0) j["scored_fields"] = scored_fields;
  if (malformed_fields > 0) j["malformed_fields"] = malformed_fields;
  if (missing_sources > 0) j["missing_sources"] = missing_sources;
  if (spurious_sources > 0) j["spurious_sources"] = spurious_sources;
  if (wer_scored > 0 || wer_filtered > 0) {
    j["wer_scored"] = wer_scored;
    j["wer_filtered"] = wer_filtered;
  }
  if (!accuracy_by_type.empty()) {
    nlohmann::json types = nlohmann::json::object();
    for (const auto& [name, ct] : accuracy_by_type) {
      types[name] = {{"correct", ct.first},
                     {"total", ct.second},
                     {"accuracy", ct.second > 0 ? static_cast<double>(ct.first) /
                                                      ct.second
                                                : 0.0}};
    }
    j["by_question_type"] = types;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Records on disk

namespace {

nlohmann::json record_to_json(const QARecord& r) {
  nlohmann::json sources = nlohmann::json::array();
  for (const QASource& s : r.sources) {
    sources.push_back({{"azimuth_deg", s.truth.azimuth_deg},
                       {"elevation_deg", s.truth.elevation_deg},
                       {"distance_m", s.truth.distance_m},
                       {"transcript", s.transcript}});
  }
  nlohmann::json j = {{"version", 1},
                      {"task", static_cast<int>(r.task)},
                      {"prompt", r.prompt},
                      {"sources", sources},
                      {"answer", r.answer},
                      {"template_id", r.template_id},
                      {"seed", r.seed}};
  if (!r.question_type.empty()) j["question_type"] = r.question_type;
  if (r.yes.has_value()) j["yes"] = *r.yes;
  if (r.target_index.has_value()) j["target_index"] = *r.target_index;
  return j;
}

QARecord record_from_json(const nlohmann::json& j) {
  QARecord r;
  r.task = qa_task_from_int(j.at("task").get<int>());
  r.prompt = j.at("prompt").get<std::string>();
  for (const auto& js : j.at("sources")) {
    QASource s;
    s.truth.azimuth_deg = js.at("azimuth_deg").get<double>();
    s.truth.elevation_deg = js.at("elevation_deg").get<double>();
    s.truth.distance_m = js.at("distance_m").get<double>();
    s.transcript = js.at("transcript").get<std::string>();
    r.sources.push_back(std::move(s));
  }
  r.answer = j.at("answer").get<std::string>();
  r.template_id = j.value("template_id", "");
  r.seed = j.value("seed", std::uint64_t{0});
  r.question_type = j.value("question_type", "");
  if (j.contains("yes")) r.yes = j.at("yes").get<bool>();
  if (j.contains("target_index")) {
    r.target_index = j.at("target_index").get<int>();
  }
  return r;
}

}  // namespace

void write_qa_records(const std::filesystem::path& path,
                      std::span<const QARecord> records) {
  std::ofstream out(path);
  if (!out) throw DataError("write_qa_records: cannot open " + path.string());
  for (const QARecord& r : records) {
    out << record_to_json(r).dump() << '\n';
  }
  if (!out) throw DataError("write_qa_records: write failed");
}

std::vector<QARecord> read_qa_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("read_qa_records: cannot open " + path.string());
  std::vector<QARecord> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(trimmed)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("read_qa_records: bad line: " + std::string(e.what()));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Token export

TokenExport export_tokens(std::span<const Eigen::VectorXf> embeddings,
                          double audio_duration_s) {
  if (audio_duration_s < 0.0) {
    throw std::invalid_argument("export_tokens: negative duration");
  }
  TokenExport t;
  if (!embeddings.empty()) {
    t.token_dim = static_cast<int>(embeddings[0].size());
  }
  const double hop_s = static_cast<double>(kTokenHopMs) / 1000.0;
  std::int64_t windows =
      audio_duration_s > 0.0
          ? static_cast<std::int64_t>(std::floor(audio_duration_s / hop_s)) + 1
          : 0;
  if (windows > kTokenCount) {
    windows = kTokenCount;
    t.truncated = true;
  }
  t.real_tokens = static_cast<int>(
      std::min<std::int64_t>(windows,
                             static_cast<std::int64_t>(embeddings.size())));
  t.tokens = Eigen::MatrixXf::Zero(kTokenCount, t.token_dim);
  for (int i = 0; i < t.real_tokens; ++i) {
    const auto& e = embeddings[static_cast<std::size_t>(i)];
    if (e.size() != t.token_dim) {
      throw std::invalid_argument("export_tokens: inconsistent embedding dim");
    }
    t.tokens.row(i) = e.transpose();
  }
  return t;
}

void write_token_export(const std::filesystem::path& path,
                        const TokenExport& tokens) {
  Container c;
  c.header["kind"] = "spatial_tokens";
  c.header["format_version"] = tokens.version;
  c.header["hop_ms"] = tokens.hop_ms;
  c.header["token_dim"] = tokens.token_dim;
  c.header["count"] = kTokenCount;
  c.header["bsa_id"] = tokens.bsa_id;
  c.header["esa_id"] = tokens.esa_id;
  c.header["real_tokens"] = tokens.real_tokens;
  c.header["truncated"] = tokens.truncated;
  std::vector<float> data(static_cast<std::size_t>(tokens.tokens.size()));
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < tokens.tokens.rows(); ++r) {
    for (Eigen::Index col = 0; col < tokens.tokens.cols(); ++col) {
      data[k++] = tokens.tokens(r, col);
    }
  }
  c.add_tensor("tokens", {tokens.tokens.rows(), tokens.tokens.cols()},
               std::move(data));
  write_container(path, c);
}

TokenExport read_token_export(const std::filesystem::path& path) {
  const Container c = read_container(path);
  if (c.header.value("kind", "") != "spatial_tokens") {
    throw DataError("read_token_export: not a token file: " + path.string());
  }
  TokenExport t;
  t.version = c.header.value("format_version", 1);
  t.hop_ms = c.header.value("hop_ms", kTokenHopMs);
  t.token_dim = c.header.value("token_dim", 256);
  t.bsa_id = c.header.value("bsa_id", std::int64_t{255999});
  t.esa_id = c.header.value("esa_id", std::int64_t{255998});
  t.real_tokens = c.header.value("real_tokens", 0);
  t.truncated = c.header.value("truncated", false);
  const auto& data = c.tensor("tokens");
  t.tokens.resize(kTokenCount, t.token_dim);
  if (static_cast<std::int64_t>(data.size()) != t.tokens.size()) {
    throw DataError("read_token_export: bad tensor size");
  }
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < t.tokens.rows(); ++r) {
    for (Eigen::Index col = 0; col < t.tokens.cols(); ++col) {
      t.tokens(r, col) = data[k++];
    }
  }
  return t;
}

}  // namespace phasecoder
