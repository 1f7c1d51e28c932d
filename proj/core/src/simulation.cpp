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

#include "phasecoder/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "phasecoder/dsp.hpp"
#include "phasecoder/errors.hpp"

namespace phasecoder {

namespace {
constexpr double kFs = 16000.0;
constexpr double kFourPi = 4.0 * kPi;
}  // namespace

void Room::validate(bool allow_oversize) const {
  const bool size_ok =
      width > 0.0 && length > 0.0 && height > 0.0 &&
      (allow_oversize || (width <= 10.5 && length <= 10.5 && height <= 5.0));
  if (!size_ok) throw std::invalid_argument("Room: dimensions out of range");
  for (double a : wall_absorption) {
    if (!(a > 0.0 && a <= 1.0)) {
      throw std::invalid_argument("Room: absorption must be in (0, 1]");
    }
  }
}

double sabine_rt60(const Room& room) {
  const double sw = room.length * room.height;  // x walls
  const double sl = room.width * room.height;   // y walls
  const double sf = room.width * room.length;   // floor / ceiling
  const std::array<double, 6> areas{sw, sw, sl, sl, sf, sf};
  double absorbing = 0.0;
  for (int i = 0; i < 6; ++i) {
    absorbing += areas[static_cast<std::size_t>(i)] *
                 room.wall_absorption[static_cast<std::size_t>(i)];
  }
  return 0.161 * room.volume() / absorbing;
}

const std::vector<Material>& default_material_table() {
  static const std::vector<Material> table = {
      {"concrete", 0.04},       {"brick", 0.06},
      {"glass_pane", 0.09},     {"plaster", 0.12},
      {"wood_panel", 0.15},     {"drywall", 0.18},
      {"linoleum", 0.22},       {"cork_board", 0.26},
      {"light_drapery", 0.30},  {"thin_carpet", 0.35},
      {"heavy_drapery", 0.42},  {"thick_carpet", 0.50},
      {"acoustic_tile", 0.60},
  };
  return table;
}

std::vector<Material> load_material_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("material table: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("material table: bad JSON: " + std::string(e.what()));
  }
  if (!j.is_array() || j.empty()) {
    throw DataError("material table: expected a non-empty JSON array");
  }
  std::vector<Material> table;
  for (const auto& item : j) {
    Material m;
    m.name = item.at("name").get<std::string>();
    m.absorption = item.at("absorption").get<double>();
    if (!(m.absorption > 0.0 && m.absorption <= 1.0)) {
      throw DataError("material table: absorption out of (0, 1] for " +
                      m.name);
    }
    table.push_back(std::move(m));
  }
  return table;
}

Scene sample_scene(Rng& rng, const SceneSamplerConfig& config) {
  if (config.materials.empty()) {
    throw DataError("sample_scene: empty material table");
  }
  Scene scene;
  scene.rng_seed = rng.seed();

  scene.room.width = rng.uniform(config.min_width, config.max_width);
  scene.room.length = rng.uniform(config.min_length, config.max_length);
  scene.room.height = rng.uniform(config.min_height, config.max_height);
  for (auto& a : scene.room.wall_absorption) {
    const auto idx = static_cast<std::size_t>(rng.uniform_int(
        0, static_cast<std::int64_t>(config.materials.size()) - 1));
    a = config.materials[idx].absorption;
  }
  scene.room.validate();

  const int mic_count =
      static_cast<int>(rng.uniform_int(config.min_mics, config.max_mics));
  const double radius =
      0.5 * rng.uniform(config.min_array_diameter, config.max_array_diameter);

  const double margin = config.wall_margin + radius;
  const Vec3 center{rng.uniform(margin, scene.room.width - margin),
                    rng.uniform(margin, scene.room.length - margin),
                    rng.uniform(margin, scene.room.height - margin)};

  int attempts = 0;
  while (true) {
    if (++attempts > config.max_attempts) {
      throw DataError("sample_scene: rejection sampling exceeded attempts");
    }
    MicArray array;
    array.mics.reserve(static_cast<std::size_t>(mic_count));
    for (int i = 0; i < mic_count; ++i) {
      // Uniform in the array sphere by cube rejection.
      Vec3 p;
      do {
        p = {rng.uniform(-radius, radius), rng.uniform(-radius, radius),
             rng.uniform(-radius, radius)};
      } while (p.norm() > radius);
      array.mics.push_back(center + p);
    }
    bool spacing_ok = true;
    for (std::size_t i = 0; i < array.mics.size() && spacing_ok; ++i) {
      for (std::size_t j = i + 1; j < array.mics.size(); ++j) {
        if (distance(array.mics[i], array.mics[j]) < kMinMicSpacing) {
          spacing_ok = false;
          break;
        }
      }
    }
    if (!spacing_ok) continue;
    scene.array = std::move(array);
    break;
  }
  scene.array.validate();

  scene.source = sample_in_room_position(rng, scene.room,
                                         centroid(scene.array),
                                         config.min_source_distance,
                                         config.wall_margin);
  scene.truth = source_truth(scene.source, scene.array);
  return scene;
}

Vec3 sample_in_room_position(Rng& rng, const Room& room, const Vec3& avoid,
                             double min_distance, double wall_margin) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const Vec3 p{rng.uniform(wall_margin, room.width - wall_margin),
                 rng.uniform(wall_margin, room.length - wall_margin),
                 rng.uniform(wall_margin, room.height - wall_margin)};
    if (distance(p, avoid) >= min_distance) return p;
  }
  throw DataError("sample_in_room_position: rejection sampling failed");
}

int adaptive_max_order(const Room& room) {
  double mean_alpha = 0.0;
  for (double a : room.wall_absorption) mean_alpha += a;
  mean_alpha /= 6.0;
  if (mean_alpha >= 1.0) return 1;
  // (1 - alpha)^K <= 1e-6 (energy): K = -6 ln10 / ln(1 - alpha).
  const int k = static_cast<int>(
      std::ceil(-6.0 * std::log(10.0) / std::log(1.0 - mean_alpha)));
  return std::clamp(k, 1, 30);
}

namespace {

// Per-axis image expansion: mirrored coordinate, bounce count, and the
// product of that axis' reflection coefficients.
struct AxisImage {
  double coord;
  int order;
  double coeff;
};

std::vector<AxisImage> axis_images(double source, double extent, double beta0,
                                   double beta1, int max_order) {
  std::vector<AxisImage> out;
  for (int n = -(max_order + 1) / 2 - 1; n <= (max_order + 1) / 2 + 1; ++n) {
    for (int p = 0; p <= 1; ++p) {
      const int bounces0 = std::abs(n - p);  // wall at 0
      const int bounces1 = std::abs(n);      // wall at extent
      const int order = bounces0 + bounces1;
      if (order > max_order) continue;
      const double coeff =
          std::pow(beta0, bounces0) * std::pow(beta1, bounces1);
      out.push_back({(1 - 2 * p) * source + 2.0 * n * extent, order, coeff});
    }
  }
  return out;
}

void add_tap(std::vector<double>& taps, double delay_samples, double amplitude,
             DelayMode mode) {
  if (mode == DelayMode::kNearest) {
    const auto idx = static_cast<std::size_t>(std::llround(delay_samples));
    if (taps.size() <= idx) taps.resize(idx + 1, 0.0);
    taps[idx] += amplitude;
    return;
  }
  // 8-point Hann-windowed sinc around the fractional delay.
  constexpr int kHalf = 4;
  const int base = static_cast<int>(std::floor(delay_samples));
  for (int k = base - kHalf + 1; k <= base + kHalf; ++k) {
    if (k < 0) continue;
    const double t = static_cast<double>(k) - delay_samples;
    const double sinc = t == 0.0 ? 1.0 : std::sin(kPi * t) / (kPi * t);
    const double win = 0.5 * (1.0 + std::cos(kPi * t / kHalf));
    const auto idx = static_cast<std::size_t>(k);
    if (taps.size() <= idx) taps.resize(idx + 1, 0.0);
    taps[idx] += amplitude * sinc * win;
  }
}

}  // namespace

Rir image_source_rir(const Scene& scene, int max_order, DelayMode mode) {
  scene.room.validate(/*allow_oversize=*/true);
  scene.array.validate();
  if (max_order < 0) max_order = adaptive_max_order(scene.room);

  const Room& room = scene.room;
  std::array<double, 6> beta{};
  for (int i = 0; i < 6; ++i) {
    beta[static_cast<std::size_t>(i)] =
        std::sqrt(1.0 - room.wall_absorption[static_cast<std::size_t>(i)]);
  }

  const auto xs = axis_images(scene.source.x, room.width, beta[0], beta[1],
                              max_order);
  const auto ys = axis_images(scene.source.y, room.length, beta[2], beta[3],
                              max_order);
  const auto zs = axis_images(scene.source.z, room.height, beta[4], beta[5],
                              max_order);

  const int mic_count = scene.array.count();
  Rir rir;
  rir.taps.assign(static_cast<std::size_t>(mic_count), {});
  rir.direct_delay_samples.resize(static_cast<std::size_t>(mic_count));
  for (int m = 0; m < mic_count; ++m) {
    const Vec3& mic = scene.array.mics[static_cast<std::size_t>(m)];
    rir.direct_delay_samples[static_cast<std::size_t>(m)] =
        static_cast<int>(std::llround(distance(mic, scene.source) /
                                      kSpeedOfSound * kFs));

    auto& taps = rir.taps[static_cast<std::size_t>(m)];
    for (const AxisImage& ix : xs) {
      for (const AxisImage& iy : ys) {
        if (ix.order + iy.order > max_order) continue;
        const double cxy = ix.coeff * iy.coeff;
        for (const AxisImage& iz : zs) {
          if (ix.order + iy.order + iz.order > max_order) continue;
          const double coeff = cxy * iz.coeff;
          if (coeff < 1e-15) continue;
          const double dx = ix.coord - mic.x;
          const double dy = iy.coord - mic.y;
          const double dz = iz.coord - mic.z;
          const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
          add_tap(taps, d / kSpeedOfSound * kFs, coeff / (kFourPi * d), mode);
        }
      }
    }
  }
  return rir;
}

std::vector<std::vector<double>> convolve_rir(std::span<const double> source,
                                              const Rir& rir) {
  std::vector<std::vector<double>> out;
  out.reserve(rir.taps.size());
  for (const auto& taps : rir.taps) {
    out.push_back(dsp::fft_convolve(source, taps));
  }
  return out;
}

double rt60_schroeder(const Rir& rir) {
  if (rir.taps.empty()) throw std::invalid_argument("rt60_schroeder: empty");
  double sum_t60 = 0.0;
  int counted = 0;
  for (const auto& taps : rir.taps) {
    if (taps.empty()) throw NumericError("rt60_schroeder: empty RIR channel");
    // Backward-integrated energy decay curve.
    std::vector<double> energy(taps.size());
    double acc = 0.0;
    for (std::size_t i = taps.size(); i-- > 0;) {
      acc += taps[i] * taps[i];
      energy[i] = acc;
    }
    if (energy[0] <= 0.0) throw NumericError("rt60_schroeder: zero energy");

    std::vector<double> db(taps.size());
    for (std::size_t i = 0; i < taps.size(); ++i) {
      db[i] = 10.0 * std::log10(std::max(energy[i] / energy[0], 1e-300));
    }
    std::size_t i5 = db.size(), i25 = db.size();
    for (std::size_t i = 0; i < db.size(); ++i) {
      if (i5 == db.size() && db[i] <= -5.0) i5 = i;
      if (db[i] <= -25.0) {
        i25 = i;
        break;
      }
    }
    if (i5 >= db.size() || i25 >= db.size() || i25 <= i5 + 1) {
      throw NumericError("rt60_schroeder: -5..-25 dB range unreachable");
    }
    // Least-squares line over the fit window; T60 extrapolates the slope.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(i25 - i5 + 1);
    for (std::size_t i = i5; i <= i25; ++i) {
      const double x = static_cast<double>(i);
      sx += x;
      sy += db[i];
      sxx += x * x;
      sxy += x * db[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) throw NumericError("rt60_schroeder: degenerate fit");
    const double slope = (n * sxy - sx * sy) / denom;  // dB per sample
    if (slope >= 0.0) throw NumericError("rt60_schroeder: non-decaying fit");
    sum_t60 += -60.0 / slope / kFs;
    ++counted;
  }
  return sum_t60 / static_cast<double>(counted);
}

namespace {

double mean_channel_rms(const std::vector<std::vector<double>>& channels,
                        std::size_t limit) {
  if (channels.empty()) return 0.0;
  const std::size_t n = std::min(limit, channels[0].size());
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double mono = 0.0;
    for (const auto& ch : channels) mono += i < ch.size() ? ch[i] : 0.0;
    mono /= static_cast<double>(channels.size());
    acc += mono * mono;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

}  // namespace

RenderResult render_snippets(const Scene& scene,
                             std::span<const double> speech,
                             const std::optional<DistractorInput>& distractor,
                             double snr_db, Rng& rng,
                             const RenderOptions& options) {
  RenderResult result;
  result.speech_dropped = rng.chance(options.speech_dropout);
  if (distractor.has_value()) {
    result.distractor_dropped = rng.chance(options.distractor_dropout);
  }

  const std::size_t n_snippets = speech.size() / dsp::kSnippetSamples;
  if (n_snippets == 0) return result;
  const std::size_t out_len = speech.size();

  const Rir speech_rir =
      image_source_rir(scene, options.max_order, options.delay_mode);
  auto speech_conv = convolve_rir(speech, speech_rir);

  std::vector<std::vector<double>> dist_conv;
  double dist_gain = 0.0;
  const bool distractor_active =
      distractor.has_value() && !result.distractor_dropped;
  if (distractor.has_value()) {
    // Tile the distractor to the speech length so both components cover the
    // whole output.
    std::vector<double> tiled(out_len);
    const auto& src = distractor->samples;
    if (src.empty()) throw DataError("render_snippets: empty distractor");
    for (std::size_t i = 0; i < out_len; ++i) tiled[i] = src[i % src.size()];

    Scene dist_scene = scene;
    dist_scene.source = distractor->position;
    dist_scene.truth = source_truth(dist_scene.source, dist_scene.array);
    const Rir dist_rir =
        image_source_rir(dist_scene, options.max_order, options.delay_mode);
    dist_conv = convolve_rir(tiled, dist_rir);

    // Scale so the mean-over-channels components sit at snr_db. The speech
    // reference level is computed even when speech is later dropped, so the
    // distractor level does not depend on the dropout draw.
    const double speech_rms = mean_channel_rms(speech_conv, out_len);
    const double dist_rms = mean_channel_rms(dist_conv, out_len);
    if (dist_rms > 0.0 && speech_rms > 0.0) {
      dist_gain = speech_rms / dist_rms * std::pow(10.0, -snr_db / 20.0);
    }
  }

  const bool speech_active = !result.speech_dropped;
  const int mic_count = scene.array.count();
  std::vector<std::vector<float>> mixture(
      static_cast<std::size_t>(mic_count));
  for (int c = 0; c < mic_count; ++c) {
    auto& ch = mixture[static_cast<std::size_t>(c)];
    ch.resize(out_len);
    const auto& sp = speech_conv[static_cast<std::size_t>(c)];
    const std::vector<double>* ds =
        distractor_active ? &dist_conv[static_cast<std::size_t>(c)] : nullptr;
    for (std::size_t i = 0; i < out_len; ++i) {
      double v = 0.0;
      if (speech_active && i < sp.size()) v += sp[i];
      if (ds != nullptr && i < ds->size()) v += dist_gain * (*ds)[i];
      if (v > 1.0) {
        v = 1.0;
        ++result.clipped_samples;
      } else if (v < -1.0) {
        v = -1.0;
        ++result.clipped_samples;
      }
      ch[i] = static_cast<float>(v);
    }
  }

  const LabelTriple labels =
      options.scheme.discretize_truth(scene.truth, speech_active);
  result.snippets.reserve(n_snippets);
  for (std::size_t s = 0; s < n_snippets; ++s) {
    Snippet snip;
    snip.audio.resize(static_cast<std::size_t>(mic_count));
    for (int c = 0; c < mic_count; ++c) {
      const auto& ch = mixture[static_cast<std::size_t>(c)];
      const auto begin = ch.begin() +
                         static_cast<std::ptrdiff_t>(s * dsp::kSnippetSamples);
      snip.audio[static_cast<std::size_t>(c)] =
          std::vector<float>(begin, begin + dsp::kSnippetSamples);
    }
    snip.labels = labels;
    snip.speech_present = speech_active;
    if (distractor_active) snip.snr_db = snr_db;
    result.snippets.push_back(std::move(snip));
  }
  return result;
}

}  // namespace phasecoder
