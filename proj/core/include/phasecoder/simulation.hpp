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

#ifndef PHASECODER_SIMULATION_HPP_
#define PHASECODER_SIMULATION_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phasecoder/geometry.hpp"
#include "phasecoder/rng.hpp"

namespace phasecoder {

inline constexpr double kSpeedOfSound = 343.0;  // m/s

// Shoebox room. Surface order: x=0, x=W, y=0, y=L, z=0, z=H.
struct Room {
  double width = 5.0;   // x extent
  double length = 4.0;  // y extent
  double height = 3.0;  // z extent
  std::array<double, 6> wall_absorption{0.3, 0.3, 0.3, 0.3, 0.3, 0.3};

  double volume() const { return width * length * height; }
  double surface_area() const {
    return 2.0 * (width * length + width * height + length * height);
  }
  void validate(bool allow_oversize = false) const;
};

struct Scene {
  Room room;
  MicArray array;  // absolute coordinates
  Vec3 source;
  SourceTruth truth;
  std::uint64_t rng_seed = 0;
};

// Sabine estimate: 0.161 * V / sum(S_i * alpha_i).
double sabine_rt60(const Room& room);

struct Material {
  std::string name;
  double absorption = 0.3;
};

// The 13 built-in frequency-flat absorption profiles.
const std::vector<Material>& default_material_table();

// Loads a replacement table from a JSON array of {"name", "absorption"}.
std::vector<Material> load_material_table(const std::filesystem::path& path);

// Scene sampling bounds. Geometry ranges are fixed by the data-generation
// recipe; room minimums are a local choice (only maximums are prescribed).
struct SceneSamplerConfig {
  std::vector<Material> materials = default_material_table();
  double min_width = 2.5, max_width = 10.5;
  double min_length = 2.5, max_length = 10.5;
  double min_height = 2.2, max_height = 5.0;
  int min_mics = 3, max_mics = 8;
  double min_array_diameter = 0.07, max_array_diameter = 0.18;
  double min_source_distance = 0.1;  // to array centroid
  double wall_margin = 0.2;
  int max_attempts = 10000;
};

// Draws a full scene (room, materials, array, source, truth) from the
// sampler bounds. Deterministic in the rng stream. Throws DataError when
// rejection sampling exceeds max_attempts.
Scene sample_scene(Rng& rng, const SceneSamplerConfig& config = {});

// Room impulse responses at 16 kHz, one tap sequence per mic.
struct Rir {
  std::vector<std::vector<double>> taps;
  std::vector<int> direct_delay_samples;
};

enum class DelayMode {
  kNearest,      // taps at round(d/c*fs); analytic delay oracle stays exact
  kSincWindowed  // 8-point Hann-windowed sinc fractional delay
};

// Largest reflection order worth simulating for this room: the smallest K
// with (1 - mean absorption)^K below -60 dB in energy, capped at 30.
int adaptive_max_order(const Room& room);

// Shoebox image-source RIR. Each image contributes an impulse of amplitude
// prod(reflection coefficients) / (4*pi*d) at delay d/c; reflection
// coefficients are sqrt(1 - alpha) per bounce. max_order < 0 selects
// adaptive_max_order(room).
Rir image_source_rir(const Scene& scene, int max_order,
                     DelayMode mode = DelayMode::kNearest);

// Convolves a mono source with each mic's RIR.
std::vector<std::vector<double>> convolve_rir(std::span<const double> source,
                                              const Rir& rir);

// Schroeder backward-integration RT60: a least-squares line is fitted to the
// decay curve between -5 and -25 dB and extrapolated to 60 dB. The result is
// averaged over mics. Throws NumericError when the decay range is
// unreachable.
double rt60_schroeder(const Rir& rir);

// One 256 ms training example.
struct Snippet {
  std::vector<std::vector<float>> audio;  // [C][4096]
  LabelTriple labels;
  bool speech_present = true;
  std::optional<double> snr_db;
  int scene_id = -1;
};

struct RenderOptions {
  LabelScheme scheme = LabelScheme::defaults();
  double speech_dropout = 0.05;
  double distractor_dropout = 0.05;
  int max_order = -1;  // adaptive
  DelayMode delay_mode = DelayMode::kNearest;
};

struct DistractorInput {
  std::vector<double> samples;  // mono, 16 kHz
  Vec3 position;
};

struct RenderResult {
  std::vector<Snippet> snippets;
  bool speech_dropped = false;
  bool distractor_dropped = false;
  std::int64_t clipped_samples = 0;
};

// Renders a scene: speech convolved with its RIR; the distractor (when
// present) convolved with its own RIR and scaled so the SNR between the
// mean-over-channels speech and distractor components equals snr_db; then
// dropout draws, clipping to [-1, 1], and segmentation into non-overlapping
// 4096-sample snippets. Speech shorter than one snippet yields an empty
// list.
RenderResult render_snippets(const Scene& scene,
                             std::span<const double> speech,
                             const std::optional<DistractorInput>& distractor,
                             double snr_db, Rng& rng,
                             const RenderOptions& options = {});

// Uniform in-room position away from walls and the array centroid; used for
// distractor placement.
Vec3 sample_in_room_position(Rng& rng, const Room& room, const Vec3& avoid,
                             double min_distance, double wall_margin);

}  // namespace phasecoder

#endif  // PHASECODER_SIMULATION_HPP_
