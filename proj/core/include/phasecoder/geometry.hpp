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

#ifndef PHASECODER_GEOMETRY_HPP_
#define PHASECODER_GEOMETRY_HPP_

#include <vector>

#include "phasecoder/vec3.hpp"

namespace phasecoder {

// Microphone array: 3 to 8 omnidirectional capsules, absolute coordinates in
// meters. No two capsules may be closer than kMinMicSpacing.
struct MicArray {
  std::vector<Vec3> mics;

  int count() const { return static_cast<int>(mics.size()); }
  // Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

inline constexpr int kMinMics = 3;
inline constexpr int kMaxMics = 8;
inline constexpr double kMinMicSpacing = 1e-6;  // meters

// One microphone in the array-local spherical frame. theta_polar is the
// polar angle from +z in [0, pi]; phi is atan2(y, x) in (-pi, pi].
// r == 0 uses the convention theta_polar = phi = 0.
struct SphericalMic {
  double r = 0.0;
  double theta_polar = 0.0;
  double phi = 0.0;
};

// Ground-truth source position relative to the array centroid.
struct SourceTruth {
  double azimuth_deg = 0.0;    // [0, 360)
  double elevation_deg = 0.0;  // [-90, 90]
  double distance_m = 0.0;     // >= 0
};

// Uniform grid of M values over [v_min, v_max], endpoints included.
class LabelGrid {
 public:
  LabelGrid() = default;
  LabelGrid(double v_min, double v_max, int bins);

  double v_min() const { return v_min_; }
  double v_max() const { return v_max_; }
  int bins() const { return static_cast<int>(values_.size()); }
  double value(int j) const { return values_[static_cast<std::size_t>(j)]; }
  const std::vector<double>& values() const { return values_; }
  double step() const { return (v_max_ - v_min_) / (bins() - 1); }

 private:
  double v_min_ = 0.0;
  double v_max_ = 1.0;
  std::vector<double> values_;
};

// One-hot class assignment over bins() + 1 slots; the final slot means
// "no speech". Stored as (index, size) rather than a dense 0/1 vector.
struct OneHotLabel {
  int index = 0;        // hot slot
  int num_classes = 2;  // grid bins + 1

  bool is_no_speech() const { return index == num_classes - 1; }
  std::vector<float> dense() const {
    std::vector<float> v(static_cast<std::size_t>(num_classes), 0.0f);
    v[static_cast<std::size_t>(index)] = 1.0f;
    return v;
  }
};

struct LabelTriple {
  OneHotLabel azimuth;
  OneHotLabel elevation;
  OneHotLabel distance;
};

// The three classification grids used across the whole pipeline.
struct LabelScheme {
  LabelGrid azimuth;    // degrees
  LabelGrid elevation;  // degrees
  LabelGrid distance;   // meters
  bool circular_azimuth = false;  // optional circular-distance argmin

  int azimuth_classes() const { return azimuth.bins() + 1; }
  int elevation_classes() const { return elevation.bins() + 1; }
  int distance_classes() const { return distance.bins() + 1; }

  LabelTriple discretize_truth(const SourceTruth& truth,
                               bool speech_present) const;

  static LabelScheme defaults();
};

// Component-wise arithmetic mean of the microphone coordinates.
Vec3 centroid(const MicArray& array);

// Per-mic spherical coordinates relative to the centroid:
//   r = |p - c|, theta = arccos(z'/r), phi = atan2(y', x').
// r below kDegenerateRadius yields (0, 0, 0).
std::vector<SphericalMic> to_relative_spherical(const MicArray& array);

inline constexpr double kDegenerateRadius = 1e-9;  // meters

// Azimuth / elevation / distance of a source relative to the array centroid.
// Azimuth is atan2(ys-cy, xs-cx) mapped to [0, 360) degrees; elevation is
// atan2(zs-cz, d_xy) in [-90, 90] degrees. Throws DataError when the source
// coincides with the centroid (distance < kDegenerateRadius).
SourceTruth source_truth(const Vec3& source, const MicArray& array);

// Grid of `bins` evenly spaced values over [v_min, v_max]. Throws
// std::invalid_argument for bins < 2 or v_max <= v_min.
LabelGrid make_grid(double v_min, double v_max, int bins);

// Nearest-bin one-hot assignment; ties resolve to the lower index. When
// speech_present is false the extra "no speech" slot is hot regardless of v.
// `circular` measures distance modulo the grid period (bins * step) instead
// of the plain absolute difference.
OneHotLabel discretize(double v, const LabelGrid& grid, bool speech_present,
                       bool circular = false);

// Grid value of a one-hot bin. Requires a speech bin (not the no-speech
// slot).
double decode(const OneHotLabel& label, const LabelGrid& grid);

constexpr double kPi = 3.14159265358979323846;
inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

}  // namespace phasecoder

#endif  // PHASECODER_GEOMETRY_HPP_
