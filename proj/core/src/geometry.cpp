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

#include "phasecoder/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "phasecoder/errors.hpp"

namespace phasecoder {

void MicArray::validate() const {
  const int c = count();
  if (c < kMinMics || c > kMaxMics) {
    throw std::invalid_argument("MicArray: mic count " + std::to_string(c) +
                                " outside [3, 8]");
  }
  for (const Vec3& m : mics) {
    if (!m.finite()) throw std::invalid_argument("MicArray: non-finite mic");
  }
  for (std::size_t i = 0; i < mics.size(); ++i) {
    for (std::size_t j = i + 1; j < mics.size(); ++j) {
      if (distance(mics[i], mics[j]) < kMinMicSpacing) {
        throw std::invalid_argument("MicArray: mics closer than 1e-6 m");
      }
    }
  }
}

Vec3 centroid(const MicArray& array) {
  Vec3 sum;
  for (const Vec3& m : array.mics) sum += m;
  const double n = static_cast<double>(array.count());
  return {sum.x / n, sum.y / n, sum.z / n};
}

std::vector<SphericalMic> to_relative_spherical(const MicArray& array) {
  const Vec3 c = centroid(array);
  std::vector<SphericalMic> out;
  out.reserve(array.mics.size());
  for (const Vec3& m : array.mics) {
    const Vec3 rel = m - c;
    const double r = rel.norm();
    if (r < kDegenerateRadius) {
      out.push_back({0.0, 0.0, 0.0});
      continue;
    }
    const double cos_theta = std::clamp(rel.z / r, -1.0, 1.0);
    out.push_back({r, std::acos(cos_theta), std::atan2(rel.y, rel.x)});
  }
  return out;
}

SourceTruth source_truth(const Vec3& source, const MicArray& array) {
  if (!source.finite()) {
    throw std::invalid_argument("source_truth: non-finite source");
  }
  const Vec3 c = centroid(array);
  const Vec3 rel = source - c;
  const double dist = rel.norm();
  if (dist < kDegenerateRadius) {
    throw DataError("source_truth: source coincides with the array centroid");
  }
  double az = rad_to_deg(std::atan2(rel.y, rel.x));
  if (az < 0.0) az += 360.0;
  if (az >= 360.0) az = 0.0;  // guard against 360.0 after rounding
  const double d_xy = std::hypot(rel.x, rel.y);
  const double el = rad_to_deg(std::atan2(rel.z, d_xy));
  return {az, el, dist};
}

LabelGrid::LabelGrid(double v_min, double v_max, int bins)
    : v_min_(v_min), v_max_(v_max) {
  if (bins < 2) throw std::invalid_argument("LabelGrid: bins must be >= 2");
  if (!(v_max > v_min)) {
    throw std::invalid_argument("LabelGrid: v_max must exceed v_min");
  }
  values_.resize(static_cast<std::size_t>(bins));
  for (int j = 0; j < bins; ++j) {
    values_[static_cast<std::size_t>(j)] =
        v_min + static_cast<double>(j) * (v_max - v_min) /
                    static_cast<double>(bins - 1);
  }
}

LabelGrid make_grid(double v_min, double v_max, int bins) {
  return LabelGrid(v_min, v_max, bins);
}

OneHotLabel discretize(double v, const LabelGrid& grid, bool speech_present,
                       bool circular) {
  const int num_classes = grid.bins() + 1;
  if (!speech_present) return {grid.bins(), num_classes};
  if (!std::isfinite(v)) {
    throw std::invalid_argument("discretize: non-finite value");
  }
  const double period = static_cast<double>(grid.bins()) * grid.step();
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid.bins(); ++j) {
    double d = std::abs(grid.value(j) - v);
    if (circular) {
      const double m = std::fmod(d, period);
      d = std::min(m, period - m);
    }
    if (d < best_d) {  // strict: ties keep the lower index
      best_d = d;
      best = j;
    }
  }
  return {best, num_classes};
}

double decode(const OneHotLabel& label, const LabelGrid& grid) {
  if (label.is_no_speech()) {
    throw std::invalid_argument("decode: no-speech label has no grid value");
  }
  return grid.value(label.index);
}

LabelTriple LabelScheme::discretize_truth(const SourceTruth& truth,
                                          bool speech_present) const {
  return {discretize(truth.azimuth_deg, azimuth, speech_present,
                     circular_azimuth),
          discretize(truth.elevation_deg, elevation, speech_present),
          discretize(truth.distance_m, distance, speech_present)};
}

LabelScheme LabelScheme::defaults() {
  LabelScheme s;
  s.azimuth = make_grid(0.0, 350.0, 36);
  s.elevation = make_grid(-90.0, 90.0, 18);
  s.distance = make_grid(0.0, 6.0, 13);
  return s;
}

}  // namespace phasecoder
