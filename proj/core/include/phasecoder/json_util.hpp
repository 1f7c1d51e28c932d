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

#ifndef PHASECODER_JSON_UTIL_HPP_
#define PHASECODER_JSON_UTIL_HPP_

#include <nlohmann/json.hpp>

#include "phasecoder/geometry.hpp"
#include "phasecoder/simulation.hpp"

namespace phasecoder {

inline nlohmann::json grid_to_json(const LabelGrid& g) {
  return {{"v_min", g.v_min()}, {"v_max", g.v_max()}, {"bins", g.bins()}};
}

inline LabelGrid grid_from_json(const nlohmann::json& j) {
  return make_grid(j.at("v_min").get<double>(), j.at("v_max").get<double>(),
                   j.at("bins").get<int>());
}

inline nlohmann::json scheme_to_json(const LabelScheme& s) {
  return {{"azimuth", grid_to_json(s.azimuth)},
          {"elevation", grid_to_json(s.elevation)},
          {"distance", grid_to_json(s.distance)},
          {"circular_azimuth", s.circular_azimuth}};
}

inline LabelScheme scheme_from_json(const nlohmann::json& j) {
  LabelScheme s;
  s.azimuth = grid_from_json(j.at("azimuth"));
  s.elevation = grid_from_json(j.at("elevation"));
  s.distance = grid_from_json(j.at("distance"));
  s.circular_azimuth = j.value("circular_azimuth", false);
  return s;
}

inline nlohmann::json vec3_to_json(const Vec3& v) {
  return nlohmann::json::array({v.x, v.y, v.z});
}

inline Vec3 vec3_from_json(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline nlohmann::json truth_to_json(const SourceTruth& t) {
  return {{"azimuth_deg", t.azimuth_deg},
          {"elevation_deg", t.elevation_deg},
          {"distance_m", t.distance_m}};
}

inline SourceTruth truth_from_json(const nlohmann::json& j) {
  return {j.at("azimuth_deg").get<double>(),
          j.at("elevation_deg").get<double>(),
          j.at("distance_m").get<double>()};
}

inline nlohmann::json room_to_json(const Room& r) {
  return {{"width", r.width},
          {"length", r.length},
          {"height", r.height},
          {"wall_absorption", r.wall_absorption}};
}

inline Room room_from_json(const nlohmann::json& j) {
  Room r;
  r.width = j.at("width").get<double>();
  r.length = j.at("length").get<double>();
  r.height = j.at("height").get<double>();
  const auto& a = j.at("wall_absorption");
  for (std::size_t i = 0; i < 6; ++i) r.wall_absorption[i] = a.at(i);
  return r;
}

}  // namespace phasecoder

#endif  // PHASECODER_JSON_UTIL_HPP_
