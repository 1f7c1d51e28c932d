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

#ifndef PHASECODER_TOOLS_TOOL_UTIL_HPP_
#define PHASECODER_TOOLS_TOOL_UTIL_HPP_

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "phasecoder/audio.hpp"
#include "phasecoder/geometry.hpp"
#include "phasecoder/model.hpp"

namespace phasecoder::tools {

inline constexpr const char* kVersion = "0.1.0";

// Structured JSON-lines log on stderr, separable from stdout payloads.
inline void log_event(const std::string& level, const std::string& event,
                      nlohmann::json fields = nlohmann::json::object()) {
  fields["level"] = level;
  fields["event"] = event;
  std::cerr << fields.dump() << '\n';
}

// Every artifact-producing command writes its fully resolved configuration
// next to the output, so any artifact can be regenerated from disk alone.
inline void write_provenance(const std::filesystem::path& target,
                             const std::string& command,
                             const nlohmann::json& resolved_config) {
  namespace fs = std::filesystem;
  const fs::path path = fs::is_directory(target)
                            ? target / "provenance.json"
                            : fs::path(target.string() + ".provenance.json");
  nlohmann::json j = {{"tool", "phasecoder"},
                      {"version", kVersion},
                      {"command", command},
                      {"config", resolved_config}};
  std::ofstream out(path);
  out << j.dump(1) << '\n';
}

// Mic coordinates from a JSON file: [[x, y, z], ...].
MicArray load_array_file(const std::filesystem::path& path);

// Geometry for a standalone WAV: --array wins; otherwise a `<wav>.array.json`
// sidecar.
MicArray resolve_array(const std::filesystem::path& wav,
                       const std::string& array_flag);

// Spatial embeddings over sliding 256 ms windows at the given hop.
std::vector<Eigen::VectorXf> sliding_embeddings(
    const MultiChannelAudio& audio, const MicArray& array,
    const Model<float>& model, const LabelScheme& scheme, int hop_samples);

struct Commands;  // registered in main.cpp

int cmd_simulate(const nlohmann::json& args);
int cmd_train(const nlohmann::json& args);
int cmd_eval(const nlohmann::json& args);
int cmd_qagen(const nlohmann::json& args);
int cmd_score(const nlohmann::json& args);
int cmd_export_tokens(const nlohmann::json& args);
int cmd_inspect(const nlohmann::json& args);

}  // namespace phasecoder::tools

#endif  // PHASECODER_TOOLS_TOOL_UTIL_HPP_
