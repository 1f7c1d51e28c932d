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

#ifndef PHASECODER_CONTAINER_HPP_
#define PHASECODER_CONTAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace phasecoder {

// Versioned binary tensor container, shared by checkpoints, spatial-token
// exports, and feature caches. Layout (all integers little-endian):
//
//   bytes 0..7   magic "PHCBIN01"
//   bytes 8..15  uint64 header length H
//   bytes 16..   UTF-8 JSON header of H bytes; its "tensors" array lists
//                {name, shape, dtype:"f32"} in payload order
//   then         raw float32 tensor payloads, row-major, tightly packed
//
// The header also carries a "kind" tag ("checkpoint", "train_state",
// "spatial_tokens", "feature_cache") plus kind-specific fields.
struct Container {
  nlohmann::json header;  // must contain "kind"; "tensors" is kept in sync
  std::vector<std::pair<std::string, std::vector<float>>> tensors;
  std::vector<std::vector<std::int64_t>> shapes;

  void add_tensor(const std::string& name, std::vector<std::int64_t> shape,
                  std::vector<float> data);
  const std::vector<float>& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
};

void write_container(const std::filesystem::path& path, const Container& c);
Container read_container(const std::filesystem::path& path);

inline constexpr char kContainerMagic[] = "PHCBIN01";

}  // namespace phasecoder

#endif  // PHASECODER_CONTAINER_HPP_
