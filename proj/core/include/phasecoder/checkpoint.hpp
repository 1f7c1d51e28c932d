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

#ifndef PHASECODER_CHECKPOINT_HPP_
#define PHASECODER_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "phasecoder/container.hpp"
#include "phasecoder/json_util.hpp"
#include "phasecoder/model.hpp"

namespace phasecoder {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams<float> params;
  LabelScheme scheme;
  std::int64_t step = 0;
  std::string rng_state;  // empty when not carried
};

namespace detail {

template <typename S>
void params_to_container(const ModelParams<S>& params, Container& c,
                         const std::string& prefix) {
  params.visit([&c, &prefix](const std::string& name, const auto& t) {
    std::vector<float> data(static_cast<std::size_t>(t.size()));
    // Tensors are stored row-major in the file regardless of in-memory
    // layout.
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index col = 0; col < t.cols(); ++col) {
        data[k++] = static_cast<float>(t(r, col));
      }
    }
    c.add_tensor(prefix + name, {t.rows(), t.cols()}, std::move(data));
  });
}

template <typename S>
void params_from_container(const Container& c, ModelParams<S>& params,
                           const std::string& prefix) {
  params.visit([&c, &prefix](const std::string& name, auto& t) {
    const auto& data = c.tensor(prefix + name);
    if (static_cast<std::int64_t>(data.size()) != t.size()) {
      throw DataError("checkpoint: tensor size mismatch for " + name);
    }
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index col = 0; col < t.cols(); ++col) {
        t(r, col) = static_cast<S>(data[k++]);
      }
    }
  });
}

}  // namespace detail

inline nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"embed_dim", c.embed_dim},
          {"num_heads", c.num_heads},
          {"ffn_dim", c.ffn_dim},
          {"num_blocks", c.num_blocks},
          {"azimuth_classes", c.azimuth_classes},
          {"elevation_classes", c.elevation_classes},
          {"distance_classes", c.distance_classes}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.embed_dim = j.at("embed_dim").get<int>();
  c.num_heads = j.at("num_heads").get<int>();
  c.ffn_dim = j.at("ffn_dim").get<int>();
  c.num_blocks = j.at("num_blocks").get<int>();
  c.azimuth_classes = j.at("azimuth_classes").get<int>();
  c.elevation_classes = j.at("elevation_classes").get<int>();
  c.distance_classes = j.at("distance_classes").get<int>();
  c.validate();
  return c;
}

inline void save_checkpoint(const std::filesystem::path& path,
                            const Checkpoint& ckpt) {
  Container c;
  c.header["kind"] = "checkpoint";
  c.header["format_version"] = kCheckpointVersion;
  c.header["config"] = config_to_json(ckpt.params.config);
  c.header["label_scheme"] = scheme_to_json(ckpt.scheme);
  c.header["step"] = ckpt.step;
  c.header["rng_state"] = ckpt.rng_state;
  detail::params_to_container(ckpt.params, c, "");
  write_container(path, c);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const Container c = read_container(path);
  if (c.header.value("kind", "") != "checkpoint") {
    throw DataError("load_checkpoint: not a checkpoint: " + path.string());
  }
  Checkpoint ckpt;
  ckpt.params =
      ModelParams<float>::zeros(config_from_json(c.header.at("config")));
  detail::params_from_container(c, ckpt.params, "");
  ckpt.scheme = scheme_from_json(c.header.at("label_scheme"));
  ckpt.step = c.header.value("step", std::int64_t{0});
  ckpt.rng_state = c.header.value("rng_state", std::string{});
  return ckpt;
}

}  // namespace phasecoder

#endif  // PHASECODER_CHECKPOINT_HPP_
