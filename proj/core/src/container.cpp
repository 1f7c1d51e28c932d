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

#include "phasecoder/container.hpp"

#include <cstring>
#include <fstream>

#include "phasecoder/errors.hpp"

namespace phasecoder {

void Container::add_tensor(const std::string& name,
                           std::vector<std::int64_t> shape,
                           std::vector<float> data) {
  std::int64_t expected = 1;
  for (std::int64_t d : shape) expected *= d;
  if (expected != static_cast<std::int64_t>(data.size())) {
    throw DataError("Container: shape/data size mismatch for " + name);
  }
  tensors.emplace_back(name, std::move(data));
  shapes.push_back(std::move(shape));
}

const std::vector<float>& Container::tensor(const std::string& name) const {
  for (const auto& [n, data] : tensors) {
    if (n == name) return data;
  }
  throw DataError("Container: missing tensor " + name);
}

bool Container::has_tensor(const std::string& name) const {
  for (const auto& [n, data] : tensors) {
    if (n == name) return true;
  }
  return false;
}

void write_container(const std::filesystem::path& path, const Container& c) {
  nlohmann::json header = c.header;
  if (!header.contains("kind")) {
    throw DataError("write_container: header missing 'kind'");
  }
  nlohmann::json tensor_list = nlohmann::json::array();
  for (std::size_t i = 0; i < c.tensors.size(); ++i) {
    tensor_list.push_back({{"name", c.tensors[i].first},
                           {"shape", c.shapes[i]},
                           {"dtype", "f32"}});
  }
  header["tensors"] = tensor_list;
  const std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write_container: cannot open " + path.string());
  out.write(kContainerMagic, 8);
  const std::uint64_t len = header_str.size();
  char lenbuf[8];
  for (int i = 0; i < 8; ++i) {
    lenbuf[i] = static_cast<char>((len >> (8 * i)) & 0xff);
  }
  out.write(lenbuf, 8);
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  for (const auto& [name, data] : c.tensors) {
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(float)));
  }
  if (!out) throw DataError("write_container: write failed: " + path.string());
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_container: cannot open " + path.string());

  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kContainerMagic, 8) != 0) {
    throw DataError("read_container: bad magic in " + path.string());
  }
  char lenbuf[8];
  in.read(lenbuf, 8);
  if (!in) throw DataError("read_container: truncated header length");
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) {
    len |= static_cast<std::uint64_t>(static_cast<unsigned char>(lenbuf[i]))
           << (8 * i);
  }
  std::string header_str(len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("read_container: truncated header");

  Container c;
  try {
    c.header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("read_container: bad header JSON: " +
                    std::string(e.what()));
  }
  if (!c.header.contains("tensors") || !c.header["tensors"].is_array()) {
    throw DataError("read_container: header missing tensor list");
  }
  for (const auto& spec : c.header["tensors"]) {
    const std::string name = spec.at("name").get<std::string>();
    const auto shape = spec.at("shape").get<std::vector<std::int64_t>>();
    if (spec.at("dtype").get<std::string>() != "f32") {
      throw DataError("read_container: unsupported dtype for " + name);
    }
    std::int64_t count = 1;
    for (std::int64_t d : shape) count *= d;
    std::vector<float> data(static_cast<std::size_t>(count));
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
    if (!in) throw DataError("read_container: truncated tensor " + name);
    c.tensors.emplace_back(name, std::move(data));
    c.shapes.push_back(shape);
  }
  return c;
}

}  // namespace phasecoder
