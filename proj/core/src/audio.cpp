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

#include "phasecoder/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "phasecoder/errors.hpp"

namespace phasecoder {

namespace {

void put_u32(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] |
                                    (static_cast<std::uint16_t>(p[1]) << 8));
}

std::int16_t to_pcm16(float x) {
  const float clamped = std::clamp(x, -1.0f, 1.0f);
  const long v = std::lround(static_cast<double>(clamped) * 32767.0);
  return static_cast<std::int16_t>(std::clamp(v, -32768L, 32767L));
}

}  // namespace

void write_wav(const std::filesystem::path& path,
               const MultiChannelAudio& audio, WavFormat format) {
  const int channels = audio.num_channels();
  if (channels == 0) throw DataError("write_wav: no channels");
  const std::int64_t frames = audio.num_samples();
  for (const auto& ch : audio.channels) {
    if (static_cast<std::int64_t>(ch.size()) != frames) {
      throw DataError("write_wav: channel length mismatch");
    }
  }

  const bool pcm = format == WavFormat::kPcm16;
  const int bytes_per_sample = pcm ? 2 : 4;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(
      frames * channels * bytes_per_sample);

  std::string header;
  header.reserve(44);
  header += "RIFF";
  put_u32(header, 36 + data_bytes);
  header += "WAVEfmt ";
  put_u32(header, 16);
  put_u16(header, pcm ? 1 : 3);  // PCM or IEEE float
  put_u16(header, static_cast<std::uint16_t>(channels));
  put_u32(header, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(header, static_cast<std::uint32_t>(audio.sample_rate * channels *
                                             bytes_per_sample));
  put_u16(header, static_cast<std::uint16_t>(channels * bytes_per_sample));
  put_u16(header, static_cast<std::uint16_t>(8 * bytes_per_sample));
  header += "data";
  put_u32(header, data_bytes);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write_wav: cannot open " + path.string());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  std::vector<char> row(static_cast<std::size_t>(channels) *
                        static_cast<std::size_t>(bytes_per_sample));
  for (std::int64_t i = 0; i < frames; ++i) {
    char* p = row.data();
    for (int c = 0; c < channels; ++c) {
      const float x = audio.channels[static_cast<std::size_t>(c)]
                                    [static_cast<std::size_t>(i)];
      if (pcm) {
        const std::int16_t v = to_pcm16(x);
        std::memcpy(p, &v, 2);
        p += 2;
      } else {
        std::memcpy(p, &x, 4);
        p += 4;
      }
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw DataError("write_wav: write failed for " + path.string());
}

MultiChannelAudio read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_wav: cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DataError("read_wav: not a RIFF/WAVE file: " + path.string());
  }

  std::uint16_t fmt_tag = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0 && body + 16 <= bytes.size()) {
      fmt_tag = get_u16(bytes.data() + body);
      channels = get_u16(bytes.data() + body + 2);
      sample_rate = get_u32(bytes.data() + body + 4);
      bits = get_u16(bytes.data() + body + 14);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = static_cast<std::uint32_t>(
          std::min<std::size_t>(len, bytes.size() - body));
    }
    pos = body + len + (len & 1);  // chunks are word-aligned
  }

  if (data == nullptr || channels == 0) {
    throw DataError("read_wav: missing fmt/data chunk: " + path.string());
  }
  const bool pcm16 = fmt_tag == 1 && bits == 16;
  const bool f32 = fmt_tag == 3 && bits == 32;
  if (!pcm16 && !f32) {
    throw DataError("read_wav: unsupported format (want PCM16 or float32): " +
                    path.string());
  }

  const int bytes_per_sample = pcm16 ? 2 : 4;
  const std::size_t frame_bytes =
      static_cast<std::size_t>(channels) *
      static_cast<std::size_t>(bytes_per_sample);
  const std::size_t frames = data_len / frame_bytes;

  MultiChannelAudio audio;
  audio.sample_rate = static_cast<int>(sample_rate);
  audio.channels.assign(channels, std::vector<float>(frames));
  const unsigned char* p = data;
  for (std::size_t i = 0; i < frames; ++i) {
    for (int c = 0; c < channels; ++c) {
      if (pcm16) {
        std::int16_t v;
        std::memcpy(&v, p, 2);
        audio.channels[static_cast<std::size_t>(c)][i] =
            static_cast<float>(v) / 32767.0f;
        p += 2;
      } else {
        float v;
        std::memcpy(&v, p, 4);
        audio.channels[static_cast<std::size_t>(c)][i] = v;
        p += 4;
      }
    }
  }
  return audio;
}

std::vector<float> mean_channel(const MultiChannelAudio& audio) {
  const std::int64_t n = audio.num_samples();
  const int c = audio.num_channels();
  std::vector<float> out(static_cast<std::size_t>(n), 0.0f);
  if (c == 0) return out;
  for (const auto& ch : audio.channels) {
    for (std::int64_t i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] += ch[static_cast<std::size_t>(i)];
    }
  }
  const float inv = 1.0f / static_cast<float>(c);
  for (auto& x : out) x *= inv;
  return out;
}

}  // namespace phasecoder
