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

#include "phasecoder/dsp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace phasecoder::dsp {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}
}  // namespace

void fft(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_pow2(n)) throw std::invalid_argument("fft: size not a power of two");
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : data) x *= scale;
  }
}

std::vector<double> hann_periodic(int len) {
  std::vector<double> w(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) {
    w[static_cast<std::size_t>(i)] =
        0.5 * (1.0 - std::cos(kTwoPi * i / static_cast<double>(len)));
  }
  return w;
}

StftFrames stft_frames(std::span<const float> channel_audio) {
  if (channel_audio.size() != static_cast<std::size_t>(kSnippetSamples)) {
    throw std::invalid_argument(
        "stft_frames: expected " + std::to_string(kSnippetSamples) +
        " samples, got " + std::to_string(channel_audio.size()));
  }
  static const std::vector<double> window = hann_periodic(kStftWindow);

  // Center padding: kStftHop zeros on each side.
  std::vector<double> padded(
      static_cast<std::size_t>(kSnippetSamples + 2 * kStftHop), 0.0);
  for (int i = 0; i < kSnippetSamples; ++i) {
    padded[static_cast<std::size_t>(i + kStftHop)] =
        static_cast<double>(channel_audio[static_cast<std::size_t>(i)]);
  }

  StftFrames frames(static_cast<std::size_t>(kNumFrames));
  std::vector<std::complex<double>> buf(
      static_cast<std::size_t>(kStftWindow));
  for (int f = 0; f < kNumFrames; ++f) {
    const int start = f * kStftHop;
    for (int i = 0; i < kStftWindow; ++i) {
      buf[static_cast<std::size_t>(i)] = {
          padded[static_cast<std::size_t>(start + i)] *
              window[static_cast<std::size_t>(i)],
          0.0};
    }
    fft(buf, /*inverse=*/false);
    auto& out = frames[static_cast<std::size_t>(f)];
    out.assign(buf.begin(), buf.begin() + kStftBins);
  }
  return frames;
}

std::vector<double> stft_reconstruct(const StftFrames& frames) {
  const int n_frames = static_cast<int>(frames.size());
  std::vector<double> acc(
      static_cast<std::size_t>((n_frames - 1) * kStftHop + kStftWindow), 0.0);
  std::vector<std::complex<double>> buf(
      static_cast<std::size_t>(kStftWindow));
  for (int f = 0; f < n_frames; ++f) {
    const auto& half = frames[static_cast<std::size_t>(f)];
    if (half.size() != static_cast<std::size_t>(kStftBins)) {
      throw std::invalid_argument("stft_reconstruct: bad bin count");
    }
    // Rebuild the full spectrum from the one-sided half via conjugate
    // symmetry, then invert.
    for (int k = 0; k < kStftBins; ++k) {
      buf[static_cast<std::size_t>(k)] = half[static_cast<std::size_t>(k)];
    }
    for (int k = kStftBins; k < kStftWindow; ++k) {
      buf[static_cast<std::size_t>(k)] =
          std::conj(half[static_cast<std::size_t>(kStftWindow - k)]);
    }
    fft(buf, /*inverse=*/true);
    const int start = f * kStftHop;
    for (int i = 0; i < kStftWindow; ++i) {
      acc[static_cast<std::size_t>(start + i)] +=
          buf[static_cast<std::size_t>(i)].real();
    }
  }
  // Drop the center padding added by stft_frames.
  std::vector<double> out(
      acc.begin() + kStftHop,
      acc.begin() + kStftHop + kSnippetSamples);
  return out;
}

std::vector<double> fft_convolve(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  std::vector<std::complex<double>> fa(n), fb(n);
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  fft(fa, false);
  fft(fb, false);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft(fa, true);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = fa[i].real();
  return out;
}

}  // namespace phasecoder::dsp
