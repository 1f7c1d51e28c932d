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

#ifndef PHASECODER_DSP_HPP_
#define PHASECODER_DSP_HPP_

#include <complex>
#include <span>
#include <vector>

namespace phasecoder::dsp {

inline constexpr int kSampleRate = 16000;
inline constexpr int kSnippetSamples = 4096;  // 256 ms
inline constexpr int kStftWindow = 256;
inline constexpr int kStftHop = 128;
inline constexpr int kStftBins = kStftWindow / 2 + 1;  // 129
inline constexpr int kNumFrames = 33;

// In-place iterative radix-2 FFT. data.size() must be a power of two.
// inverse=true applies the conjugate transform and scales by 1/N.
void fft(std::vector<std::complex<double>>& data, bool inverse);

// Periodic Hann window of the given length: 0.5 * (1 - cos(2*pi*n/len)).
// Sums to exactly 1 under 50% overlap-add.
std::vector<double> hann_periodic(int len);

// One STFT frame set: frames[f][k], f in [0, kNumFrames), k in [0, kStftBins).
using StftFrames = std::vector<std::vector<std::complex<double>>>;

// Centered STFT of exactly kSnippetSamples samples: 128 zeros are prepended
// and appended, then 33 frames of a 256-sample periodic Hann window are taken
// at hop 128 and reduced to the one-sided 129-bin spectrum.
// Throws std::invalid_argument for any other input length.
StftFrames stft_frames(std::span<const float> channel_audio);

// Plain overlap-add inverse of stft_frames. Because the analysis window is
// COLA at 50% overlap, interior samples are recovered exactly (up to FFT
// round-off); the first and last kStftHop samples sit under a partial window
// sum and are not claimed.
std::vector<double> stft_reconstruct(const StftFrames& frames);

// Full linear convolution via zero-padded FFT. Result length is
// a.size() + b.size() - 1.
std::vector<double> fft_convolve(std::span<const double> a,
                                 std::span<const double> b);

}  // namespace phasecoder::dsp

#endif  // PHASECODER_DSP_HPP_
