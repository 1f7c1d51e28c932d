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

#include "phasecoder/sources.hpp"

#include <algorithm>
#include <cmath>

#include "phasecoder/audio.hpp"
#include "phasecoder/errors.hpp"

namespace phasecoder {

namespace {

constexpr double kFs = 16000.0;
constexpr double kTwoPi = 6.28318530717958647692;

void normalize_peak(std::vector<double>& x, double peak) {
  double max_abs = 0.0;
  for (double v : x) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs < 1e-12) return;
  const double g = peak / max_abs;
  for (double& v : x) v *= g;
}

// Raised-cosine fade applied to both ends of [begin, end).
void apply_fades(std::vector<double>& x, std::size_t begin, std::size_t end,
                 std::size_t fade) {
  fade = std::min(fade, (end - begin) / 2);
  for (std::size_t i = 0; i < fade; ++i) {
    const double g =
        0.5 * (1.0 - std::cos(kTwoPi * 0.5 * static_cast<double>(i) /
                              static_cast<double>(fade)));
    x[begin + i] *= g;
    x[end - 1 - i] *= g;
  }
}

}  // namespace

std::vector<double> synth_speech(Rng& rng, double duration_s) {
  const std::size_t total =
      static_cast<std::size_t>(std::llround(duration_s * kFs));
  std::vector<double> out(total, 0.0);

  const double f0_base = rng.uniform(90.0, 230.0);
  const double formant1 = rng.uniform(300.0, 850.0);
  const double formant2 = rng.uniform(900.0, 2300.0);

  std::size_t pos = 0;
  while (pos < total) {
    const bool voiced = rng.uniform() < 0.7;
    const double seg_s =
        voiced ? rng.uniform(0.10, 0.28) : rng.uniform(0.03, 0.12);
    const std::size_t seg =
        std::min(total - pos,
                 static_cast<std::size_t>(std::llround(seg_s * kFs)));
    if (seg == 0) break;

    if (voiced) {
      const double f0 =
          f0_base * (1.0 + rng.uniform(-0.12, 0.12));
      const double drift = rng.uniform(-30.0, 30.0);  // Hz over the segment
      const int partials =
          std::max(3, static_cast<int>(std::floor(6000.0 / f0)));
      std::vector<double> amp(static_cast<std::size_t>(partials));
      std::vector<double> phase(static_cast<std::size_t>(partials));
      for (int k = 0; k < partials; ++k) {
        const double fk = f0 * (k + 1);
        const double formant_gain =
            1.0 + 2.0 * std::exp(-std::pow((fk - formant1) / 220.0, 2)) +
            1.4 * std::exp(-std::pow((fk - formant2) / 350.0, 2));
        amp[static_cast<std::size_t>(k)] = formant_gain / (k + 1.0);
        phase[static_cast<std::size_t>(k)] = rng.uniform(0.0, kTwoPi);
      }
      for (std::size_t i = 0; i < seg; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(seg);
        const double f_now = f0 + drift * t;
        double s = 0.0;
        for (int k = 0; k < partials; ++k) {
          auto ki = static_cast<std::size_t>(k);
          phase[ki] += kTwoPi * f_now * (k + 1) / kFs;
          if (f_now * (k + 1) < 7500.0) s += amp[ki] * std::sin(phase[ki]);
        }
        out[pos + i] = 0.22 * s;
      }
    } else {
      // High-passed noise burst (first difference of white noise).
      double prev = rng.normal();
      for (std::size_t i = 0; i < seg; ++i) {
        const double n = rng.normal();
        out[pos + i] = 0.28 * (n - prev);
        prev = n;
      }
    }
    apply_fades(out, pos, pos + seg, static_cast<std::size_t>(0.012 * kFs));

    pos += seg;
    // Occasional inter-syllable pause.
    if (rng.uniform() < 0.25) {
      pos += std::min(total - pos, static_cast<std::size_t>(
                                       std::llround(rng.uniform(0.02, 0.10) *
                                                    kFs)));
    }
  }

  normalize_peak(out, 0.85);
  return out;
}

std::vector<double> synth_distractor(Rng& rng, double duration_s) {
  const std::size_t total =
      static_cast<std::size_t>(std::llround(duration_s * kFs));
  std::vector<double> out(total, 0.0);
  const int kind = static_cast<int>(rng.uniform_int(0, 2));

  if (kind == 0) {
    // Low-passed noise with slow amplitude modulation.
    const double am_hz = rng.uniform(0.5, 4.0);
    const double alpha = rng.uniform(0.05, 0.4);
    double state = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      state += alpha * (rng.normal() - state);
      const double am =
          0.6 + 0.4 * std::sin(kTwoPi * am_hz * static_cast<double>(i) / kFs +
                               1.3);
      out[i] = state * am;
    }
  } else if (kind == 1) {
    // Harmonic hum (machinery-like).
    const double f0 = rng.uniform(60.0, 400.0);
    const int partials = std::max(
        2, static_cast<int>(rng.uniform_int(2, 8)));
    std::vector<double> phase(static_cast<std::size_t>(partials));
    for (auto& p : phase) p = rng.uniform(0.0, kTwoPi);
    for (std::size_t i = 0; i < total; ++i) {
      double s = 0.0;
      for (int k = 0; k < partials; ++k) {
        auto ki = static_cast<std::size_t>(k);
        phase[ki] += kTwoPi * f0 * (k + 1) / kFs;
        s += std::sin(phase[ki]) / (k + 1.0);
      }
      out[i] = s;
    }
  } else {
    // Sparse click train.
    const double rate_hz = rng.uniform(2.0, 12.0);
    std::size_t i = 0;
    while (i < total) {
      const std::size_t gap = static_cast<std::size_t>(std::llround(
          kFs / rate_hz * rng.uniform(0.6, 1.4)));
      i += std::max<std::size_t>(gap, 1);
      if (i >= total) break;
      const std::size_t len =
          std::min<std::size_t>(total - i, static_cast<std::size_t>(
                                               rng.uniform_int(16, 80)));
      for (std::size_t j = 0; j < len; ++j) {
        const double env = std::exp(-6.0 * static_cast<double>(j) /
                                    static_cast<double>(len));
        out[i + j] += env * rng.normal();
      }
      i += len;
    }
  }

  normalize_peak(out, 0.85);
  return out;
}

std::vector<double> SyntheticSpeechSource::next(Rng& rng) {
  return synth_speech(rng, rng.uniform(min_s_, max_s_));
}

WavDirSpeechSource::WavDirSpeechSource(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("WavDirSpeechSource: not a directory: " + dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") {
      files_.push_back(entry.path());
    }
  }
  std::sort(files_.begin(), files_.end());
  if (files_.empty()) {
    throw DataError("WavDirSpeechSource: no .wav files in " + dir.string());
  }
}

std::vector<double> WavDirSpeechSource::next(Rng& rng) {
  const auto idx = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(files_.size()) - 1));
  const MultiChannelAudio audio = read_wav(files_[idx]);
  if (audio.sample_rate != 16000) {
    throw DataError("WavDirSpeechSource: expected 16 kHz: " +
                    files_[idx].string());
  }
  if (audio.num_channels() == 0) {
    throw DataError("WavDirSpeechSource: empty file: " + files_[idx].string());
  }
  const auto& ch = audio.channels[0];
  return std::vector<double>(ch.begin(), ch.end());
}

}  // namespace phasecoder
