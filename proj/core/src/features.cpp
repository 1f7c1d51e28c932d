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

#include "phasecoder/features.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace phasecoder {

Eigen::MatrixXd patch_features(const dsp::StftFrames& frames) {
  const int n_frames = static_cast<int>(frames.size());
  Eigen::MatrixXd out(n_frames, kFeatureDim);
  for (int f = 0; f < n_frames; ++f) {
    const auto& frame = frames[static_cast<std::size_t>(f)];
    if (frame.size() != static_cast<std::size_t>(dsp::kStftBins)) {
      throw std::invalid_argument("patch_features: bad bin count");
    }
    for (int k = 0; k < dsp::kStftBins; ++k) {
      const auto& bin = frame[static_cast<std::size_t>(k)];
      out(f, k) = std::abs(bin);
      // atan2(0, 0) == 0, which is the documented zero-bin convention.
      out(f, dsp::kStftBins + k) = std::atan2(bin.imag(), bin.real());
    }
  }
  return out;
}

Eigen::VectorXd project(const Eigen::VectorXd& patch258,
                        const Eigen::MatrixXd& weights,
                        const Eigen::VectorXd& bias) {
  if (weights.cols() != patch258.size() || weights.rows() != bias.size()) {
    throw std::invalid_argument("project: shape mismatch");
  }
  return weights * patch258 + bias;
}

Eigen::VectorXd sinusoid_embedding(int pos, int embed_dim) {
  if (pos < 0) throw std::invalid_argument("sinusoid_embedding: pos < 0");
  if (embed_dim <= 0 || embed_dim % 2 != 0) {
    throw std::invalid_argument("sinusoid_embedding: dim must be even");
  }
  Eigen::VectorXd e(embed_dim);
  for (int k = 0; 2 * k < embed_dim; ++k) {
    const double rate =
        std::pow(10000.0, -2.0 * k / static_cast<double>(embed_dim));
    const double angle = static_cast<double>(pos) * rate;
    e(2 * k) = std::sin(angle);
    e(2 * k + 1) = std::cos(angle);
  }
  return e;
}

Eigen::VectorXd mic_embedding(const SphericalMic& sph, int embed_dim) {
  if (embed_dim % 4 != 0) {
    throw std::invalid_argument("mic_embedding: dim must be divisible by 4");
  }
  Eigen::VectorXd e = Eigen::VectorXd::Zero(embed_dim);
  if (sph.r == 0.0) return e;
  const int quarter = embed_dim / 4;
  const double alpha = static_cast<double>(kMicEmbedAlpha);
  const double beta = static_cast<double>(kMicEmbedBeta);
  for (int i = 0; i < quarter; ++i) {
    const double v =
        4.0 * static_cast<double>(i) / static_cast<double>(embed_dim);
    const double base = 2.0 * kPi * beta * v;
    e(i) = alpha * sph.r * std::cos(base + sph.theta_polar);
    e(quarter + i) = alpha * sph.r * std::sin(base + sph.theta_polar);
    e(2 * quarter + i) = alpha * sph.r * std::cos(base + sph.phi);
    e(3 * quarter + i) = alpha * sph.r * std::sin(base + sph.phi);
  }
  return e;
}

PatchSequence compute_patch_sequence(const Snippet& snippet,
                                     const MicArray& array, int embed_dim,
                                     FlattenOrder order) {
  const int channels = static_cast<int>(snippet.audio.size());
  if (channels != array.count()) {
    throw std::invalid_argument(
        "compute_patch_sequence: snippet has " + std::to_string(channels) +
        " channels but the array has " + std::to_string(array.count()));
  }
  const int frames = dsp::kNumFrames;
  const int length = frames * channels;

  PatchSequence seq;
  seq.frames = frames;
  seq.channels = channels;
  seq.patches.resize(length, kFeatureDim);
  seq.positional.resize(length, embed_dim);

  const std::vector<SphericalMic> sph = to_relative_spherical(array);
  std::vector<Eigen::VectorXd> mic_emb;
  mic_emb.reserve(static_cast<std::size_t>(channels));
  for (int c = 0; c < channels; ++c) {
    mic_emb.push_back(
        mic_embedding(sph[static_cast<std::size_t>(c)], embed_dim));
  }
  std::vector<Eigen::VectorXd> frame_emb;
  frame_emb.reserve(static_cast<std::size_t>(frames));
  for (int f = 0; f < frames; ++f) {
    frame_emb.push_back(frame_embedding(f, embed_dim));
  }

  for (int c = 0; c < channels; ++c) {
    const auto stft =
        dsp::stft_frames(snippet.audio[static_cast<std::size_t>(c)]);
    const Eigen::MatrixXd feats = patch_features(stft);
    for (int f = 0; f < frames; ++f) {
      const int l = order == FlattenOrder::kFrameMajor ? f * channels + c
                                                       : c * frames + f;
      seq.patches.row(l) = feats.row(f);
      seq.positional.row(l) =
          (sequential_embedding(l, embed_dim) +
           frame_emb[static_cast<std::size_t>(f)] +
           mic_emb[static_cast<std::size_t>(c)])
              .transpose();
    }
  }
  return seq;
}

Eigen::MatrixXd assemble_input(const Snippet& snippet, const MicArray& array,
                               const Eigen::MatrixXd& proj_weights,
                               const Eigen::VectorXd& proj_bias,
                               const Eigen::VectorXd& cls,
                               FlattenOrder order) {
  const int embed_dim = static_cast<int>(cls.size());
  if (proj_weights.rows() != embed_dim ||
      proj_weights.cols() != kFeatureDim ||
      proj_bias.size() != embed_dim) {
    throw std::invalid_argument("assemble_input: weight shape mismatch");
  }
  const PatchSequence seq =
      compute_patch_sequence(snippet, array, embed_dim, order);
  const int length = seq.length();

  Eigen::MatrixXd input(length + 1, embed_dim);
  input.row(0) = cls.transpose();
  input.bottomRows(length) =
      seq.patches * proj_weights.transpose() + seq.positional;
  input.bottomRows(length).rowwise() += proj_bias.transpose();
  return input;
}

}  // namespace phasecoder
