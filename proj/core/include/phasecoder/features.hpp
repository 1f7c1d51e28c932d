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

#ifndef PHASECODER_FEATURES_HPP_
#define PHASECODER_FEATURES_HPP_

#include <Eigen/Dense>

#include "phasecoder/dsp.hpp"
#include "phasecoder/geometry.hpp"
#include "phasecoder/simulation.hpp"

namespace phasecoder {

inline constexpr int kFeatureDim = 2 * dsp::kStftBins;  // 258
inline constexpr int kMicEmbedAlpha = 7;                // alpha = 7.0
inline constexpr int kMicEmbedBeta = 4;                 // beta = 4.0

// Per-frame [magnitudes(129) ++ phases(129)]; the phase of a zero bin is 0.
// Rows are frames, columns the 258 feature slots.
Eigen::MatrixXd patch_features(const dsp::StftFrames& frames);

// Affine 258 -> D map. weights is D x 258, bias is D.
Eigen::VectorXd project(const Eigen::VectorXd& patch258,
                        const Eigen::MatrixXd& weights,
                        const Eigen::VectorXd& bias);

// Standard sinusoidal positional embedding, base 10000:
//   e[2k] = sin(pos / 10000^(2k/D)),  e[2k+1] = cos(pos / 10000^(2k/D)).
// Positions index from 0.
Eigen::VectorXd sinusoid_embedding(int pos, int embed_dim);

// Position of the patch in the flattened sequence.
inline Eigen::VectorXd sequential_embedding(int pos, int embed_dim) {
  return sinusoid_embedding(pos, embed_dim);
}

// Shared by all patches of one STFT frame.
inline Eigen::VectorXd frame_embedding(int frame, int embed_dim) {
  return sinusoid_embedding(frame, embed_dim);
}

// Microphone positional embedding: four stacked D/4 blocks
//   alpha * r * [cos(2*pi*beta*v + theta); sin(2*pi*beta*v + theta);
//                cos(2*pi*beta*v + phi);   sin(2*pi*beta*v + phi)]
// with alpha = 7.0, beta = 4.0 and v = (4/D) * [0 .. D/4 - 1].
// r = 0 yields the zero vector.
Eigen::VectorXd mic_embedding(const SphericalMic& sph, int embed_dim = 256);

enum class FlattenOrder {
  kFrameMajor,   // all channels of frame 0, then frame 1, ... (default)
  kChannelMajor  // all frames of channel 0, then channel 1, ...
};

// Raw per-patch features plus the summed positional embeddings, before the
// learned projection is applied. patches is L x 258; positional is L x D.
struct PatchSequence {
  Eigen::MatrixXd patches;
  Eigen::MatrixXd positional;
  int frames = 0;
  int channels = 0;

  int length() const { return frames * channels; }
};

// Computes STFT features for every channel of a snippet and the three
// positional embeddings per patch. Throws when snippet channel count does
// not match the array.
PatchSequence compute_patch_sequence(
    const Snippet& snippet, const MicArray& array, int embed_dim = 256,
    FlattenOrder order = FlattenOrder::kFrameMajor);

// Full model input: projected patches plus positional embeddings, with the
// CLS vector prepended at row 0 (no positional terms on CLS).
// Result is (L+1) x D.
Eigen::MatrixXd assemble_input(const Snippet& snippet, const MicArray& array,
                               const Eigen::MatrixXd& proj_weights,
                               const Eigen::VectorXd& proj_bias,
                               const Eigen::VectorXd& cls,
                               FlattenOrder order = FlattenOrder::kFrameMajor);

}  // namespace phasecoder

#endif  // PHASECODER_FEATURES_HPP_
