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

#ifndef PHASECODER_MODEL_HPP_
#define PHASECODER_MODEL_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phasecoder/errors.hpp"
#include "phasecoder/features.hpp"
#include "phasecoder/geometry.hpp"
#include "phasecoder/rng.hpp"

namespace phasecoder {

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Encoder architecture. Presets: Small (256, 2, 256, 2),
// Medium (256, 4, 256, 5), Large (512, 8, 2048, 8).
struct ModelConfig {
  int embed_dim = 256;
  int num_heads = 4;
  int ffn_dim = 256;
  int num_blocks = 5;
  int azimuth_classes = 37;    // grid bins + no-speech slot
  int elevation_classes = 19;
  int distance_classes = 14;

  void validate() const {
    if (embed_dim <= 0 || embed_dim % 4 != 0) {
      throw std::invalid_argument("ModelConfig: embed_dim must be a positive "
                                  "multiple of 4");
    }
    if (num_heads <= 0 || embed_dim % num_heads != 0) {
      throw std::invalid_argument(
          "ModelConfig: embed_dim must be divisible by num_heads");
    }
    if (ffn_dim <= 0 || num_blocks <= 0) {
      throw std::invalid_argument("ModelConfig: bad ffn_dim / num_blocks");
    }
    if (azimuth_classes < 2 || elevation_classes < 2 || distance_classes < 2) {
      throw std::invalid_argument("ModelConfig: class counts must be >= 2");
    }
  }

  int head_dim() const { return embed_dim / num_heads; }

  static ModelConfig small() { return {256, 2, 256, 2, 37, 19, 14}; }
  static ModelConfig medium() { return {256, 4, 256, 5, 37, 19, 14}; }
  static ModelConfig large() { return {512, 8, 2048, 8, 37, 19, 14}; }
  static ModelConfig preset(const std::string& name) {
    if (name == "small") return small();
    if (name == "medium") return medium();
    if (name == "large") return large();
    throw DataError("unknown model preset: " + name);
  }
};

template <typename S>
struct BlockParams {
  VecX<S> ln1_gamma, ln1_beta;
  MatX<S> wq, wk, wv, wo;  // D x D, output dim first
  VecX<S> bq, bk, bv, bo;
  VecX<S> ln2_gamma, ln2_beta;
  MatX<S> ffn_w1;  // ffn x D
  VecX<S> ffn_b1;
  MatX<S> ffn_w2;  // D x ffn
  VecX<S> ffn_b2;
};

// Every learnable tensor of the pipeline: the 258->D projection, the CLS
// vector, the encoder blocks, the post-CLS MLP, and the three heads.
template <typename S>
struct ModelParams {
  ModelConfig config;
  MatX<S> proj_w;  // D x 258
  VecX<S> proj_b;
  VecX<S> cls;
  std::vector<BlockParams<S>> blocks;
  VecX<S> final_ln_gamma, final_ln_beta;
  MatX<S> mlp_w1;  // D x D
  VecX<S> mlp_b1;
  MatX<S> mlp_w2;  // D x D
  VecX<S> mlp_b2;
  MatX<S> head_az;  // classes x D
  VecX<S> head_az_b;
  MatX<S> head_el;
  VecX<S> head_el_b;
  MatX<S> head_dist;
  VecX<S> head_dist_b;

  // Calls f(name, tensor) for every tensor in the declared (serialized)
  // order. F must accept both MatX<S>& and VecX<S>&.
  template <typename F>
  void visit(F&& f) {
    f("proj_w", proj_w);
    f("proj_b", proj_b);
    f("cls", cls);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const std::string p = "block" + std::to_string(i) + ".";
      auto& b = blocks[i];
      f(p + "ln1_gamma", b.ln1_gamma);
      f(p + "ln1_beta", b.ln1_beta);
      f(p + "wq", b.wq);
      f(p + "bq", b.bq);
      f(p + "wk", b.wk);
      f(p + "bk", b.bk);
      f(p + "wv", b.wv);
      f(p + "bv", b.bv);
      f(p + "wo", b.wo);
      f(p + "bo", b.bo);
      f(p + "ln2_gamma", b.ln2_gamma);
      f(p + "ln2_beta", b.ln2_beta);
      f(p + "ffn_w1", b.ffn_w1);
      f(p + "ffn_b1", b.ffn_b1);
      f(p + "ffn_w2", b.ffn_w2);
      f(p + "ffn_b2", b.ffn_b2);
    }
    f("final_ln_gamma", final_ln_gamma);
    f("final_ln_beta", final_ln_beta);
    f("mlp_w1", mlp_w1);
    f("mlp_b1", mlp_b1);
    f("mlp_w2", mlp_w2);
    f("mlp_b2", mlp_b2);
    f("head_az", head_az);
    f("head_az_b", head_az_b);
    f("head_el", head_el);
    f("head_el_b", head_el_b);
    f("head_dist", head_dist);
    f("head_dist_b", head_dist_b);
  }
  template <typename F>
  void visit(F&& f) const {
    const_cast<ModelParams<S>*>(this)->visit(
        [&f](const std::string& name, auto& t) {
          f(name, const_cast<const std::remove_reference_t<decltype(t)>&>(t));
        });
  }

  static ModelParams<S> zeros(const ModelConfig& config) {
    config.validate();
    const int d = config.embed_dim;
    ModelParams<S> p;
    p.config = config;
    p.proj_w = MatX<S>::Zero(d, kFeatureDim);
    p.proj_b = VecX<S>::Zero(d);
    p.cls = VecX<S>::Zero(d);
    p.blocks.resize(static_cast<std::size_t>(config.num_blocks));
    for (auto& b : p.blocks) {
      b.ln1_gamma = VecX<S>::Zero(d);
      b.ln1_beta = VecX<S>::Zero(d);
      b.wq = MatX<S>::Zero(d, d);
      b.wk = MatX<S>::Zero(d, d);
      b.wv = MatX<S>::Zero(d, d);
      b.wo = MatX<S>::Zero(d, d);
      b.bq = VecX<S>::Zero(d);
      b.bk = VecX<S>::Zero(d);
      b.bv = VecX<S>::Zero(d);
      b.bo = VecX<S>::Zero(d);
      b.ln2_gamma = VecX<S>::Zero(d);
      b.ln2_beta = VecX<S>::Zero(d);
      b.ffn_w1 = MatX<S>::Zero(config.ffn_dim, d);
      b.ffn_b1 = VecX<S>::Zero(config.ffn_dim);
      b.ffn_w2 = MatX<S>::Zero(d, config.ffn_dim);
      b.ffn_b2 = VecX<S>::Zero(d);
    }
    p.final_ln_gamma = VecX<S>::Zero(d);
    p.final_ln_beta = VecX<S>::Zero(d);
    p.mlp_w1 = MatX<S>::Zero(d, d);
    p.mlp_b1 = VecX<S>::Zero(d);
    p.mlp_w2 = MatX<S>::Zero(d, d);
    p.mlp_b2 = VecX<S>::Zero(d);
    p.head_az = MatX<S>::Zero(config.azimuth_classes, d);
    p.head_az_b = VecX<S>::Zero(config.azimuth_classes);
    p.head_el = MatX<S>::Zero(config.elevation_classes, d);
    p.head_el_b = VecX<S>::Zero(config.elevation_classes);
    p.head_dist = MatX<S>::Zero(config.distance_classes, d);
    p.head_dist_b = VecX<S>::Zero(config.distance_classes);
    return p;
  }

  void set_zero() {
    visit([](const std::string&, auto& t) { t.setZero(); });
  }

  std::int64_t count() const {
    std::int64_t n = 0;
    visit([&n](const std::string&, const auto& t) { n += t.size(); });
    return n;
  }

  template <typename T>
  ModelParams<T> cast() const {
    std::vector<std::vector<double>> flat;
    visit([&flat](const std::string&, const auto& t) {
      std::vector<double> d(static_cast<std::size_t>(t.size()));
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        d[static_cast<std::size_t>(i)] = static_cast<double>(t.data()[i]);
      }
      flat.push_back(std::move(d));
    });
    ModelParams<T> out = ModelParams<T>::zeros(config);
    std::size_t k = 0;
    out.visit([&flat, &k](const std::string&, auto& t) {
      const auto& d = flat[k++];
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        t.data()[i] = static_cast<T>(d[static_cast<std::size_t>(i)]);
      }
    });
    return out;
  }
};

// Glorot-uniform initialization: limit sqrt(6 / (fan_in + fan_out)) for
// weight matrices, fan (1, D) for the CLS vector; zero biases; unit
// LayerNorm gains. Deterministic in the rng stream (tensors filled in visit
// order, column-major within each tensor).
template <typename S>
ModelParams<S> init_params(const ModelConfig& config, Rng& rng) {
  ModelParams<S> p = ModelParams<S>::zeros(config);
  auto glorot = [&rng](auto& m, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = static_cast<S>(rng.uniform(-limit, limit));
    }
  };
  p.visit([&](const std::string& name, auto& t) {
    const bool is_gamma = name.ends_with("gamma");
    if (is_gamma) {
      t.setOnes();
      return;
    }
    if (t.cols() > 1) {  // weight matrix: rows = fan_out, cols = fan_in
      glorot(t, static_cast<double>(t.cols()), static_cast<double>(t.rows()));
      return;
    }
    if (name == "cls") {
      glorot(t, 1.0, static_cast<double>(t.size()));
      return;
    }
    t.setZero();  // biases and LayerNorm shifts
  });
  return p;
}

template <typename S>
struct ModelOutput {
  VecX<S> spatial_embedding;
  VecX<S> logits_az, logits_el, logits_dist;
  VecX<S> probs_az, probs_el, probs_dist;
};

namespace detail {

// Row-wise LayerNorm with 64-bit mean/variance accumulation. Caches the
// normalized activations and inverse stddev for the backward pass.
inline constexpr double kLayerNormEps = 1e-5;

template <typename S>
void layer_norm(const MatX<S>& x, const VecX<S>& gamma, const VecX<S>& beta,
                MatX<S>& x_hat, VecX<S>& inv_std, MatX<S>& y) {
  const Eigen::Index rows = x.rows(), cols = x.cols();
  x_hat.resize(rows, cols);
  inv_std.resize(rows);
  y.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    double mean = 0.0;
    for (Eigen::Index c = 0; c < cols; ++c) mean += static_cast<double>(x(r, c));
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double d = static_cast<double>(x(r, c)) - mean;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    const double istd = 1.0 / std::sqrt(var + kLayerNormEps);
    inv_std(r) = static_cast<S>(istd);
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double xh = (static_cast<double>(x(r, c)) - mean) * istd;
      x_hat(r, c) = static_cast<S>(xh);
      y(r, c) = gamma(c) * x_hat(r, c) + beta(c);
    }
  }
}

// Backward of layer_norm. Adds parameter gradients; returns dx.
template <typename S>
MatX<S> layer_norm_backward(const MatX<S>& dy, const MatX<S>& x_hat,
                            const VecX<S>& inv_std, const VecX<S>& gamma,
                            VecX<S>& dgamma, VecX<S>& dbeta) {
  const Eigen::Index rows = dy.rows(), cols = dy.cols();
  MatX<S> dx(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double g = static_cast<double>(dy(r, c));
      dgamma(c) += static_cast<S>(g * static_cast<double>(x_hat(r, c)));
      dbeta(c) += dy(r, c);
      const double dxh = g * static_cast<double>(gamma(c));
      sum_dxhat += dxh;
      sum_dxhat_xhat += dxh * static_cast<double>(x_hat(r, c));
    }
    const double inv_n = 1.0 / static_cast<double>(cols);
    const double istd = static_cast<double>(inv_std(r));
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double dxh =
          static_cast<double>(dy(r, c)) * static_cast<double>(gamma(c));
      dx(r, c) = static_cast<S>(
          istd * (dxh - inv_n * sum_dxhat -
                  static_cast<double>(x_hat(r, c)) * inv_n * sum_dxhat_xhat));
    }
  }
  return dx;
}

// Row-wise softmax with max-shift and 64-bit sum accumulation.
template <typename S>
void softmax_rows(MatX<S>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      mx = std::max(mx, static_cast<double>(m(r, c)));
    }
    double sum = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double e = std::exp(static_cast<double>(m(r, c)) - mx);
      m(r, c) = static_cast<S>(e);
      sum += e;
    }
    const double inv = 1.0 / sum;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = static_cast<S>(static_cast<double>(m(r, c)) * inv);
    }
  }
}

template <typename S>
VecX<S> softmax_vec(const VecX<S>& v) {
  MatX<S> m = v.transpose();
  softmax_rows(m);
  return m.transpose();
}

}  // namespace detail

template <typename S>
struct BlockCache {
  MatX<S> x_in, x_hat1;
  VecX<S> inv_std1;
  MatX<S> q, k, v;
  std::vector<MatX<S>> attn;  // per-head T x T softmax weights
  MatX<S> ctx;                // concatenated head outputs, pre-Wo
  MatX<S> x_mid, x_hat2;
  VecX<S> inv_std2;
  MatX<S> z1, a1;
};

// Cached activations from forward_cached, consumed by backward.
template <typename S>
struct Workspace {
  MatX<S> patches;  // L x 258
  std::vector<BlockCache<S>> blocks;
  MatX<S> final_in, final_hat;
  VecX<S> final_inv_std;
  VecX<S> cls_out, z1m, a1m, z2m;
  ModelOutput<S> output;
};

// The encoder: pre-LN transformer blocks, final LayerNorm, CLS readout
// through a 2-layer ReLU MLP to the spatial embedding, and three linear
// softmax heads.
template <typename S>
class Model {
 public:
  explicit Model(ModelParams<S> params) : p_(std::move(params)) {
    p_.config.validate();
  }

  const ModelParams<S>& params() const { return p_; }
  ModelParams<S>& mutable_params() { return p_; }
  const ModelConfig& config() const { return p_.config; }

  // Runs the encoder and heads on an assembled (L+1) x D input (CLS at
  // row 0). Throws NumericError naming the block where activations first
  // become non-finite.
  ModelOutput<S> forward(const MatX<S>& input) const {
    Workspace<S> ws;
    return encode(input, nullptr, &ws);
  }

  // Training path: takes raw 258-d patches and their summed positional
  // embeddings, applies projection + CLS internally (so their gradients are
  // defined), and caches all activations in ws.
  ModelOutput<S> forward_cached(const MatX<S>& patches,
                                const MatX<S>& positional,
                                Workspace<S>& ws) const {
    if (patches.cols() != kFeatureDim ||
        positional.cols() != p_.config.embed_dim ||
        patches.rows() != positional.rows()) {
      throw std::invalid_argument("forward_cached: shape mismatch");
    }
    const Eigen::Index length = patches.rows();
    MatX<S> input(length + 1, p_.config.embed_dim);
    input.row(0) = p_.cls.transpose();
    input.bottomRows(length) = patches * p_.proj_w.transpose() + positional;
    input.bottomRows(length).rowwise() += p_.proj_b.transpose();
    ws.patches = patches;
    return encode(input, &ws, &ws);
  }

  // Accumulates gradients of a scalar objective into `grads`, given the
  // objective's gradients w.r.t. the three head logits.
  void backward(const Workspace<S>& ws, const VecX<S>& dlogits_az,
                const VecX<S>& dlogits_el, const VecX<S>& dlogits_dist,
                ModelParams<S>& grads) const {
    const int d = p_.config.embed_dim;
    const int heads = p_.config.num_heads;
    const int dh = p_.config.head_dim();
    const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));

    // Heads.
    grads.head_az += dlogits_az * ws.output.spatial_embedding.transpose();
    grads.head_az_b += dlogits_az;
    grads.head_el += dlogits_el * ws.output.spatial_embedding.transpose();
    grads.head_el_b += dlogits_el;
    grads.head_dist += dlogits_dist * ws.output.spatial_embedding.transpose();
    grads.head_dist_b += dlogits_dist;

    VecX<S> dspatial = p_.head_az.transpose() * dlogits_az +
                       p_.head_el.transpose() * dlogits_el +
                       p_.head_dist.transpose() * dlogits_dist;

    // CLS MLP (two layers, ReLU after each).
    VecX<S> dz2 = dspatial;
    for (Eigen::Index i = 0; i < dz2.size(); ++i) {
      if (ws.z2m(i) <= S(0)) dz2(i) = S(0);
    }
    grads.mlp_w2 += dz2 * ws.a1m.transpose();
    grads.mlp_b2 += dz2;
    VecX<S> da1 = p_.mlp_w2.transpose() * dz2;
    VecX<S> dz1 = da1;
    for (Eigen::Index i = 0; i < dz1.size(); ++i) {
      if (ws.z1m(i) <= S(0)) dz1(i) = S(0);
    }
    grads.mlp_w1 += dz1 * ws.cls_out.transpose();
    grads.mlp_b1 += dz1;
    VecX<S> dcls_out = p_.mlp_w1.transpose() * dz1;

    // Final LayerNorm: upstream gradient only on the CLS row.
    MatX<S> dfinal_hat = MatX<S>::Zero(ws.final_hat.rows(), d);
    dfinal_hat.row(0) = dcls_out.transpose();
    MatX<S> dx = detail::layer_norm_backward(
        dfinal_hat, ws.final_hat, ws.final_inv_std, p_.final_ln_gamma,
        grads.final_ln_gamma, grads.final_ln_beta);

    // Blocks in reverse.
    for (int bi = p_.config.num_blocks - 1; bi >= 0; --bi) {
      const auto& c = ws.blocks[static_cast<std::size_t>(bi)];
      const auto& b = p_.blocks[static_cast<std::size_t>(bi)];
      auto& g = grads.blocks[static_cast<std::size_t>(bi)];
      const Eigen::Index t = c.x_in.rows();

      // FFN: x_out = x_mid + relu(xhat2 W1^T + b1) W2^T + b2.
      MatX<S> df = dx;  // gradient w.r.t. the FFN output term
      MatX<S> da = df * b.ffn_w2;  // T x ffn
      g.ffn_w2 += df.transpose() * c.a1;
      g.ffn_b2 += df.colwise().sum().transpose();
      MatX<S> dz = da;
      for (Eigen::Index r = 0; r < dz.rows(); ++r) {
        for (Eigen::Index cc = 0; cc < dz.cols(); ++cc) {
          if (c.z1(r, cc) <= S(0)) dz(r, cc) = S(0);
        }
      }
      g.ffn_w1 += dz.transpose() * c.x_hat2;
      g.ffn_b1 += dz.colwise().sum().transpose();
      MatX<S> dxhat2 = dz * b.ffn_w1;
      MatX<S> dx_mid =
          dx + detail::layer_norm_backward(dxhat2, c.x_hat2, c.inv_std2,
                                           b.ln2_gamma, g.ln2_gamma,
                                           g.ln2_beta);

      // Attention: x_mid = x_in + (ctx Wo^T + bo).
      MatX<S> do_ = dx_mid;
      MatX<S> dctx = do_ * b.wo;
      g.wo += do_.transpose() * c.ctx;
      g.bo += do_.colwise().sum().transpose();

      MatX<S> dq = MatX<S>::Zero(t, d);
      MatX<S> dk = MatX<S>::Zero(t, d);
      MatX<S> dv = MatX<S>::Zero(t, d);
      for (int h = 0; h < heads; ++h) {
        const auto qh = c.q.middleCols(h * dh, dh);
        const auto kh = c.k.middleCols(h * dh, dh);
        const auto vh = c.v.middleCols(h * dh, dh);
        const MatX<S>& ah = c.attn[static_cast<std::size_t>(h)];
        const auto dch = dctx.middleCols(h * dh, dh);

        MatX<S> dah = dch * vh.transpose();         // T x T
        dv.middleCols(h * dh, dh) = ah.transpose() * dch;
        // Softmax backward, row-wise.
        MatX<S> ds(t, t);
        for (Eigen::Index r = 0; r < t; ++r) {
          double dot = 0.0;
          for (Eigen::Index cc = 0; cc < t; ++cc) {
            dot += static_cast<double>(dah(r, cc)) *
                   static_cast<double>(ah(r, cc));
          }
          for (Eigen::Index cc = 0; cc < t; ++cc) {
            ds(r, cc) = static_cast<S>(
                static_cast<double>(ah(r, cc)) *
                (static_cast<double>(dah(r, cc)) - dot));
          }
        }
        dq.middleCols(h * dh, dh) = scale * (ds * kh);
        dk.middleCols(h * dh, dh) = scale * (ds.transpose() * qh);
      }

      g.wq += dq.transpose() * c.x_hat1;
      g.bq += dq.colwise().sum().transpose();
      g.wk += dk.transpose() * c.x_hat1;
      g.bk += dk.colwise().sum().transpose();
      g.wv += dv.transpose() * c.x_hat1;
      g.bv += dv.colwise().sum().transpose();

      MatX<S> dxhat1 = dq * b.wq + dk * b.wk + dv * b.wv;
      dx = dx_mid + detail::layer_norm_backward(dxhat1, c.x_hat1, c.inv_std1,
                                                b.ln1_gamma, g.ln1_gamma,
                                                g.ln1_beta);
    }

    // Input assembly: row 0 is CLS, the rest are projected patches.
    grads.cls += dx.row(0).transpose();
    const Eigen::Index length = ws.patches.rows();
    grads.proj_w += dx.bottomRows(length).transpose() * ws.patches;
    grads.proj_b += dx.bottomRows(length).colwise().sum().transpose();
  }

 private:
  ModelOutput<S> encode(const MatX<S>& input, Workspace<S>* cache,
                        Workspace<S>* scratch) const {
    const int d = p_.config.embed_dim;
    if (input.cols() != d) {
      throw std::invalid_argument("forward: input dim != embed_dim");
    }
    const Eigen::Index t = input.rows();
    const int heads = p_.config.num_heads;
    const int dh = p_.config.head_dim();
    const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));

    if (cache != nullptr) {
      cache->blocks.resize(static_cast<std::size_t>(p_.config.num_blocks));
    }

    MatX<S> x = input;
    BlockCache<S> local;  // reused when not caching
    for (int bi = 0; bi < p_.config.num_blocks; ++bi) {
      const auto& b = p_.blocks[static_cast<std::size_t>(bi)];
      BlockCache<S>& c =
          cache != nullptr ? cache->blocks[static_cast<std::size_t>(bi)]
                           : local;
      c.x_in = x;

      MatX<S> y;
      detail::layer_norm(c.x_in, b.ln1_gamma, b.ln1_beta, c.x_hat1,
                         c.inv_std1, y);
      c.q = y * b.wq.transpose();
      c.q.rowwise() += b.bq.transpose();
      c.k = y * b.wk.transpose();
      c.k.rowwise() += b.bk.transpose();
      c.v = y * b.wv.transpose();
      c.v.rowwise() += b.bv.transpose();

      c.attn.assign(static_cast<std::size_t>(heads), MatX<S>());
      c.ctx.resize(t, d);
      for (int h = 0; h < heads; ++h) {
        const auto qh = c.q.middleCols(h * dh, dh);
        const auto kh = c.k.middleCols(h * dh, dh);
        const auto vh = c.v.middleCols(h * dh, dh);
        MatX<S>& a = c.attn[static_cast<std::size_t>(h)];
        a = scale * (qh * kh.transpose());
        detail::softmax_rows(a);
        c.ctx.middleCols(h * dh, dh) = a * vh;
      }
      MatX<S> attn_out = c.ctx * b.wo.transpose();
      attn_out.rowwise() += b.bo.transpose();
      c.x_mid = c.x_in + attn_out;

      detail::layer_norm(c.x_mid, b.ln2_gamma, b.ln2_beta, c.x_hat2,
                         c.inv_std2, y);
      c.z1 = y * b.ffn_w1.transpose();
      c.z1.rowwise() += b.ffn_b1.transpose();
      c.a1 = c.z1.cwiseMax(S(0));
      MatX<S> ffn_out = c.a1 * b.ffn_w2.transpose();
      ffn_out.rowwise() += b.ffn_b2.transpose();
      x = c.x_mid + ffn_out;

      if (!x.allFinite()) {
        throw NumericError("forward: non-finite activations in block " +
                           std::to_string(bi));
      }
    }

    Workspace<S>& ws = cache != nullptr ? *cache : *scratch;
    ws.final_in = x;
    MatX<S> y;
    detail::layer_norm(ws.final_in, p_.final_ln_gamma, p_.final_ln_beta,
                       ws.final_hat, ws.final_inv_std, y);
    ws.cls_out = y.row(0).transpose();

    ws.z1m = p_.mlp_w1 * ws.cls_out + p_.mlp_b1;
    ws.a1m = ws.z1m.cwiseMax(S(0));
    ws.z2m = p_.mlp_w2 * ws.a1m + p_.mlp_b2;

    ModelOutput<S>& out = ws.output;
    out.spatial_embedding = ws.z2m.cwiseMax(S(0));
    out.logits_az = p_.head_az * out.spatial_embedding + p_.head_az_b;
    out.logits_el = p_.head_el * out.spatial_embedding + p_.head_el_b;
    out.logits_dist = p_.head_dist * out.spatial_embedding + p_.head_dist_b;
    out.probs_az = detail::softmax_vec(out.logits_az);
    out.probs_el = detail::softmax_vec(out.logits_el);
    out.probs_dist = detail::softmax_vec(out.logits_dist);
    return out;
  }

  ModelParams<S> p_;
};

// Decoded estimate for one snippet. A head whose argmax lands on its
// no-speech slot contributes no value.
struct Prediction {
  std::optional<double> azimuth_deg;
  std::optional<double> elevation_deg;
  std::optional<double> distance_m;
  Eigen::VectorXf spatial_embedding;

  bool any_speech() const {
    return azimuth_deg.has_value() || elevation_deg.has_value() ||
           distance_m.has_value();
  }
};

template <typename S>
Prediction decode_output(const ModelOutput<S>& out, const LabelScheme& scheme) {
  Prediction pred;
  const auto argmax = [](const VecX<S>& v) {
    Eigen::Index idx = 0;
    v.maxCoeff(&idx);
    return static_cast<int>(idx);
  };
  const int ia = argmax(out.probs_az);
  if (ia < scheme.azimuth.bins()) pred.azimuth_deg = scheme.azimuth.value(ia);
  const int ie = argmax(out.probs_el);
  if (ie < scheme.elevation.bins()) {
    pred.elevation_deg = scheme.elevation.value(ie);
  }
  const int id = argmax(out.probs_dist);
  if (id < scheme.distance.bins()) {
    pred.distance_m = scheme.distance.value(id);
  }
  pred.spatial_embedding = out.spatial_embedding.template cast<float>();
  return pred;
}

// Assembles a snippet through the frontend and runs the model.
template <typename S>
Prediction predict(const Snippet& snippet, const MicArray& array,
                   const Model<S>& model, const LabelScheme& scheme,
                   FlattenOrder order = FlattenOrder::kFrameMajor) {
  const Eigen::MatrixXd input_d = assemble_input(
      snippet, array, model.params().proj_w.template cast<double>(),
      model.params().proj_b.template cast<double>(),
      model.params().cls.template cast<double>(), order);
  const ModelOutput<S> out = model.forward(input_d.template cast<S>());
  return decode_output(out, scheme);
}

}  // namespace phasecoder

#endif  // PHASECODER_MODEL_HPP_
