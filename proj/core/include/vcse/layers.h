// core/include/vcse/layers.h
//
// Trainable layer building blocks over the op set. Parameters are collected
// into a flat (name -> Tensor) list; freezing toggles requires_grad on the
// underlying nodes, which also prunes the backward graph.

// Copyright 2026  The VCSE Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VCSE_LAYERS_H_
#define VCSE_LAYERS_H_

#include <string>
#include <utility>
#include <vector>

#include "vcse/ops.h"

namespace vcse {
namespace nn {

using ParamMap = std::vector<std::pair<std::string, Tensor>>;

inline void SetTrainable(ParamMap& params, bool trainable) {
  for (auto& [name, t] : params) t.set_requires_grad(trainable);
}

Mat InitNormal(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng);
// He init for a layer whose effective fan-in is `fan_in`.
Mat InitKaiming(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in, Rng& rng);

struct Linear {
  Tensor w, b;
  Linear() = default;
  Linear(Eigen::Index out, Eigen::Index in, Rng& rng);
  Tensor Forward(const Tensor& x) const;
  void Params(const std::string& prefix, ParamMap& out) const;
};

struct Conv1dLayer {
  Tensor w, b;
  int kernel = 1, stride = 1, dilation = 1, pad_left = 0, pad_right = 0, groups = 1;
  Conv1dLayer() = default;
  Conv1dLayer(Eigen::Index c_out, Eigen::Index c_in, int kernel, int stride,
              int dilation, int pad_left, int pad_right, int groups, Rng& rng);
  Tensor Forward(const Tensor& x) const;
  void Params(const std::string& prefix, ParamMap& out) const;
};

struct ConvT1dLayer {
  Tensor w;  // bias-free: an all-zero latent must decode to silence
  int kernel = 1, stride = 1;
  ConvT1dLayer() = default;
  ConvT1dLayer(Eigen::Index c_out, Eigen::Index c_in, int kernel, int stride, Rng& rng);
  Tensor Forward(const Tensor& x) const;
  void Params(const std::string& prefix, ParamMap& out) const;
};

struct Conv2dLayer {
  Tensor w, b;
  int c_in = 1, kernel = 3, stride = 1, pad = 1;
  Conv2dLayer() = default;
  Conv2dLayer(Eigen::Index c_out, int c_in, int kernel, int stride, int pad, Rng& rng);
  // `height`/`width` describe each input column's image.
  Tensor Forward(const Tensor& x, int height, int width) const;
  void Params(const std::string& prefix, ParamMap& out) const;
};

enum class NormKind { kGlobal, kChannel, kCol };

struct NormLayer {
  Tensor gamma, beta;
  NormKind kind = NormKind::kGlobal;
  NormLayer() = default;
  NormLayer(Eigen::Index channels, NormKind kind);
  Tensor Forward(const Tensor& x) const;
  void Params(const std::string& prefix, ParamMap& out) const;
};

// Conv-TasNet style dilated block: 1x1 up, depthwise k3, 1x1 down, residual.
struct TcnBlock {
  Conv1dLayer in_conv, dw_conv, out_conv;
  NormLayer norm1, norm2;
  TcnBlock() = default;
  TcnBlock(Eigen::Index bottleneck, Eigen::Index hidden, int dilation, Rng& rng);
  Tensor Forward(const Tensor& x) const;
  void Params(const std::string& prefix, ParamMap& out) const;
};

// Post-norm transformer encoder layer with multi-head self-attention.
struct TransformerLayer {
  Linear wq, wk, wv, wo, ff1, ff2;
  NormLayer norm1, norm2;
  int heads = 4;
  TransformerLayer() = default;
  TransformerLayer(Eigen::Index dim, int heads, Eigen::Index ff_dim, Rng& rng);
  Tensor Forward(const Tensor& x) const;
  void Params(const std::string& prefix, ParamMap& out) const;
};

// Basic 2-D residual block; `stride` > 1 downsamples (with a 1x1 projection
// shortcut, also used when channel counts change).
struct ResBlock2d {
  Conv2dLayer conv1, conv2, shortcut;
  NormLayer norm1, norm2;
  bool projected = false;
  int in_h = 0, in_w = 0;  // set per call
  ResBlock2d() = default;
  ResBlock2d(Eigen::Index c_out, Eigen::Index c_in, int stride, Rng& rng);
  Tensor Forward(const Tensor& x, int height, int width, int* out_h, int* out_w) const;
  void Params(const std::string& prefix, ParamMap& out) const;
};

}  // namespace nn
}  // namespace vcse

#endif  // VCSE_LAYERS_H_
