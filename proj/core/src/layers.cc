// core/src/layers.cc

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

#include "vcse/layers.h"

#include <cmath>

namespace vcse {
namespace nn {

Mat InitNormal(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Mat m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = Scalar(dist(rng));
  }
  return m;
}

Mat InitKaiming(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in, Rng& rng) {
  return InitNormal(rows, cols, std::sqrt(2.0 / double(fan_in)), rng);
}

Linear::Linear(Eigen::Index out, Eigen::Index in, Rng& rng)
    : w(InitKaiming(out, in, in, rng), true), b(Mat::Zero(out, 1), true) {}

Tensor Linear::Forward(const Tensor& x) const {
  return AddColBroadcast(MatMul(w, x), b);
}

void Linear::Params(const std::string& prefix, ParamMap& out) const {
  out.emplace_back(prefix + ".w", w);
  out.emplace_back(prefix + ".b", b);
}

Conv1dLayer::Conv1dLayer(Eigen::Index c_out, Eigen::Index c_in, int kernel,
                         int stride, int dilation, int pad_left, int pad_right,
                         int groups, Rng& rng)
    : w(InitKaiming(c_out, (c_in / groups) * kernel, (c_in / groups) * kernel, rng), true),
      b(Mat::Zero(c_out, 1), true),
      kernel(kernel),
      stride(stride),
      dilation(dilation),
      pad_left(pad_left),
      pad_right(pad_right),
      groups(groups) {}

Tensor Conv1dLayer::Forward(const Tensor& x) const {
  return Conv1d(x, w, b, kernel, stride, dilation, pad_left, pad_right, groups);
}

void Conv1dLayer::Params(const std::string& prefix, ParamMap& out) const {
  out.emplace_back(prefix + ".w", w);
  out.emplace_back(prefix + ".b", b);
}

ConvT1dLayer::ConvT1dLayer(Eigen::Index c_out, Eigen::Index c_in, int kernel,
                           int stride, Rng& rng)
    : w(InitKaiming(c_out * kernel, c_in, c_in, rng), true), kernel(kernel), stride(stride) {}

Tensor ConvT1dLayer::Forward(const Tensor& x) const {
  return ConvTranspose1d(x, w, Tensor(), kernel, stride);
}

void ConvT1dLayer::Params(const std::string& prefix, ParamMap& out) const {
  out.emplace_back(prefix + ".w", w);
}

Conv2dLayer::Conv2dLayer(Eigen::Index c_out, int c_in, int kernel, int stride,
                         int pad, Rng& rng)
    : w(InitKaiming(c_out, Eigen::Index(c_in) * kernel * kernel,
                    Eigen::Index(c_in) * kernel * kernel, rng),
        true),
      b(Mat::Zero(c_out, 1), true),
      c_in(c_in),
      kernel(kernel),
      stride(stride),
      pad(pad) {}

Tensor Conv2dLayer::Forward(const Tensor& x, int height, int width) const {
  return Conv2d(x, w, b, c_in, height, width, kernel, stride, pad);
}

void Conv2dLayer::Params(const std::string& prefix, ParamMap& out) const {
  out.emplace_back(prefix + ".w", w);
  out.emplace_back(prefix + ".b", b);
}

NormLayer::NormLayer(Eigen::Index channels, NormKind kind)
    : gamma(Mat::Ones(channels, 1), true), beta(Mat::Zero(channels, 1), true), kind(kind) {}

Tensor NormLayer::Forward(const Tensor& x) const {
  switch (kind) {
    case NormKind::kGlobal:
      return GlobalNorm(x, gamma, beta);
    case NormKind::kChannel:
      return ChannelNorm(x, gamma, beta);
    case NormKind::kCol:
      return ColNorm(x, gamma, beta);
  }
  throw VcseError("NormLayer: bad kind");
}

void NormLayer::Params(const std::string& prefix, ParamMap& out) const {
  out.emplace_back(prefix + ".gamma", gamma);
  out.emplace_back(prefix + ".beta", beta);
}

TcnBlock::TcnBlock(Eigen::Index bottleneck, Eigen::Index hidden, int dilation, Rng& rng)
    : in_conv(hidden, bottleneck, 1, 1, 1, 0, 0, 1, rng),
      dw_conv(hidden, hidden, 3, 1, dilation, dilation, dilation, int(hidden), rng),
      out_conv(bottleneck, hidden, 1, 1, 1, 0, 0, 1, rng),
      norm1(hidden, NormKind::kGlobal),
      norm2(hidden, NormKind::kGlobal) {}

Tensor TcnBlock::Forward(const Tensor& x) const {
  Tensor h = norm1.Forward(Relu(in_conv.Forward(x)));
  h = norm2.Forward(Relu(dw_conv.Forward(h)));
  return Add(x, out_conv.Forward(h));
}

void TcnBlock::Params(const std::string& prefix, ParamMap& out) const {
  in_conv.Params(prefix + ".in", out);
  dw_conv.Params(prefix + ".dw", out);
  out_conv.Params(prefix + ".out", out);
  norm1.Params(prefix + ".norm1", out);
  norm2.Params(prefix + ".norm2", out);
}

TransformerLayer::TransformerLayer(Eigen::Index dim, int heads, Eigen::Index ff_dim, Rng& rng)
    : wq(dim, dim, rng),
      wk(dim, dim, rng),
      wv(dim, dim, rng),
      wo(dim, dim, rng),
      ff1(ff_dim, dim, rng),
      ff2(dim, ff_dim, rng),
      norm1(dim, NormKind::kCol),
      norm2(dim, NormKind::kCol),
      heads(heads) {}

Tensor TransformerLayer::Forward(const Tensor& x) const {
  const Eigen::Index dim = x.rows();
  const Eigen::Index head_dim = dim / heads;
  Tensor q = wq.Forward(x), k = wk.Forward(x), v = wv.Forward(x);
  std::vector<Tensor> head_outs;
  head_outs.reserve(size_t(heads));
  const Scalar scale = Scalar(1.0 / std::sqrt(double(head_dim)));
  for (int h = 0; h < heads; ++h) {
    Tensor qh = SliceRows(q, h * head_dim, head_dim);
    Tensor kh = SliceRows(k, h * head_dim, head_dim);
    Tensor vh = SliceRows(v, h * head_dim, head_dim);
    // scores(t_key, t_query); softmax over keys = over rows of each column.
    Tensor scores = Scale(MatMulTN(kh, qh), scale);
    Tensor attn = SoftmaxCols(scores);
    head_outs.push_back(MatMul(vh, attn));
  }
  Tensor attn_out = wo.Forward(ConcatRows(head_outs));
  Tensor y = norm1.Forward(Add(x, attn_out));
  Tensor ff = ff2.Forward(Relu(ff1.Forward(y)));
  return norm2.Forward(Add(y, ff));
}

void TransformerLayer::Params(const std::string& prefix, ParamMap& out) const {
  wq.Params(prefix + ".wq", out);
  wk.Params(prefix + ".wk", out);
  wv.Params(prefix + ".wv", out);
  wo.Params(prefix + ".wo", out);
  ff1.Params(prefix + ".ff1", out);
  ff2.Params(prefix + ".ff2", out);
  norm1.Params(prefix + ".norm1", out);
  norm2.Params(prefix + ".norm2", out);
}

ResBlock2d::ResBlock2d(Eigen::Index c_out, Eigen::Index c_in, int stride, Rng& rng)
    : conv1(c_out, int(c_in), 3, stride, 1, rng),
      conv2(c_out, int(c_out), 3, 1, 1, rng),
      norm1(c_out, NormKind::kChannel),
      norm2(c_out, NormKind::kChannel),
      projected(stride != 1 || c_in != c_out) {
  if (projected) shortcut = Conv2dLayer(c_out, int(c_in), 1, stride, 0, rng);
}

Tensor ResBlock2d::Forward(const Tensor& x, int height, int width, int* out_h,
                           int* out_w) const {
  const int ho = (height + 2 * conv1.pad - conv1.kernel) / conv1.stride + 1;
  const int wo = (width + 2 * conv1.pad - conv1.kernel) / conv1.stride + 1;
  Tensor h = Relu(norm1.Forward(conv1.Forward(x, height, width)));
  h = norm2.Forward(conv2.Forward(h, ho, wo));
  Tensor skip = projected ? shortcut.Forward(x, height, width) : x;
  if (out_h != nullptr) *out_h = ho;
  if (out_w != nullptr) *out_w = wo;
  return Relu(Add(h, skip));
}

void ResBlock2d::Params(const std::string& prefix, ParamMap& out) const {
  conv1.Params(prefix + ".conv1", out);
  conv2.Params(prefix + ".conv2", out);
  if (projected) shortcut.Params(prefix + ".shortcut", out);
  norm1.Params(prefix + ".norm1", out);
  norm2.Params(prefix + ".norm2", out);
}

}  // namespace nn
}  // namespace vcse
