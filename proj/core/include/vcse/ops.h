// core/include/vcse/ops.h
//
// Primitive differentiable ops. Tensors are (channels x frames) matrices;
// convolutions run along the frame axis. Every op here has a hand-written
// backward that is finite-difference checked in tests/test_tensor.cc.

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

#ifndef VCSE_OPS_H_
#define VCSE_OPS_H_

#include <vector>

#include "vcse/tensor.h"

namespace vcse {
namespace nn {

Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor Scale(const Tensor& a, Scalar s);
// Adds a (C x 1) bias to every column.
Tensor AddColBroadcast(const Tensor& x, const Tensor& bias);

Tensor MatMul(const Tensor& a, const Tensor& b);    // a * b
Tensor MatMulTN(const Tensor& a, const Tensor& b);  // a^T * b
Tensor Transpose(const Tensor& a);

Tensor Relu(const Tensor& x);
Tensor Sigmoid(const Tensor& x);
Tensor SoftmaxCols(const Tensor& x);

Tensor ConcatRows(const std::vector<Tensor>& parts);
Tensor SliceRows(const Tensor& x, Eigen::Index row0, Eigen::Index nrows);
Tensor PadCols(const Tensor& x, Eigen::Index left, Eigen::Index right);
Tensor CropCols(const Tensor& x, Eigen::Index col0, Eigen::Index ncols);
// Temporal shift by k frames (positive = delay), zero-filled.
Tensor ShiftCols(const Tensor& x, Eigen::Index k);
// Nearest-frame repetition: each column duplicated `factor` times.
Tensor UpsampleCols(const Tensor& x, Eigen::Index factor);
Tensor MeanCols(const Tensor& x);                       // (C x T) -> (C x 1)
Tensor BroadcastCols(const Tensor& x, Eigen::Index n);  // (C x 1) -> (C x n)

// 1-D convolution along frames. weight is (C_out x (C_in/groups)*kernel),
// bias (C_out x 1) or undefined for bias-free.
Tensor Conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              int kernel, int stride, int dilation, int pad_left, int pad_right,
              int groups = 1);

// Transposed 1-D convolution: (C_in x T) -> (C_out x (T-1)*stride + kernel).
// weight is (C_out*kernel x C_in).
Tensor ConvTranspose1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
                       int kernel, int stride);

// 2-D convolution applied independently to each column, which encodes a
// (C_in x H x W) image flattened as c*(H*W) + y*W + x. weight is
// (C_out x C_in*kernel*kernel), square kernel, symmetric padding.
Tensor Conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              int c_in, int height, int width, int kernel, int stride, int pad);

// Mean over the spatial extent of each channel: (C*HW x T) -> (C x T).
Tensor SpatialMeanPool(const Tensor& x, Eigen::Index c, Eigen::Index hw);

// Normalizations; `gamma`/`beta` are per-channel (C x 1) affine parameters.
// GlobalNorm: one mean/var over the whole (C x T) tensor (Conv-TasNet gLN).
// ChannelNorm: mean/var per channel group over its rows and all frames; for a
//   plain (C x T) tensor the group size is 1 row, for image tensors it is HW.
// ColNorm: mean/var per column across channels (transformer layer norm).
Tensor GlobalNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta);
Tensor ChannelNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta);
Tensor ColNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta);

}  // namespace nn
}  // namespace vcse

#endif  // VCSE_OPS_H_
