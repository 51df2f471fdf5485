// core/src/ops.cc

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

#include "vcse/ops.h"

#include <algorithm>
#include <cmath>

namespace vcse {
namespace nn {

namespace {
constexpr Scalar kNormEps = 1e-5f;
}  // namespace

GradStore Backward(const Tensor& root) {
  CheckShape(root.rows() == 1 && root.cols() == 1, "Backward: root must be scalar");
  GradStore gs;
  // Iterative post-order DFS for a deterministic topological order.
  std::vector<const Node*> topo;
  std::unordered_set<const Node*> visited;
  std::vector<std::pair<const Node*, size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [n, i] = stack.back();
    if (i < n->parents.size()) {
      const Node* p = n->parents[i++].get();
      if (p->requires_grad && visited.insert(p).second) {
        stack.emplace_back(p, 0);
      }
    } else {
      topo.push_back(n);
      stack.pop_back();
    }
  }
  gs.Accum(root.node().get(), 1, 1).setOnes();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const Node* n = *it;
    if (!n->backward) continue;
    const Mat* g = gs.Find(n);
    if (g != nullptr) n->backward(*g, gs);
  }
  // Keep leaf gradients only: intermediate nodes die with their graph, and a
  // store that outlives the graph (batch accumulation) must not key on them.
  for (const Node* n : topo) {
    if (n->backward) gs.Erase(n);
  }
  return gs;
}

Tensor MakeOp(Mat value, std::vector<Tensor> inputs,
              std::function<void(const Mat&, GradStore&)> backward) {
  Tensor out(std::move(value));
  if (AnyRequiresGrad(inputs)) {
    out.set_requires_grad(true);
    auto& node = *out.node();
    node.parents.reserve(inputs.size());
    for (auto& t : inputs) {
      if (t.requires_grad()) node.parents.push_back(t.node());
    }
    node.backward = std::move(backward);
  }
  return out;
}

namespace {

// Convenience: accumulate into input i's grad slot if it participates.
void AccumInto(const Tensor& t, const Mat& g, GradStore& gs) {
  if (t.requires_grad()) {
    gs.Accum(t.node().get(), t.rows(), t.cols()) += g;
  }
}

}  // namespace

Tensor Add(const Tensor& a, const Tensor& b) {
  CheckShape(a.rows() == b.rows() && a.cols() == b.cols(), "Add: shape mismatch");
  return MakeOp(a.value() + b.value(), {a, b}, [a, b](const Mat& g, GradStore& gs) {
    AccumInto(a, g, gs);
    AccumInto(b, g, gs);
  });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  CheckShape(a.rows() == b.rows() && a.cols() == b.cols(), "Sub: shape mismatch");
  return MakeOp(a.value() - b.value(), {a, b}, [a, b](const Mat& g, GradStore& gs) {
    AccumInto(a, g, gs);
    AccumInto(b, Mat(-g), gs);
  });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  CheckShape(a.rows() == b.rows() && a.cols() == b.cols(), "Mul: shape mismatch");
  return MakeOp(a.value().cwiseProduct(b.value()), {a, b},
                [a, b](const Mat& g, GradStore& gs) {
                  AccumInto(a, g.cwiseProduct(b.value()), gs);
                  AccumInto(b, g.cwiseProduct(a.value()), gs);
                });
}

Tensor Scale(const Tensor& a, Scalar s) {
  return MakeOp(a.value() * s, {a}, [a, s](const Mat& g, GradStore& gs) {
    AccumInto(a, Mat(g * s), gs);
  });
}

Tensor AddColBroadcast(const Tensor& x, const Tensor& bias) {
  CheckShape(bias.cols() == 1 && bias.rows() == x.rows(), "AddColBroadcast: bias shape");
  return MakeOp(x.value().colwise() + Vec(bias.value()), {x, bias},
                [x, bias](const Mat& g, GradStore& gs) {
                  AccumInto(x, g, gs);
                  AccumInto(bias, Mat(g.rowwise().sum()), gs);
                });
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  CheckShape(a.cols() == b.rows(), "MatMul: inner dims");
  return MakeOp(a.value() * b.value(), {a, b}, [a, b](const Mat& g, GradStore& gs) {
    AccumInto(a, Mat(g * b.value().transpose()), gs);
    AccumInto(b, Mat(a.value().transpose() * g), gs);
  });
}

Tensor MatMulTN(const Tensor& a, const Tensor& b) {
  CheckShape(a.rows() == b.rows(), "MatMulTN: inner dims");
  return MakeOp(a.value().transpose() * b.value(), {a, b},
                [a, b](const Mat& g, GradStore& gs) {
                  AccumInto(a, Mat(b.value() * g.transpose()), gs);
                  AccumInto(b, Mat(a.value() * g), gs);
                });
}

Tensor Transpose(const Tensor& a) {
  return MakeOp(a.value().transpose(), {a}, [a](const Mat& g, GradStore& gs) {
    AccumInto(a, Mat(g.transpose()), gs);
  });
}

Tensor Relu(const Tensor& x) {
  return MakeOp(x.value().cwiseMax(Scalar(0)), {x}, [x](const Mat& g, GradStore& gs) {
    AccumInto(x, Mat((x.value().array() > 0).cast<Scalar>() * g.array()), gs);
  });
}

Tensor Sigmoid(const Tensor& x) {
  Mat y = (1.0f / (1.0f + (-x.value().array()).exp())).matrix();
  return MakeOp(y, {x}, [x, y](const Mat& g, GradStore& gs) {
    AccumInto(x, Mat((y.array() * (1.0f - y.array()) * g.array()).matrix()), gs);
  });
}

Tensor SoftmaxCols(const Tensor& x) {
  Mat y = x.value();
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    auto col = y.col(c).array();
    col -= col.maxCoeff();
    col = col.exp();
    col /= col.sum();
  }
  return MakeOp(y, {x}, [x, y](const Mat& g, GradStore& gs) {
    Mat dx = y.cwiseProduct(g);
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> dots = dx.colwise().sum();
    dx.noalias() -= y * dots.asDiagonal();
    AccumInto(x, dx, gs);
  });
}

Tensor ConcatRows(const std::vector<Tensor>& parts) {
  Check(!parts.empty(), "ConcatRows: empty");
  Eigen::Index cols = parts[0].cols(), rows = 0;
  for (const auto& p : parts) {
    CheckShape(p.cols() == cols, "ConcatRows: column mismatch");
    rows += p.rows();
  }
  Mat y(rows, cols);
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    y.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return MakeOp(y, parts, [parts](const Mat& g, GradStore& gs) {
    Eigen::Index r = 0;
    for (const auto& p : parts) {
      AccumInto(p, Mat(g.middleRows(r, p.rows())), gs);
      r += p.rows();
    }
  });
}

Tensor SliceRows(const Tensor& x, Eigen::Index row0, Eigen::Index nrows) {
  CheckShape(row0 >= 0 && row0 + nrows <= x.rows(), "SliceRows: range");
  return MakeOp(x.value().middleRows(row0, nrows), {x},
                [x, row0, nrows](const Mat& g, GradStore& gs) {
                  if (!x.requires_grad()) return;
                  Mat& gx = gs.Accum(x.node().get(), x.rows(), x.cols());
                  gx.middleRows(row0, nrows) += g;
                });
}

Tensor PadCols(const Tensor& x, Eigen::Index left, Eigen::Index right) {
  Mat y = Mat::Zero(x.rows(), x.cols() + left + right);
  y.middleCols(left, x.cols()) = x.value();
  return MakeOp(y, {x}, [x, left](const Mat& g, GradStore& gs) {
    AccumInto(x, Mat(g.middleCols(left, x.cols())), gs);
  });
}

Tensor CropCols(const Tensor& x, Eigen::Index col0, Eigen::Index ncols) {
  CheckShape(col0 >= 0 && col0 + ncols <= x.cols(), "CropCols: range");
  return MakeOp(x.value().middleCols(col0, ncols), {x},
                [x, col0, ncols](const Mat& g, GradStore& gs) {
                  if (!x.requires_grad()) return;
                  Mat& gx = gs.Accum(x.node().get(), x.rows(), x.cols());
                  gx.middleCols(col0, ncols) += g;
                });
}

Tensor ShiftCols(const Tensor& x, Eigen::Index k) {
  Mat y = Mat::Zero(x.rows(), x.cols());
  const Eigen::Index n = x.cols();
  if (k >= 0) {
    if (k < n) y.rightCols(n - k) = x.value().leftCols(n - k);
  } else {
    if (-k < n) y.leftCols(n + k) = x.value().rightCols(n + k);
  }
  return MakeOp(y, {x}, [x, k, n](const Mat& g, GradStore& gs) {
    if (!x.requires_grad()) return;
    Mat& gx = gs.Accum(x.node().get(), x.rows(), x.cols());
    if (k >= 0) {
      if (k < n) gx.leftCols(n - k) += g.rightCols(n - k);
    } else {
      if (-k < n) gx.rightCols(n + k) += g.leftCols(n + k);
    }
  });
}

Tensor UpsampleCols(const Tensor& x, Eigen::Index factor) {
  Check(factor >= 1, "UpsampleCols: factor >= 1");
  Mat y(x.rows(), x.cols() * factor);
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index j = 0; j < factor; ++j) y.col(c * factor + j) = x.value().col(c);
  }
  return MakeOp(y, {x}, [x, factor](const Mat& g, GradStore& gs) {
    if (!x.requires_grad()) return;
    Mat& gx = gs.Accum(x.node().get(), x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      for (Eigen::Index j = 0; j < factor; ++j) gx.col(c) += g.col(c * factor + j);
    }
  });
}

Tensor MeanCols(const Tensor& x) {
  Mat y = x.value().rowwise().mean();
  return MakeOp(y, {x}, [x](const Mat& g, GradStore& gs) {
    AccumInto(x, Mat(g.replicate(1, x.cols()) / Scalar(x.cols())), gs);
  });
}

Tensor BroadcastCols(const Tensor& x, Eigen::Index n) {
  CheckShape(x.cols() == 1, "BroadcastCols: expects (C x 1)");
  return MakeOp(x.value().replicate(1, n), {x}, [x](const Mat& g, GradStore& gs) {
    AccumInto(x, Mat(g.rowwise().sum()), gs);
  });
}

// ---------------------------------------------------------------------------
// Convolutions
// ---------------------------------------------------------------------------

namespace {

// im2col for 1-D conv: (C x Tp) -> (C*k x T_out).
Mat Im2Col1d(const Mat& xp, int kernel, int stride, int dilation, Eigen::Index t_out) {
  const Eigen::Index c_in = xp.rows();
  Mat cols(c_in * kernel, t_out);
  for (int j = 0; j < kernel; ++j) {
    for (Eigen::Index t = 0; t < t_out; ++t) {
      cols.block(j * c_in, t, c_in, 1) = xp.col(t * stride + j * dilation);
    }
  }
  return cols;
}

void Col2Im1d(const Mat& cols, int kernel, int stride, int dilation, Mat& xp) {
  const Eigen::Index c_in = xp.rows();
  for (int j = 0; j < kernel; ++j) {
    for (Eigen::Index t = 0; t < cols.cols(); ++t) {
      xp.col(t * stride + j * dilation) += cols.block(j * c_in, t, c_in, 1);
    }
  }
}

}  // namespace

Tensor Conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              int kernel, int stride, int dilation, int pad_left, int pad_right,
              int groups) {
  const Eigen::Index c_in = x.rows();
  const Eigen::Index c_out = weight.rows();
  CheckShape(c_in % groups == 0 && c_out % groups == 0, "Conv1d: groups");
  const Eigen::Index cg_in = c_in / groups;
  CheckShape(weight.cols() == cg_in * kernel, "Conv1d: weight shape");
  const Eigen::Index tp = x.cols() + pad_left + pad_right;
  const Eigen::Index eff_k = Eigen::Index(kernel - 1) * dilation + 1;
  CheckShape(tp >= eff_k, "Conv1d: input shorter than kernel");
  const Eigen::Index t_out = (tp - eff_k) / stride + 1;

  Mat xp = Mat::Zero(c_in, tp);
  xp.middleCols(pad_left, x.cols()) = x.value();

  Mat y(c_out, t_out);
  const Eigen::Index cg_out = c_out / groups;
  if (kernel == 1 && stride == 1 && dilation == 1 && groups == 1) {
    y.noalias() = weight.value() * xp;
  } else if (groups == c_in && groups == c_out) {
    // depthwise
    for (Eigen::Index ch = 0; ch < c_in; ++ch) {
      for (Eigen::Index t = 0; t < t_out; ++t) {
        Scalar acc = 0;
        for (int j = 0; j < kernel; ++j) {
          acc += weight.value()(ch, j) * xp(ch, t * stride + j * dilation);
        }
        y(ch, t) = acc;
      }
    }
  } else {
    for (int g = 0; g < groups; ++g) {
      Mat cols = Im2Col1d(xp.middleRows(g * cg_in, cg_in), kernel, stride, dilation, t_out);
      y.middleRows(g * cg_out, cg_out).noalias() = weight.value().middleRows(g * cg_out, cg_out) * cols;
    }
  }
  if (bias.defined()) y.colwise() += Vec(bias.value());

  auto backward = [x, weight, bias, kernel, stride, dilation, pad_left, groups,
                   tp, t_out, cg_in, cg_out, c_in](const Mat& g, GradStore& gs) {
    Mat xp = Mat::Zero(c_in, tp);
    xp.middleCols(pad_left, x.cols()) = x.value();
    Mat gxp = Mat::Zero(c_in, tp);
    Mat gw = Mat::Zero(weight.rows(), weight.cols());
    if (kernel == 1 && stride == 1 && dilation == 1 && groups == 1) {
      gw.noalias() = g * xp.transpose();
      gxp.noalias() = weight.value().transpose() * g;
    } else if (groups == c_in && cg_out == 1) {
      for (Eigen::Index ch = 0; ch < c_in; ++ch) {
        for (Eigen::Index t = 0; t < t_out; ++t) {
          const Scalar go = g(ch, t);
          for (int j = 0; j < kernel; ++j) {
            gw(ch, j) += go * xp(ch, t * stride + j * dilation);
            gxp(ch, t * stride + j * dilation) += go * weight.value()(ch, j);
          }
        }
      }
    } else {
      for (int gi = 0; gi < groups; ++gi) {
        Mat cols = Im2Col1d(xp.middleRows(gi * cg_in, cg_in), kernel, stride, dilation, t_out);
        const auto gy = g.middleRows(gi * cg_out, cg_out);
        gw.middleRows(gi * cg_out, cg_out).noalias() = gy * cols.transpose();
        Mat gcols = weight.value().middleRows(gi * cg_out, cg_out).transpose() * gy;
        Mat gxg = Mat::Zero(cg_in, tp);
        Col2Im1d(gcols, kernel, stride, dilation, gxg);
        gxp.middleRows(gi * cg_in, cg_in) += gxg;
      }
    }
    AccumInto(x, Mat(gxp.middleCols(pad_left, x.cols())), gs);
    AccumInto(weight, gw, gs);
    if (bias.defined()) AccumInto(bias, Mat(g.rowwise().sum()), gs);
  };

  std::vector<Tensor> inputs = {x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return MakeOp(std::move(y), std::move(inputs), std::move(backward));
}

Tensor ConvTranspose1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
                       int kernel, int stride) {
  const Eigen::Index c_in = x.rows();
  CheckShape(weight.cols() == c_in, "ConvTranspose1d: weight cols");
  CheckShape(weight.rows() % kernel == 0, "ConvTranspose1d: weight rows");
  const Eigen::Index c_out = weight.rows() / kernel;
  const Eigen::Index t_in = x.cols();
  const Eigen::Index t_out = (t_in - 1) * stride + kernel;

  Mat cols = weight.value() * x.value();  // (C_out*k x T_in)
  Mat y = Mat::Zero(c_out, t_out);
  for (Eigen::Index t = 0; t < t_in; ++t) {
    for (int j = 0; j < kernel; ++j) {
      y.col(t * stride + j) += cols.block(Eigen::Index(j) * c_out, t, c_out, 1);
    }
  }
  if (bias.defined()) y.colwise() += Vec(bias.value());

  auto backward = [x, weight, bias, kernel, stride, c_out, t_in](const Mat& g,
                                                                 GradStore& gs) {
    Mat gcols(Eigen::Index(kernel) * c_out, t_in);
    for (Eigen::Index t = 0; t < t_in; ++t) {
      for (int j = 0; j < kernel; ++j) {
        gcols.block(Eigen::Index(j) * c_out, t, c_out, 1) = g.col(t * stride + j);
      }
    }
    AccumInto(weight, Mat(gcols * x.value().transpose()), gs);
    AccumInto(x, Mat(weight.value().transpose() * gcols), gs);
    if (bias.defined()) AccumInto(bias, Mat(g.rowwise().sum()), gs);
  };

  std::vector<Tensor> inputs = {x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return MakeOp(std::move(y), std::move(inputs), std::move(backward));
}

namespace {

// im2col for one image column: (C*H*W) -> (C*k*k x Ho*Wo).
void Im2Col2d(const Vec& img, int c_in, int h, int w, int kernel, int stride,
              int pad, int ho, int wo, Eigen::Ref<Mat> cols) {
  for (int c = 0; c < c_in; ++c) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const int row = (c * kernel + ky) * kernel + kx;
        for (int yo = 0; yo < ho; ++yo) {
          const int yi = yo * stride + ky - pad;
          for (int xo = 0; xo < wo; ++xo) {
            const int xi = xo * stride + kx - pad;
            Scalar v = 0;
            if (yi >= 0 && yi < h && xi >= 0 && xi < w) {
              v = img[Eigen::Index(c) * h * w + Eigen::Index(yi) * w + xi];
            }
            cols(row, Eigen::Index(yo) * wo + xo) = v;
          }
        }
      }
    }
  }
}

void Col2Im2d(const Mat& cols, int c_in, int h, int w, int kernel, int stride,
              int pad, int ho, int wo, Eigen::Ref<Vec> img) {
  for (int c = 0; c < c_in; ++c) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const int row = (c * kernel + ky) * kernel + kx;
        for (int yo = 0; yo < ho; ++yo) {
          const int yi = yo * stride + ky - pad;
          if (yi < 0 || yi >= h) continue;
          for (int xo = 0; xo < wo; ++xo) {
            const int xi = xo * stride + kx - pad;
            if (xi < 0 || xi >= w) continue;
            img[Eigen::Index(c) * h * w + Eigen::Index(yi) * w + xi] +=
                cols(row, Eigen::Index(yo) * wo + xo);
          }
        }
      }
    }
  }
}

}  // namespace

Tensor Conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              int c_in, int height, int width, int kernel, int stride, int pad) {
  CheckShape(x.rows() == Eigen::Index(c_in) * height * width, "Conv2d: input rows");
  CheckShape(weight.cols() == Eigen::Index(c_in) * kernel * kernel, "Conv2d: weight shape");
  const Eigen::Index c_out = weight.rows();
  const int ho = (height + 2 * pad - kernel) / stride + 1;
  const int wo = (width + 2 * pad - kernel) / stride + 1;
  const Eigen::Index t = x.cols();

  Mat y(c_out * ho * wo, t);
  Mat cols(Eigen::Index(c_in) * kernel * kernel, Eigen::Index(ho) * wo);
  for (Eigen::Index f = 0; f < t; ++f) {
    Im2Col2d(Vec(x.value().col(f)), c_in, height, width, kernel, stride, pad, ho, wo, cols);
    Mat yf = weight.value() * cols;  // (C_out x Ho*Wo)
    if (bias.defined()) yf.colwise() += Vec(bias.value());
    // yf is column-major; the flat layout is c*(Ho*Wo)+pixel, so transpose
    // first (column c of yt is channel c's plane).
    Mat yt = yf.transpose();
    y.col(f) = Eigen::Map<const Vec>(yt.data(), yt.size());
  }

  auto backward = [x, weight, bias, c_in, height, width, kernel, stride, pad, ho,
                   wo, c_out](const Mat& g, GradStore& gs) {
    Mat gw = Mat::Zero(weight.rows(), weight.cols());
    Mat gx = Mat::Zero(x.rows(), x.cols());
    Vec gb = Vec::Zero(c_out);
    Mat cols(Eigen::Index(c_in) * kernel * kernel, Eigen::Index(ho) * wo);
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
      // Un-flatten grad for this frame back to (C_out x Ho*Wo).
      Eigen::Map<const Mat> gt(g.col(f).data(), Eigen::Index(ho) * wo, c_out);
      Mat gyf = gt.transpose();
      Im2Col2d(Vec(x.value().col(f)), c_in, height, width, kernel, stride, pad, ho, wo, cols);
      gw.noalias() += gyf * cols.transpose();
      if (bias.defined()) gb += gyf.rowwise().sum();
      Mat gcols = weight.value().transpose() * gyf;
      Vec gimg = Vec::Zero(x.rows());
      Col2Im2d(gcols, c_in, height, width, kernel, stride, pad, ho, wo, gimg);
      gx.col(f) = gimg;
    }
    AccumInto(x, gx, gs);
    AccumInto(weight, gw, gs);
    if (bias.defined()) AccumInto(bias, Mat(gb), gs);
  };

  std::vector<Tensor> inputs = {x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return MakeOp(std::move(y), std::move(inputs), std::move(backward));
}

Tensor SpatialMeanPool(const Tensor& x, Eigen::Index c, Eigen::Index hw) {
  CheckShape(x.rows() == c * hw, "SpatialMeanPool: rows");
  Mat y(c, x.cols());
  for (Eigen::Index ch = 0; ch < c; ++ch) {
    y.row(ch) = x.value().middleRows(ch * hw, hw).colwise().mean();
  }
  return MakeOp(y, {x}, [x, c, hw](const Mat& g, GradStore& gs) {
    if (!x.requires_grad()) return;
    Mat& gx = gs.Accum(x.node().get(), x.rows(), x.cols());
    const Scalar inv = Scalar(1) / Scalar(hw);
    for (Eigen::Index ch = 0; ch < c; ++ch) {
      gx.middleRows(ch * hw, hw) += (g.row(ch) * inv).replicate(hw, 1);
    }
  });
}

// ---------------------------------------------------------------------------
// Normalizations
// ---------------------------------------------------------------------------

namespace {

// Shared layer-norm style backward over a flat block of n elements:
// dx = (dxh - mean(dxh) - xh * mean(dxh .* xh)) / sigma.
template <typename XH, typename DXH, typename OutBlock>
void NormBackwardBlock(const XH& xh, const DXH& dxh, Scalar inv_sigma, OutBlock&& out) {
  const Scalar n = Scalar(xh.size());
  const Scalar m1 = dxh.sum() / n;
  const Scalar m2 = (dxh * xh).sum() / n;
  out += ((dxh - m1 - xh * m2) * inv_sigma).matrix();
}

}  // namespace

Tensor GlobalNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta) {
  CheckShape(gamma.rows() == x.rows() && gamma.cols() == 1, "GlobalNorm: gamma");
  const Scalar mean = x.value().mean();
  const Scalar var = (x.value().array() - mean).square().mean();
  const Scalar inv_sigma = Scalar(1) / std::sqrt(var + kNormEps);
  Mat xh = ((x.value().array() - mean) * inv_sigma).matrix();
  Mat y = (xh.array().colwise() * Vec(gamma.value()).array()).matrix();
  y.colwise() += Vec(beta.value());
  return MakeOp(y, {x, gamma, beta},
                [x, gamma, beta, xh, inv_sigma](const Mat& g, GradStore& gs) {
                  Mat dxh = (g.array().colwise() * Vec(gamma.value()).array()).matrix();
                  if (x.requires_grad()) {
                    Mat& gx = gs.Accum(x.node().get(), x.rows(), x.cols());
                    NormBackwardBlock(xh.array(), dxh.array(), inv_sigma, gx);
                  }
                  AccumInto(gamma, Mat(g.cwiseProduct(xh).rowwise().sum()), gs);
                  AccumInto(beta, Mat(g.rowwise().sum()), gs);
                });
}

Tensor ChannelNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta) {
  const Eigen::Index c = gamma.rows();
  CheckShape(gamma.cols() == 1 && x.rows() % c == 0, "ChannelNorm: gamma");
  const Eigen::Index group = x.rows() / c;
  Mat xh(x.rows(), x.cols());
  Vec inv_sigma(c);
  for (Eigen::Index ch = 0; ch < c; ++ch) {
    auto blk = x.value().middleRows(ch * group, group).array();
    const Scalar mean = blk.mean();
    const Scalar var = (blk - mean).square().mean();
    inv_sigma[ch] = Scalar(1) / std::sqrt(var + kNormEps);
    xh.middleRows(ch * group, group) = ((blk - mean) * inv_sigma[ch]).matrix();
  }
  Mat y(x.rows(), x.cols());
  for (Eigen::Index ch = 0; ch < c; ++ch) {
    y.middleRows(ch * group, group) =
        (xh.middleRows(ch * group, group).array() * gamma.value()(ch, 0) +
         beta.value()(ch, 0))
            .matrix();
  }
  return MakeOp(y, {x, gamma, beta},
                [x, gamma, beta, xh, inv_sigma, c, group](const Mat& g, GradStore& gs) {
                  Mat* gx = nullptr;
                  if (x.requires_grad()) gx = &gs.Accum(x.node().get(), x.rows(), x.cols());
                  Vec ggamma = Vec::Zero(c), gbeta = Vec::Zero(c);
                  for (Eigen::Index ch = 0; ch < c; ++ch) {
                    auto xhb = xh.middleRows(ch * group, group).array();
                    auto gb = g.middleRows(ch * group, group).array();
                    ggamma[ch] = (gb * xhb).sum();
                    gbeta[ch] = gb.sum();
                    if (gx != nullptr) {
                      auto dxh = gb * gamma.value()(ch, 0);
                      NormBackwardBlock(xhb, dxh, inv_sigma[ch],
                                        gx->middleRows(ch * group, group));
                    }
                  }
                  AccumInto(gamma, Mat(ggamma), gs);
                  AccumInto(beta, Mat(gbeta), gs);
                });
}

Tensor ColNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta) {
  CheckShape(gamma.rows() == x.rows() && gamma.cols() == 1, "ColNorm: gamma");
  Mat xh(x.rows(), x.cols());
  Vec inv_sigma(x.cols());
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    auto col = x.value().col(t).array();
    const Scalar mean = col.mean();
    const Scalar var = (col - mean).square().mean();
    inv_sigma[t] = Scalar(1) / std::sqrt(var + kNormEps);
    xh.col(t) = ((col - mean) * inv_sigma[t]).matrix();
  }
  Mat y = (xh.array().colwise() * Vec(gamma.value()).array()).matrix();
  y.colwise() += Vec(beta.value());
  return MakeOp(y, {x, gamma, beta},
                [x, gamma, beta, xh, inv_sigma](const Mat& g, GradStore& gs) {
                  Mat dxh = (g.array().colwise() * Vec(gamma.value()).array()).matrix();
                  if (x.requires_grad()) {
                    Mat& gx = gs.Accum(x.node().get(), x.rows(), x.cols());
                    for (Eigen::Index t = 0; t < x.cols(); ++t) {
                      NormBackwardBlock(xh.col(t).array(), dxh.col(t).array(),
                                        inv_sigma[t], gx.col(t));
                    }
                  }
                  AccumInto(gamma, Mat(g.cwiseProduct(xh).rowwise().sum()), gs);
                  AccumInto(beta, Mat(g.rowwise().sum()), gs);
                });
}

}  // namespace nn
}  // namespace vcse
