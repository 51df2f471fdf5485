// core/src/frontends.cc

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

#include "vcse/frontends.h"

namespace vcse {
namespace frontends {

nn::Tensor WaveTensor(const VecD& samples) {
  Check(samples.size() > 0, "WaveTensor: empty waveform");
  Mat m(1, samples.size());
  m.row(0) = samples.transpose().cast<Scalar>();
  return nn::Tensor(std::move(m));
}

AudioEncoder::AudioEncoder(Rng& rng)
    : conv_(kModelDim, 1, kEncKernel, kEncStride, 1, 0, 0, 1, rng) {}

nn::Tensor AudioEncoder::Forward(const nn::Tensor& wave) const {
  CheckShape(wave.rows() == 1, "AudioEncoder: expects (1 x L)");
  Check(wave.cols() > 0, "AudioEncoder: empty input");
  const Eigen::Index frames = LatentFrames(wave.cols());
  const Eigen::Index padded = (frames - 1) * kEncStride + kEncKernel;
  nn::Tensor x = nn::PadCols(wave, 0, padded - wave.cols());
  return nn::Relu(nn::Conv1d(x, conv_.w, conv_.b, kEncKernel, kEncStride, 1, 0, 0, 1));
}

void AudioEncoder::Params(const std::string& prefix, nn::ParamMap& out) const {
  conv_.Params(prefix + ".conv", out);
}

AudioDecoder::AudioDecoder(Rng& rng)
    : deconv_(1, kModelDim, kEncKernel, kEncStride, rng) {}

nn::Tensor AudioDecoder::Forward(const nn::Tensor& latent) const {
  CheckShape(latent.rows() == kModelDim, "AudioDecoder: wrong channel count");
  nn::Tensor full = deconv_.Forward(latent);
  // Encoder pads on the right only, so the first frames*stride samples line
  // up with the original waveform.
  return nn::CropCols(full, 0, latent.cols() * kEncStride);
}

void AudioDecoder::Params(const std::string& prefix, nn::ParamMap& out) const {
  deconv_.Params(prefix + ".deconv", out);
}

VisualEncoder::VisualEncoder(const Preset& preset, Rng& rng) : preset_(preset) {
  front_in_ = kLipSize / preset.visual_pool;
  const int c0 = preset.visual_front_channels;
  // 3-D conv front: temporal kernel 5 (stride 1, padding 2) realized as five
  // per-tap 2-D kernels summed over shifted frames; spatial kernel 7 stride 2.
  for (int tap = 0; tap < 5; ++tap) {
    front_taps_.emplace_back(c0, 1, 7, 2, 3, rng);
  }
  int ch = c0;
  for (size_t s = 0; s < preset.visual_stages.size(); ++s) {
    auto [out_ch, n_blocks] = preset.visual_stages[s];
    for (int b = 0; b < n_blocks; ++b) {
      const int stride = (b == 0 && s > 0) ? 2 : 1;
      blocks_.emplace_back(out_ch, ch, stride, rng);
      ch = out_ch;
    }
  }
  proj_ = nn::Linear(kModelDim, ch, rng);
}

nn::Tensor VisualEncoder::FrameStack(const LipSequence& lips) const {
  lips.Validate();
  const int p = preset_.visual_pool;
  const int hw = front_in_;
  Mat m(Eigen::Index(hw) * hw, lips.frames);
  for (int t = 0; t < lips.frames; ++t) {
    const uint8_t* f = lips.frame(t);
    for (int y = 0; y < hw; ++y) {
      for (int x = 0; x < hw; ++x) {
        double acc = 0;
        for (int dy = 0; dy < p; ++dy) {
          for (int dx = 0; dx < p; ++dx) {
            acc += f[(y * p + dy) * kLipSize + (x * p + dx)];
          }
        }
        m(Eigen::Index(y) * hw + x, t) = Scalar(acc / (255.0 * p * p));
      }
    }
  }
  return nn::Tensor(std::move(m));
}

nn::Tensor VisualEncoder::Forward(const LipSequence& lips, int target_frame_rate) const {
  Check(target_frame_rate % lips.fps == 0,
        "VisualEncoder: target rate must be an integer multiple of the video fps");
  nn::Tensor frames = FrameStack(lips);
  int h = front_in_, w = front_in_;
  // Temporal conv: y_t = sum_dt W_dt * x_{t+dt}, dt in [-2, 2].
  nn::Tensor front;
  for (int tap = 0; tap < 5; ++tap) {
    const int dt = tap - 2;
    nn::Tensor y = nn::ShiftCols(front_taps_[size_t(tap)].Forward(frames, h, w), -dt);
    front = front.defined() ? nn::Add(front, y) : y;
  }
  h = (h + 2 * 3 - 7) / 2 + 1;
  w = h;
  nn::Tensor x = nn::Relu(front);
  int ch = preset_.visual_front_channels;
  for (size_t b = 0; b < blocks_.size(); ++b) {
    int ho = 0, wo = 0;
    x = blocks_[b].Forward(x, h, w, &ho, &wo);
    h = ho;
    w = wo;
    ch = int(blocks_[b].conv2.w.rows());
  }
  nn::Tensor pooled = nn::SpatialMeanPool(x, ch, Eigen::Index(h) * w);
  nn::Tensor emb = proj_.Forward(pooled);
  return nn::UpsampleCols(emb, target_frame_rate / lips.fps);
}

void VisualEncoder::Params(const std::string& prefix, nn::ParamMap& out) const {
  for (size_t i = 0; i < front_taps_.size(); ++i) {
    front_taps_[i].Params(prefix + ".front" + std::to_string(i), out);
  }
  for (size_t i = 0; i < blocks_.size(); ++i) {
    blocks_[i].Params(prefix + ".block" + std::to_string(i), out);
  }
  proj_.Params(prefix + ".proj", out);
}

ContextEncoder::ContextEncoder(Rng& rng) {
  for (int d = 0; d < kBlocks; ++d) {
    const int dilation = 1 << d;
    const int pad = 2 * dilation;  // kernel 5: pad = dilation*(k-1)/2 per side
    convs_.emplace_back(kModelDim, kModelDim, 5, 1, dilation, pad, pad, 1, rng);
    norms_.emplace_back(kModelDim, nn::NormKind::kChannel);
  }
  proj_ = nn::Linear(kModelDim, kModelDim, rng);
}

nn::Tensor ContextEncoder::Forward(const nn::Tensor& features, int upsample) const {
  CheckShape(features.rows() == kModelDim, "ContextEncoder: wrong channel count");
  nn::Tensor x = features;
  for (int d = 0; d < kBlocks; ++d) {
    x = nn::Relu(norms_[size_t(d)].Forward(convs_[size_t(d)].Forward(x)));
  }
  x = proj_.Forward(x);
  return upsample > 1 ? nn::UpsampleCols(x, upsample) : x;
}

void ContextEncoder::Params(const std::string& prefix, nn::ParamMap& out) const {
  for (int d = 0; d < kBlocks; ++d) {
    convs_[size_t(d)].Params(prefix + ".conv" + std::to_string(d), out);
    norms_[size_t(d)].Params(prefix + ".norm" + std::to_string(d), out);
  }
  proj_.Params(prefix + ".proj", out);
}

}  // namespace frontends
}  // namespace vcse
