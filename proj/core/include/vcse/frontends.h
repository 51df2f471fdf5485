// core/include/vcse/frontends.h
//
// The learnable encoders/decoder: audio encoder/decoder (1-D conv pair),
// visual encoder (3-D conv front + per-frame residual CNN) and context
// encoder (five dilated 1-D conv blocks + linear).
//
// The audio encoder uses kernel 40 / stride 20 at 16 kHz, i.e. 800 latent
// frames per second -- an exact x32 multiple of the 25 fps video so frame
// level alignment is an integer upsampling.

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

#ifndef VCSE_FRONTENDS_H_
#define VCSE_FRONTENDS_H_

#include "vcse/io.h"
#include "vcse/layers.h"
#include "vcse/preset.h"

namespace vcse {
namespace frontends {

constexpr int kEncKernel = 40;
constexpr int kEncStride = 20;
constexpr int kLatentRate = kSampleRate / kEncStride;  // 800 frames/s

// Latent frame count for a waveform of `samples` samples: ceil(len/stride).
inline Eigen::Index LatentFrames(Eigen::Index samples) {
  return (samples + kEncStride - 1) / kEncStride;
}

// Wraps a waveform as a (1 x T) constant tensor.
nn::Tensor WaveTensor(const VecD& samples);

class AudioEncoder {
 public:
  explicit AudioEncoder(Rng& rng);
  // (1 x L) waveform -> (256 x ceil(L/20)) nonnegative latent.
  nn::Tensor Forward(const nn::Tensor& wave) const;
  void Params(const std::string& prefix, nn::ParamMap& out) const;

 private:
  nn::Conv1dLayer conv_;
};

class AudioDecoder {
 public:
  explicit AudioDecoder(Rng& rng);
  // (256 x T) masked latent -> (1 x T*20) waveform.
  nn::Tensor Forward(const nn::Tensor& latent) const;
  void Params(const std::string& prefix, nn::ParamMap& out) const;

 private:
  nn::ConvT1dLayer deconv_;
};

class VisualEncoder {
 public:
  VisualEncoder(const Preset& preset, Rng& rng);
  // Lip frames -> (256 x T_v * target_rate/25) embedding.
  nn::Tensor Forward(const LipSequence& lips, int target_frame_rate) const;
  void Params(const std::string& prefix, nn::ParamMap& out) const;

 private:
  nn::Tensor FrameStack(const LipSequence& lips) const;

  Preset preset_;
  std::vector<nn::Conv2dLayer> front_taps_;  // one 2-D kernel per temporal tap
  std::vector<nn::ResBlock2d> blocks_;
  nn::Linear proj_;
  int front_in_ = 0;  // spatial size after pre-pooling
};

class ContextEncoder {
 public:
  explicit ContextEncoder(Rng& rng);
  // (256 x T_c) phonetic features -> (256 x T_c * upsample) embedding.
  nn::Tensor Forward(const nn::Tensor& features, int upsample) const;
  static constexpr int kBlocks = 5;
  static constexpr int kReceptiveField = 1 + 4 * (1 + 2 + 4 + 8 + 16);  // 125
  void Params(const std::string& prefix, nn::ParamMap& out) const;

 private:
  std::vector<nn::Conv1dLayer> convs_;
  std::vector<nn::NormLayer> norms_;
  nn::Linear proj_;
};

}  // namespace frontends
}  // namespace vcse

#endif  // VCSE_FRONTENDS_H_
