// core/include/vcse/asr.h
//
// E2EASR: 80-bin log-mel frontend, 2 strided conv layers (x4 temporal
// subsampling), sinusoidal positions, transformer encoder and a CTC head.
// The phonetic features c_t consumed downstream are the encoder outputs
// (pre-CTC-projection), 256 channels at ~25 frames/s.

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

#ifndef VCSE_ASR_H_
#define VCSE_ASR_H_

#include <filesystem>
#include <string>
#include <vector>

#include "vcse/layers.h"
#include "vcse/preset.h"
#include "vcse/signals.h"

namespace vcse {

struct PhoneticFeatures {
  Mat data;  // 256 x T_c
  double feature_rate = 25.0;
};

namespace asr {

constexpr int kMelBins = 80;
constexpr int kWinSamples = 400;  // 25 ms
constexpr int kHopSamples = 160;  // 10 ms
constexpr int kSubsampling = 4;
constexpr double kMinInputSeconds = 0.2;

// Character vocabulary: blank, A..Z, space, apostrophe.
class Vocabulary {
 public:
  static constexpr int kBlank = 0;
  Vocabulary();
  int size() const { return int(tokens_.size()); }
  std::vector<int> Encode(const std::string& text) const;
  std::string Decode(const std::vector<int>& ids) const;
  // One token per line, line index = id, line 0 = blank.
  void Save(const std::filesystem::path& path) const;
  static Vocabulary Load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
};

// Uppercases and strips everything outside [A-Z '], squeezing spaces.
std::string NormalizeTranscript(const std::string& text);

// 80 x T log-mel spectrogram; T = ceil(len / 160) (center padded).
Mat MelSpectrogram(const VecD& samples);

class AsrEncoder {
 public:
  AsrEncoder(const Preset& preset, Rng& rng);

  // Waveform -> phonetic features (256 x ceil(T_mel/4)). Throws on inputs
  // shorter than 0.2 s.
  nn::Tensor Encode(const VecD& samples) const;
  nn::Tensor EncodeFeatures(const nn::Tensor& mel) const;
  // CTC head: features -> (V x T) logits.
  nn::Tensor Logits(const nn::Tensor& features) const;

  const Vocabulary& vocab() const { return vocab_; }
  void Params(const std::string& prefix, nn::ParamMap& out) const;

 private:
  Vocabulary vocab_;
  nn::Conv1dLayer sub1_, sub2_;
  std::vector<nn::TransformerLayer> layers_;
  nn::Linear head_;
};

// CTC negative log-likelihood of `target` (no blanks) given (V x T) logits.
// Differentiable; internals run in double. Throws if the target cannot be
// aligned within T frames.
nn::Tensor CtcLoss(const nn::Tensor& logits, const std::vector<int>& target);

// Per-frame argmax, collapse repeats, drop blanks.
std::vector<int> GreedyDecode(const Mat& logits);

// Levenshtein distance / reference length.
double CharacterErrorRate(const std::vector<int>& ref, const std::vector<int>& hyp);

}  // namespace asr
}  // namespace vcse

#endif  // VCSE_ASR_H_
