// core/include/vcse/extractors.h
//
// Mask-based extraction modules and the variant matrix. A mask estimator is
// a Conv-TasNet style TCN fed with the mixture latent concatenated with the
// variant's reference streams; estimates are decoded from mask * x_e.

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

#ifndef VCSE_EXTRACTORS_H_
#define VCSE_EXTRACTORS_H_

#include <memory>
#include <optional>

#include "vcse/asr.h"
#include "vcse/frontends.h"

namespace vcse {
namespace extract {

enum class VariantKind { kPit, kAS, kAV, kAcOracle, kAvcOracle, kVcse, kVcsev };

VariantKind ParseVariant(const std::string& name);
std::string VariantName(VariantKind kind);
// Table-style reference taxonomy: "-", "A_S", "V", "C (Oracle)", ...
std::string ReferenceKind(VariantKind kind);
bool IsTwoStage(VariantKind kind);

struct VariantConfig {
  VariantKind kind = VariantKind::kVcse;
  bool toy_scale = false;
  uint64_t seed = 0;
  Preset preset() const { return toy_scale ? Preset::Toy() : Preset::Full(); }
};

// TCN over [x_e ; refs...]: bottleneck 1x1, repeats x blocks of dilated
// depthwise-separable convolutions, then a sigmoid 1x1 producing n_masks
// masks of 256 channels each.
class MaskEstimator {
 public:
  MaskEstimator(int n_refs, int n_masks, const Preset& preset, Rng& rng);
  // All inputs must share the frame count; output is (n_masks*256 x T),
  // values in [0, 1].
  nn::Tensor Forward(const nn::Tensor& x_e, const std::vector<nn::Tensor>& refs) const;
  int n_refs() const { return n_refs_; }
  int n_masks() const { return n_masks_; }
  void Params(const std::string& prefix, nn::ParamMap& out) const;

 private:
  int n_refs_, n_masks_;
  nn::NormLayer in_norm_;
  nn::Conv1dLayer bottleneck_;
  std::vector<nn::TcnBlock> blocks_;
  nn::Conv1dLayer mask_conv_;
};

// Audio encoder/decoder pair around a mask estimator. Reference latents are
// aligned to the mixture latent frame count (crop / repeat-last).
class ExtractionModule {
 public:
  ExtractionModule(int n_refs, int n_masks, const Preset& preset, Rng& rng);

  struct Result {
    std::vector<nn::Tensor> estimates;  // (1 x L) each
    nn::Tensor x_e;
    nn::Tensor mask;
  };
  // `same_encoder_wave`, when defined, is encoded with this module's own
  // audio encoder (shared weights with the mixture path) and prepended to
  // the reference list.
  Result Extract(const nn::Tensor& mixture, std::vector<nn::Tensor> refs,
                 const nn::Tensor& same_encoder_wave = {}) const;

  const frontends::AudioEncoder& encoder() const { return enc_; }
  const MaskEstimator& mask_estimator() const { return mask_est_; }
  void Params(const std::string& prefix, nn::ParamMap& out) const;

 private:
  frontends::AudioEncoder enc_;
  frontends::AudioDecoder dec_;
  MaskEstimator mask_est_;
};

enum class ContextSource { kNone, kCleanOracle, kPreExtracted };

// A full variant model: the components present depend on the kind.
class Model {
 public:
  explicit Model(const VariantConfig& cfg);

  struct Inputs {
    VecD mixture;
    const LipSequence* lips = nullptr;  // variants with visual reference
    const VecD* enrollment = nullptr;   // a_s
    const VecD* oracle_clean = nullptr; // oracle-context variants, stages 3
  };
  struct Outputs {
    std::vector<nn::Tensor> estimates;  // 1 estimate (2 for pit)
    nn::Tensor s_av;                    // two-stage variants
    nn::Tensor phonetic;                // c_t actually used
  };
  // `ablate_pre_extracted` zeroes the s_e^av stream feeding the AC mask
  // estimator (dataflow check; only meaningful for the vcse kind).
  Outputs Forward(const Inputs& in,
                  ContextSource context_source = ContextSource::kPreExtracted,
                  bool ablate_pre_extracted = false) const;

  const VariantConfig& config() const { return cfg_; }
  // Group names: "audio_visual", "asr", "audio_contextual".
  nn::ParamMap ParamsGroup(const std::string& group) const;
  nn::ParamMap AllParams() const;
  std::vector<std::string> Groups() const;

  // Component inventory (for structural tests).
  bool has_visual() const { return visual_ != nullptr; }
  bool has_asr() const { return asr_ != nullptr; }
  bool has_stage2() const { return stage2_ != nullptr; }
  const ExtractionModule& stage1() const { return *stage1_; }
  const ExtractionModule& stage2() const { return *stage2_; }
  const asr::AsrEncoder& asr_encoder() const { return *asr_; }

 private:
  // Phonetic features c_t from a waveform (mel frontend is a stop-gradient
  // boundary; the ASR encoder itself is differentiated through).
  nn::Tensor PhoneticFrom(const VecD& wave) const;

  VariantConfig cfg_;
  std::unique_ptr<frontends::VisualEncoder> visual_;
  std::unique_ptr<frontends::ContextEncoder> context_;
  std::unique_ptr<asr::AsrEncoder> asr_;
  std::unique_ptr<ExtractionModule> stage1_;
  std::unique_ptr<ExtractionModule> stage2_;
  nn::Linear spk_proj_;  // a_s speaker-embedding projection
};

std::unique_ptr<Model> BuildVariant(const VariantConfig& cfg);

}  // namespace extract
}  // namespace vcse

#endif  // VCSE_EXTRACTORS_H_
