// core/src/extractors.cc

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

#include "vcse/extractors.h"

namespace vcse {
namespace extract {

VariantKind ParseVariant(const std::string& name) {
  if (name == "pit") return VariantKind::kPit;
  if (name == "a_s") return VariantKind::kAS;
  if (name == "av") return VariantKind::kAV;
  if (name == "ac_oracle") return VariantKind::kAcOracle;
  if (name == "avc_oracle") return VariantKind::kAvcOracle;
  if (name == "vcse") return VariantKind::kVcse;
  if (name == "vcsev") return VariantKind::kVcsev;
  throw VcseError("unknown variant kind: " + name);
}

std::string VariantName(VariantKind kind) {
  switch (kind) {
    case VariantKind::kPit: return "pit";
    case VariantKind::kAS: return "a_s";
    case VariantKind::kAV: return "av";
    case VariantKind::kAcOracle: return "ac_oracle";
    case VariantKind::kAvcOracle: return "avc_oracle";
    case VariantKind::kVcse: return "vcse";
    case VariantKind::kVcsev: return "vcsev";
  }
  throw VcseError("unknown variant kind");
}

std::string ReferenceKind(VariantKind kind) {
  switch (kind) {
    case VariantKind::kPit: return "-";
    case VariantKind::kAS: return "A_S";
    case VariantKind::kAV: return "V";
    case VariantKind::kAcOracle: return "C (Oracle)";
    case VariantKind::kAvcOracle: return "V+C (Oracle)";
    case VariantKind::kVcse:
    case VariantKind::kVcsev: return "V+C";
  }
  throw VcseError("unknown variant kind");
}

bool IsTwoStage(VariantKind kind) {
  return kind == VariantKind::kVcse || kind == VariantKind::kVcsev;
}

namespace {

// Crops or repeats the last frame so `t` has exactly `frames` columns.
nn::Tensor AlignFrames(const nn::Tensor& t, Eigen::Index frames) {
  if (t.cols() == frames) return t;
  if (t.cols() > frames) return nn::CropCols(t, 0, frames);
  nn::Tensor last = nn::SliceRows(nn::Transpose(t), t.cols() - 1, 1);  // (1 x C)
  nn::Tensor tail = nn::Transpose(nn::BroadcastCols(nn::Transpose(last), frames - t.cols()));
  return nn::Transpose(nn::ConcatRows({nn::Transpose(t), tail}));
}

}  // namespace

MaskEstimator::MaskEstimator(int n_refs, int n_masks, const Preset& preset, Rng& rng)
    : n_refs_(n_refs),
      n_masks_(n_masks),
      in_norm_(Eigen::Index(1 + n_refs) * kModelDim, nn::NormKind::kGlobal),
      bottleneck_(preset.tcn_bottleneck, Eigen::Index(1 + n_refs) * kModelDim, 1, 1,
                  1, 0, 0, 1, rng),
      mask_conv_(Eigen::Index(n_masks) * kModelDim, preset.tcn_bottleneck, 1, 1, 1,
                 0, 0, 1, rng) {
  for (int r = 0; r < preset.tcn_repeats; ++r) {
    int dilation = 1;
    for (int x = 0; x < preset.tcn_blocks; ++x) {
      blocks_.emplace_back(preset.tcn_bottleneck, preset.tcn_hidden, dilation, rng);
      dilation *= preset.tcn_dilation_growth;
    }
  }
}

nn::Tensor MaskEstimator::Forward(const nn::Tensor& x_e,
                                  const std::vector<nn::Tensor>& refs) const {
  CheckShape(int(refs.size()) == n_refs_, "MaskEstimator: wrong reference count");
  std::vector<nn::Tensor> streams = {x_e};
  for (const auto& r : refs) {
    CheckShape(r.cols() == x_e.cols(), "MaskEstimator: frame-count mismatch");
    streams.push_back(r);
  }
  nn::Tensor h = streams.size() > 1 ? nn::ConcatRows(streams) : x_e;
  h = bottleneck_.Forward(in_norm_.Forward(h));
  for (const auto& b : blocks_) h = b.Forward(h);
  return nn::Sigmoid(mask_conv_.Forward(h));
}

void MaskEstimator::Params(const std::string& prefix, nn::ParamMap& out) const {
  in_norm_.Params(prefix + ".in_norm", out);
  bottleneck_.Params(prefix + ".bottleneck", out);
  for (size_t i = 0; i < blocks_.size(); ++i) {
    blocks_[i].Params(prefix + ".tcn" + std::to_string(i), out);
  }
  mask_conv_.Params(prefix + ".mask", out);
}

ExtractionModule::ExtractionModule(int n_refs, int n_masks, const Preset& preset, Rng& rng)
    : enc_(rng), dec_(rng), mask_est_(n_refs, n_masks, preset, rng) {}

ExtractionModule::Result ExtractionModule::Extract(
    const nn::Tensor& mixture, std::vector<nn::Tensor> refs,
    const nn::Tensor& same_encoder_wave) const {
  const Eigen::Index length = mixture.cols();
  nn::Tensor x_e = enc_.Forward(mixture);
  if (same_encoder_wave.defined()) {
    CheckShape(same_encoder_wave.cols() == length, "ExtractionModule: length mismatch");
    refs.insert(refs.begin(), enc_.Forward(same_encoder_wave));
  }
  for (auto& r : refs) r = AlignFrames(r, x_e.cols());
  nn::Tensor masks = mask_est_.Forward(x_e, refs);

  Result result;
  result.x_e = x_e;
  result.mask = masks;
  for (int m = 0; m < mask_est_.n_masks(); ++m) {
    nn::Tensor mask = mask_est_.n_masks() == 1
                          ? masks
                          : nn::SliceRows(masks, Eigen::Index(m) * kModelDim, kModelDim);
    nn::Tensor w = nn::Mul(mask, x_e);
    nn::Tensor est = dec_.Forward(w);
    // Decoder emits frames*stride samples; trim the encoder padding tail.
    result.estimates.push_back(nn::CropCols(est, 0, length));
  }
  return result;
}

void ExtractionModule::Params(const std::string& prefix, nn::ParamMap& out) const {
  enc_.Params(prefix + ".enc", out);
  dec_.Params(prefix + ".dec", out);
  mask_est_.Params(prefix + ".mask_est", out);
}

Model::Model(const VariantConfig& cfg) : cfg_(cfg) {
  const Preset preset = cfg.preset();
  Rng rng(cfg.seed * 0x9e3779b97f4a7c15ull + 1);

  const bool wants_visual = cfg.kind == VariantKind::kAV ||
                            cfg.kind == VariantKind::kAvcOracle || IsTwoStage(cfg.kind);
  const bool wants_context = cfg.kind == VariantKind::kAcOracle ||
                             cfg.kind == VariantKind::kAvcOracle || IsTwoStage(cfg.kind);

  if (wants_visual) visual_ = std::make_unique<frontends::VisualEncoder>(preset, rng);
  if (wants_context) {
    asr_ = std::make_unique<asr::AsrEncoder>(preset, rng);
    context_ = std::make_unique<frontends::ContextEncoder>(rng);
  }

  int stage1_refs = 0, stage1_masks = 1;
  switch (cfg.kind) {
    case VariantKind::kPit:
      stage1_masks = 2;
      break;
    case VariantKind::kAS:
    case VariantKind::kAV:
    case VariantKind::kAcOracle:
      stage1_refs = 1;
      break;
    case VariantKind::kAvcOracle:
      stage1_refs = 2;
      break;
    case VariantKind::kVcse:
    case VariantKind::kVcsev:
      stage1_refs = 1;  // visual reference
      break;
  }
  stage1_ = std::make_unique<ExtractionModule>(stage1_refs, stage1_masks, preset, rng);
  if (cfg.kind == VariantKind::kAS) spk_proj_ = nn::Linear(kModelDim, kModelDim, rng);
  if (IsTwoStage(cfg.kind)) {
    // vcse: AC consumes {x_e, s_e_av, c_e}; vcsev: {x_e, c_e} only.
    const int stage2_refs = cfg.kind == VariantKind::kVcse ? 2 : 1;
    stage2_ = std::make_unique<ExtractionModule>(stage2_refs, 1, preset, rng);
  }
}

nn::Tensor Model::PhoneticFrom(const VecD& wave) const {
  Check(asr_ != nullptr, "variant has no ASR module");
  return asr_->Encode(wave);
}

Model::Outputs Model::Forward(const Inputs& in, ContextSource context_source,
                              bool ablate_pre_extracted) const {
  Check(in.mixture.size() > 0, "Model::Forward: empty mixture");
  nn::Tensor mixture = frontends::WaveTensor(in.mixture);
  Outputs out;

  auto visual_ref = [&]() {
    Check(in.lips != nullptr, "variant requires a lip sequence");
    Check(std::llabs(Eigen::Index(in.lips->frames) * kSampleRate -
                     in.mixture.size() * kVideoFps) < kSampleRate,
          "mixture/lip duration mismatch");
    return visual_->Forward(*in.lips, frontends::kLatentRate);
  };
  auto context_ref = [&](const VecD& source_wave) {
    nn::Tensor c_t = PhoneticFrom(source_wave);
    out.phonetic = c_t;
    const int upsample = frontends::kLatentRate / kVideoFps;
    return context_->Forward(c_t, upsample);
  };

  switch (cfg_.kind) {
    case VariantKind::kPit: {
      out.estimates = stage1_->Extract(mixture, {}).estimates;
      return out;
    }
    case VariantKind::kAS: {
      Check(in.enrollment != nullptr, "a_s requires an enrollment utterance");
      nn::Tensor enr_latent = stage1_->encoder().Forward(frontends::WaveTensor(*in.enrollment));
      nn::Tensor emb = spk_proj_.Forward(nn::MeanCols(enr_latent));
      nn::Tensor ref = nn::BroadcastCols(emb, frontends::LatentFrames(in.mixture.size()));
      out.estimates = stage1_->Extract(mixture, {ref}).estimates;
      return out;
    }
    case VariantKind::kAV: {
      out.estimates = stage1_->Extract(mixture, {visual_ref()}).estimates;
      return out;
    }
    case VariantKind::kAcOracle: {
      Check(in.oracle_clean != nullptr, "ac_oracle requires the clean target");
      out.estimates = stage1_->Extract(mixture, {context_ref(*in.oracle_clean)}).estimates;
      return out;
    }
    case VariantKind::kAvcOracle: {
      Check(in.oracle_clean != nullptr, "avc_oracle requires the clean target");
      nn::Tensor v = visual_ref();
      nn::Tensor c = context_ref(*in.oracle_clean);
      out.estimates = stage1_->Extract(mixture, {v, c}).estimates;
      return out;
    }
    case VariantKind::kVcse:
    case VariantKind::kVcsev: {
      out.s_av = stage1_->Extract(mixture, {visual_ref()}).estimates[0];
      // Phonetic features: clean-oracle path for stage-3 training, otherwise
      // self-enrolled from the pre-extracted speech. The mel frontend is not
      // differentiated through, so this is a stop-gradient boundary.
      const VecD* c_src = nullptr;
      if (context_source == ContextSource::kCleanOracle) {
        Check(in.oracle_clean != nullptr, "oracle context requested without clean target");
        c_src = in.oracle_clean;
      }
      VecD s_av_wave = out.s_av.value().row(0).transpose().cast<double>();
      nn::Tensor c = context_ref(c_src != nullptr ? *c_src : s_av_wave);
      if (cfg_.kind == VariantKind::kVcse) {
        nn::Tensor s_av_in = out.s_av;
        if (ablate_pre_extracted) {
          s_av_in = nn::Tensor(Mat::Zero(out.s_av.rows(), out.s_av.cols()));
        }
        out.estimates = stage2_->Extract(mixture, {c}, s_av_in).estimates;
      } else {
        out.estimates = stage2_->Extract(mixture, {c}).estimates;
      }
      return out;
    }
  }
  throw VcseError("unknown variant kind");
}

nn::ParamMap Model::ParamsGroup(const std::string& group) const {
  nn::ParamMap out;
  const bool two_stage = stage2_ != nullptr;
  if (group == "audio_visual") {
    stage1_->Params("stage1", out);
    if (visual_) visual_->Params("visual", out);
    if (cfg_.kind == VariantKind::kAS) spk_proj_.Params("spk_proj", out);
    if (context_ && !two_stage) context_->Params("context", out);
  } else if (group == "asr") {
    if (asr_) asr_->Params("asr", out);
  } else if (group == "audio_contextual") {
    if (two_stage) {
      stage2_->Params("stage2", out);
      if (context_) context_->Params("context", out);
    }
  } else {
    throw VcseError("unknown parameter group: " + group);
  }
  return out;
}

std::vector<std::string> Model::Groups() const {
  std::vector<std::string> g = {"audio_visual"};
  if (asr_) g.push_back("asr");
  if (stage2_) g.push_back("audio_contextual");
  return g;
}

nn::ParamMap Model::AllParams() const {
  nn::ParamMap out;
  for (const auto& g : Groups()) {
    auto part = ParamsGroup(g);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::unique_ptr<Model> BuildVariant(const VariantConfig& cfg) {
  return std::make_unique<Model>(cfg);
}

}  // namespace extract
}  // namespace vcse
