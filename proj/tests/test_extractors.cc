// tests/test_extractors.cc
//
// Structural contracts of the mask estimator and the variant matrix: mask
// range, output-length preservation, component inventories, weight sharing
// and the ablation dataflow check.

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vcse/extractors.h"
#include "vcse/signals.h"

using namespace vcse;
using extract::VariantKind;

namespace {

VecD RandomWave(Eigen::Index n, Rng& rng, double scale = 0.1) {
  std::normal_distribution<double> d(0.0, scale);
  VecD s(n);
  for (Eigen::Index i = 0; i < n; ++i) s[i] = d(rng);
  return s;
}

LipSequence RandomLips(int frames, Rng& rng) {
  LipSequence lips;
  lips.frames = frames;
  lips.pixels.resize(size_t(frames) * kLipSize * kLipSize);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& p : lips.pixels) p = uint8_t(d(rng));
  return lips;
}

std::unique_ptr<extract::Model> Build(VariantKind kind, uint64_t seed = 5) {
  return extract::BuildVariant(extract::VariantConfig{kind, true, seed});
}

std::vector<std::string> ParamNames(const nn::ParamMap& params) {
  std::vector<std::string> names;
  for (const auto& [name, p] : params) names.push_back(name);
  return names;
}

}  // namespace

TEST_CASE("variant names, reference taxonomy and staging") {
  CHECK(extract::ParseVariant("vcse") == VariantKind::kVcse);
  CHECK(extract::VariantName(VariantKind::kAvcOracle) == "avc_oracle");
  CHECK(extract::ReferenceKind(VariantKind::kPit) == "-");
  CHECK(extract::ReferenceKind(VariantKind::kAV) == "V");
  CHECK(extract::ReferenceKind(VariantKind::kVcse) == "V+C");
  CHECK(extract::IsTwoStage(VariantKind::kVcse));
  CHECK(extract::IsTwoStage(VariantKind::kVcsev));
  CHECK_FALSE(extract::IsTwoStage(VariantKind::kAvcOracle));
  CHECK_THROWS_AS(extract::ParseVariant("nope"), VcseError);
}

TEST_CASE("mask estimator output is a sigmoid mask in [0, 1]") {
  Rng rng(71);
  extract::MaskEstimator est(1, 2, Preset::Toy(), rng);
  nn::Tensor x(Mat::Random(kModelDim, 40) * 3.0f);
  nn::Tensor ref(Mat::Random(kModelDim, 40));
  nn::Tensor masks = est.Forward(x, {ref});
  CHECK(masks.rows() == 2 * kModelDim);
  CHECK(masks.cols() == 40);
  CHECK(masks.value().minCoeff() >= 0.0f);
  CHECK(masks.value().maxCoeff() <= 1.0f);
}

TEST_CASE("reference latents are aligned to the mixture frame count") {
  Rng rng(72);
  extract::ExtractionModule mod(1, 1, Preset::Toy(), rng);
  nn::Tensor mixture = frontends::WaveTensor(RandomWave(8000, rng));
  // Too-short and too-long references both align (repeat-last / crop).
  for (Eigen::Index ref_frames : {Eigen::Index(300), Eigen::Index(500)}) {
    auto res = mod.Extract(mixture, {nn::Tensor(Mat::Random(kModelDim, ref_frames))});
    CHECK(res.estimates.size() == 1);
    CHECK(res.estimates[0].cols() == 8000);
  }
}

TEST_CASE("output length preservation for awkward lengths") {
  Rng rng(73);
  extract::ExtractionModule mod(0, 2, Preset::Toy(), rng);
  for (Eigen::Index len : {Eigen::Index(777), Eigen::Index(48000), Eigen::Index(19)}) {
    auto res = mod.Extract(frontends::WaveTensor(RandomWave(len, rng)), {});
    REQUIRE(res.estimates.size() == 2);
    CHECK(res.estimates[0].rows() == 1);
    CHECK(res.estimates[0].cols() == len);
    CHECK(res.estimates[1].cols() == len);
  }
}

TEST_CASE("variant component inventories") {
  struct Row {
    VariantKind kind;
    bool visual, asr, stage2;
    size_t outputs;
  };
  const Row rows[] = {
      {VariantKind::kPit, false, false, false, 2},
      {VariantKind::kAS, false, false, false, 1},
      {VariantKind::kAV, true, false, false, 1},
      {VariantKind::kAcOracle, false, true, false, 1},
      {VariantKind::kAvcOracle, true, true, false, 1},
      {VariantKind::kVcse, true, true, true, 1},
      {VariantKind::kVcsev, true, true, true, 1},
  };
  Rng rng(74);
  const VecD mixture = RandomWave(9600, rng);
  const VecD clean = RandomWave(9600, rng);
  const VecD enroll = RandomWave(9600, rng);
  const LipSequence lips = RandomLips(15, rng);
  for (const Row& row : rows) {
    auto model = Build(row.kind);
    CHECK(model->has_visual() == row.visual);
    CHECK(model->has_asr() == row.asr);
    CHECK(model->has_stage2() == row.stage2);
    extract::Model::Inputs in;
    in.mixture = mixture;
    in.lips = &lips;
    in.enrollment = &enroll;
    in.oracle_clean = &clean;
    const auto out = model->Forward(in);
    CHECK(out.estimates.size() == row.outputs);
    for (const auto& e : out.estimates) CHECK(e.cols() == mixture.size());
    if (row.stage2) CHECK(out.s_av.defined());
  }
}

TEST_CASE("missing required references are rejected") {
  Rng rng(75);
  extract::Model::Inputs in;
  in.mixture = RandomWave(9600, rng);
  CHECK_THROWS_AS(Build(VariantKind::kAV)->Forward(in), VcseError);
  CHECK_THROWS_AS(Build(VariantKind::kAS)->Forward(in), VcseError);
  CHECK_THROWS_AS(Build(VariantKind::kAcOracle)->Forward(in), VcseError);
}

TEST_CASE("parameter groups partition the model with no duplicates") {
  for (VariantKind kind : {VariantKind::kAV, VariantKind::kAvcOracle, VariantKind::kVcse}) {
    auto model = Build(kind);
    auto names = ParamNames(model->AllParams());
    std::sort(names.begin(), names.end());
    CHECK(std::adjacent_find(names.begin(), names.end()) == names.end());
    size_t total = 0;
    for (const auto& g : model->Groups()) total += model->ParamsGroup(g).size();
    CHECK(total == names.size());
  }
}

TEST_CASE("initialization is deterministic under the seed") {
  auto a = Build(VariantKind::kVcse, 9);
  auto b = Build(VariantKind::kVcse, 9);
  auto c = Build(VariantKind::kVcse, 10);
  const auto pa = a->AllParams(), pb = b->AllParams(), pc = c->AllParams();
  REQUIRE(pa.size() == pb.size());
  bool any_diff = false;
  for (size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].second.value().isApprox(pb[i].second.value(), 0));
    any_diff = any_diff || !pa[i].second.value().isApprox(pc[i].second.value(), 0);
  }
  CHECK(any_diff);
}

TEST_CASE("vcse consumes the pre-extracted stream; vcsev has none by construction") {
  Rng rng(76);
  extract::Model::Inputs in;
  in.mixture = RandomWave(9600, rng);
  const LipSequence lips = RandomLips(15, rng);
  in.lips = &lips;
  {
    auto model = Build(VariantKind::kVcse);
    const Mat normal = model->Forward(in, extract::ContextSource::kPreExtracted, false)
                           .estimates[0].value();
    const Mat ablated = model->Forward(in, extract::ContextSource::kPreExtracted, true)
                            .estimates[0].value();
    CHECK_FALSE(normal.isApprox(ablated));  // s_e^av reaches the AC mask estimator
  }
  {
    auto model = Build(VariantKind::kVcsev);
    const Mat normal = model->Forward(in, extract::ContextSource::kPreExtracted, false)
                           .estimates[0].value();
    const Mat ablated = model->Forward(in, extract::ContextSource::kPreExtracted, true)
                            .estimates[0].value();
    CHECK(normal.isApprox(ablated, 0));  // no such stream exists
  }
}

TEST_CASE("oracle vs self-enrolled context changes the vcse output") {
  Rng rng(77);
  auto model = Build(VariantKind::kVcse);
  extract::Model::Inputs in;
  in.mixture = RandomWave(9600, rng);
  const LipSequence lips = RandomLips(15, rng);
  in.lips = &lips;
  const VecD clean = RandomWave(9600, rng);
  in.oracle_clean = &clean;
  const Mat oracle =
      model->Forward(in, extract::ContextSource::kCleanOracle).estimates[0].value();
  const Mat self =
      model->Forward(in, extract::ContextSource::kPreExtracted).estimates[0].value();
  CHECK_FALSE(oracle.isApprox(self));
}

TEST_CASE("stage-5 gradients reach every parameter group") {
  Rng rng(78);
  auto model = Build(VariantKind::kVcse);
  for (const auto& g : model->Groups()) {
    nn::ParamMap params = model->ParamsGroup(g);
    nn::SetTrainable(params, true);
  }
  extract::Model::Inputs in;
  in.mixture = RandomWave(9600, rng);
  const LipSequence lips = RandomLips(15, rng);
  in.lips = &lips;
  const VecD clean = RandomWave(9600, rng);
  const auto out = model->Forward(in, extract::ContextSource::kPreExtracted);
  nn::GradStore gs = nn::Backward(signals::SiSnrLossOp(out.estimates[0], clean));
  for (const auto& g : model->Groups()) {
    double norm = 0;
    for (const auto& [name, p] : model->ParamsGroup(g)) {
      if (const Mat* grad = gs.Find(p.node().get())) norm += double(grad->squaredNorm());
    }
    INFO("group ", g);
    CHECK(norm > 0.0);
  }
}
