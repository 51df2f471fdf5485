// tests/test_frontends.cc
//
// Shape arithmetic and alignment contracts of the audio/visual/context
// frontends (toy preset; the full preset shares all the code paths).

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

#include "vcse/frontends.h"

using namespace vcse;

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

}  // namespace

TEST_CASE("latent frame arithmetic: 800 frames per second") {
  CHECK(frontends::kLatentRate == 800);
  CHECK(frontends::LatentFrames(48000) == 2400);  // 3 s
  CHECK(frontends::LatentFrames(16000) == 800);   // 1 s
  CHECK(frontends::LatentFrames(1) == 1);
  CHECK(frontends::LatentFrames(41) == 3);  // ceil division
  // 32x the 25 fps video rate, so one lip frame spans 32 latent frames.
  CHECK(frontends::kLatentRate / kVideoFps == 32);
}

TEST_CASE("audio encoder/decoder shapes and length preservation") {
  Rng rng(51);
  frontends::AudioEncoder enc(rng);
  frontends::AudioDecoder dec(rng);
  for (Eigen::Index len : {Eigen::Index(48000), Eigen::Index(16000), Eigen::Index(999)}) {
    nn::Tensor latent = enc.Forward(frontends::WaveTensor(RandomWave(len, rng)));
    CHECK(latent.rows() == kModelDim);
    CHECK(latent.cols() == frontends::LatentFrames(len));
    CHECK(latent.value().minCoeff() >= 0.0f);  // ReLU latent
    nn::Tensor wave = dec.Forward(latent);
    CHECK(wave.rows() == 1);
    CHECK(wave.cols() == frontends::LatentFrames(len) * frontends::kEncStride);
  }
}

TEST_CASE("zero latent decodes to silence") {
  Rng rng(52);
  frontends::AudioDecoder dec(rng);
  nn::Tensor wave = dec.Forward(nn::Tensor(Mat::Zero(kModelDim, 50)));
  CHECK(wave.value().cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("visual encoder: 75 lip frames to 2400 aligned latent frames") {
  Rng rng(53);
  frontends::VisualEncoder enc(Preset::Toy(), rng);
  const LipSequence lips = RandomLips(75, rng);
  nn::Tensor v = enc.Forward(lips, frontends::kLatentRate);
  CHECK(v.rows() == kModelDim);
  CHECK(v.cols() == 75 * 32);
  // Nearest-frame upsampling: the 32 latent frames of one video frame agree.
  CHECK(v.value().col(0).isApprox(v.value().col(31)));
  CHECK_FALSE(v.value().col(0).isApprox(v.value().col(32 * 37)));
}

TEST_CASE("visual encoder is deterministic in eval") {
  Rng rng(54);
  frontends::VisualEncoder enc(Preset::Toy(), rng);
  const LipSequence lips = RandomLips(5, rng);
  const Mat a = enc.Forward(lips, frontends::kLatentRate).value();
  const Mat b = enc.Forward(lips, frontends::kLatentRate).value();
  CHECK(a.isApprox(b, 0));
}

TEST_CASE("context encoder shapes and receptive field") {
  Rng rng(55);
  frontends::ContextEncoder enc(rng);
  CHECK(frontends::ContextEncoder::kReceptiveField == 125);
  nn::Tensor c = enc.Forward(nn::Tensor(Mat::Random(kModelDim, 75)), 32);
  CHECK(c.rows() == kModelDim);
  CHECK(c.cols() == 75 * 32);

  // Beyond the 125-frame conv horizon a probe reaches frame 0 only through
  // the (global) normalization statistics; inside it, through the convs
  // directly. The direct path must dominate by a wide margin.
  Mat base = Mat::Random(kModelDim, 200);
  const Mat out0 = enc.Forward(nn::Tensor(base), 1).value();
  Mat far = base;
  far.col(190).array() += 1.0f;
  const double d_far =
      (enc.Forward(nn::Tensor(far), 1).value().col(0) - out0.col(0)).norm();
  Mat near = base;
  near.col(30).array() += 1.0f;
  const double d_near =
      (enc.Forward(nn::Tensor(near), 1).value().col(0) - out0.col(0)).norm();
  CHECK(d_near > 5.0 * d_far);
}

TEST_CASE("wave tensor wraps samples unchanged") {
  VecD s(4);
  s << 0.5, -0.25, 0.125, 0.0;
  nn::Tensor t = frontends::WaveTensor(s);
  CHECK(t.rows() == 1);
  CHECK(t.cols() == 4);
  CHECK(double(t.value()(0, 1)) == -0.25);
  CHECK_FALSE(t.requires_grad());
}
