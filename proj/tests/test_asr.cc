// tests/test_asr.cc
//
// ASR module oracles: the exhaustive-alignment CTC reference, greedy-decode
// collapse rules, mel/encoder shape arithmetic and the vocabulary file.

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

#include <filesystem>

#include "vcse/asr.h"

using namespace vcse;

namespace {

Mat RandomLogits(int vocab, int frames, Rng& rng) {
  std::normal_distribution<double> d(0.0, 1.5);
  Mat m(vocab, frames);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Scalar(d(rng));
  return m;
}

std::vector<int> Collapse(const std::vector<int>& path) {
  std::vector<int> out;
  int prev = -1;
  for (int t : path) {
    if (t != prev && t != 0) out.push_back(t);
    prev = t;
  }
  return out;
}

// Exhaustive CTC oracle: sums path probabilities over every frame-level
// sequence that collapses to `target`. Only blank and the target's own
// tokens can appear on such a path, so the enumeration alphabet is tiny.
double CtcOracle(const Mat& logits, const std::vector<int>& target) {
  const int frames = int(logits.cols());
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  for (int t = 0; t < frames; ++t) {
    Eigen::VectorXd col = logits.col(t).cast<double>();
    col.array() -= col.maxCoeff();
    const Eigen::VectorXd ex = col.array().exp();
    p.col(t) = ex / ex.sum();
  }
  std::vector<int> alphabet = {0};
  for (int t : target) {
    if (std::find(alphabet.begin(), alphabet.end(), t) == alphabet.end()) {
      alphabet.push_back(t);
    }
  }
  double total = 0.0;
  std::vector<int> path(size_t(frames), 0);
  std::function<void(int, double)> rec = [&](int t, double prob) {
    if (t == frames) {
      if (Collapse(path) == target) total += prob;
      return;
    }
    for (int tok : alphabet) {
      path[size_t(t)] = tok;
      rec(t + 1, prob * p(tok, t));
    }
  };
  rec(0, 1.0);
  return -std::log(total);
}

}  // namespace

TEST_CASE("vocabulary: 29 tokens, blank first, file round trip") {
  asr::Vocabulary vocab;
  CHECK(vocab.size() == 29);
  CHECK(vocab.Decode({1}) == "A");
  CHECK(vocab.Decode({26}) == "Z");
  CHECK(vocab.Decode({27}) == " ");
  CHECK(vocab.Decode({28}) == "'");
  const auto ids = vocab.Encode("AB'Z Z");
  REQUIRE(ids.size() == 6);
  CHECK(ids[0] == 1);
  CHECK(ids[1] == 2);
  CHECK(ids[4] == 27);  // space after Z' -> <space> id
  const auto path = std::filesystem::temp_directory_path() / "vcse_vocab.txt";
  vocab.Save(path);
  const asr::Vocabulary back = asr::Vocabulary::Load(path);
  CHECK(back.size() == vocab.size());
  CHECK(back.Encode("HELLO' W") == vocab.Encode("HELLO' W"));
}

TEST_CASE("transcript normalization") {
  CHECK(asr::NormalizeTranscript("  hello,   world! ") == "HELLO WORLD");
  CHECK(asr::NormalizeTranscript("don't") == "DON'T");
  CHECK(asr::NormalizeTranscript("123") == "");
}

TEST_CASE("mel spectrogram shape: ceil(len/160) frames, 80 bins") {
  Rng rng(61);
  std::normal_distribution<double> d(0.0, 0.1);
  VecD s(48000);
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = d(rng);
  Mat mel = asr::MelSpectrogram(s);
  CHECK(mel.rows() == 80);
  CHECK(mel.cols() == 300);
  CHECK(asr::MelSpectrogram(s.head(16000)).cols() == 100);
  CHECK(asr::MelSpectrogram(s.head(161)).cols() == 2);
  CHECK(mel.allFinite());
}

TEST_CASE("asr encoder: 3 s input gives 256 x 75 features, deterministic") {
  Rng rng(62);
  asr::AsrEncoder enc(Preset::Toy(), rng);
  std::normal_distribution<double> d(0.0, 0.1);
  VecD s(48000);
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = d(rng);
  nn::Tensor c = enc.Encode(s);
  CHECK(c.rows() == kModelDim);
  CHECK(c.cols() == 75);  // 300 mel frames / 4; the full-scale setup logs 73
  CHECK(c.value().isApprox(enc.Encode(s).value(), 0));
  CHECK_THROWS_AS(enc.Encode(s.head(1000)), VcseError);  // < 0.2 s
  nn::Tensor logits = enc.Logits(c);
  CHECK(logits.rows() == 29);
  CHECK(logits.cols() == 75);
}

TEST_CASE("ctc_loss single-path hand cases") {
  Rng rng(63);
  {
    // 1 frame, 1 token: loss = -log p_1(token).
    Mat logits = RandomLogits(5, 1, rng);
    Eigen::VectorXd col = logits.col(0).cast<double>();
    col.array() -= col.maxCoeff();
    const double p = std::exp(col[3]) / col.array().exp().sum();
    const double loss = double(asr::CtcLoss(nn::Tensor(logits), {3}).value()(0, 0));
    CHECK(loss == doctest::Approx(-std::log(p)).epsilon(1e-5));
  }
  {
    // Empty transcript: loss = -sum_t log p_t(blank).
    Mat logits = RandomLogits(5, 4, rng);
    double want = 0;
    for (int t = 0; t < 4; ++t) {
      Eigen::VectorXd col = logits.col(t).cast<double>();
      col.array() -= col.maxCoeff();
      want -= std::log(std::exp(col[0]) / col.array().exp().sum());
    }
    const double loss = double(asr::CtcLoss(nn::Tensor(logits), {}).value()(0, 0));
    CHECK(loss == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("ctc_loss equals exhaustive alignment enumeration, T<=6 labels<=3") {
  Rng rng(64);
  std::uniform_int_distribution<int> tok_d(1, 3);
  for (int frames = 1; frames <= 6; ++frames) {
    for (int labels = 0; labels <= std::min(3, frames); ++labels) {
      for (int rep = 0; rep < 8; ++rep) {
        std::vector<int> target(size_t(labels), 0);
        for (auto& t : target) t = tok_d(rng);
        Mat logits = RandomLogits(5, frames, rng);
        const double want = CtcOracle(logits, target);
        double got;
        try {
          got = double(asr::CtcLoss(nn::Tensor(logits), target).value()(0, 0));
        } catch (const VcseError&) {
          // Admissibility: repeated labels need a separating blank.
          CHECK(!std::isfinite(-CtcOracle(logits, target)));
          continue;
        }
        CHECK(std::abs(got - want) <= 1e-5 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST_CASE("ctc_loss rejects targets longer than admissible alignments") {
  Rng rng(65);
  Mat logits = RandomLogits(5, 2, rng);
  CHECK_THROWS_AS(asr::CtcLoss(nn::Tensor(logits), {1, 2, 3}), VcseError);
  // A A needs T >= 3 (blank between repeats).
  CHECK_THROWS_AS(asr::CtcLoss(nn::Tensor(logits), {1, 1}), VcseError);
}

TEST_CASE("ctc gradient matches finite differences within 1e-3") {
  Rng rng(66);
  Mat logits = RandomLogits(4, 5, rng);
  const std::vector<int> target = {2, 1};
  nn::Tensor x(logits, true);
  nn::GradStore gs = nn::Backward(asr::CtcLoss(x, target));
  const Mat* g = gs.Find(x.node().get());
  REQUIRE(g != nullptr);
  const double h = 1e-2;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      Mat up = logits, dn = logits;
      up(i, j) += Scalar(h);
      dn(i, j) -= Scalar(h);
      const double fd = (double(asr::CtcLoss(nn::Tensor(up), target).value()(0, 0)) -
                         double(asr::CtcLoss(nn::Tensor(dn), target).value()(0, 0))) /
                        (2 * h);
      const double an = double((*g)(i, j));
      CHECK(std::abs(fd - an) <= 1e-3 * std::max({1.0, std::abs(fd), std::abs(an)}));
    }
  }
}

TEST_CASE("greedy decode collapse rules") {
  auto logits_for = [](const std::vector<int>& path, int vocab) {
    Mat m = Mat::Constant(vocab, Eigen::Index(path.size()), -5.0f);
    for (size_t t = 0; t < path.size(); ++t) m(path[t], Eigen::Index(t)) = 5.0f;
    return m;
  };
  // [a a blank b] -> "ab"
  CHECK(asr::GreedyDecode(logits_for({1, 1, 0, 2}, 4)) == std::vector<int>{1, 2});
  // all blank -> empty
  CHECK(asr::GreedyDecode(logits_for({0, 0, 0}, 4)).empty());
  // repeats with a blank between survive: [a blank a] -> "aa"
  CHECK(asr::GreedyDecode(logits_for({1, 0, 1}, 4)) == std::vector<int>{1, 1});
}

TEST_CASE("character error rate is levenshtein over reference length") {
  CHECK(asr::CharacterErrorRate({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(asr::CharacterErrorRate({1, 2, 3}, {1, 3}) == doctest::Approx(1.0 / 3));
  CHECK(asr::CharacterErrorRate({1, 2}, {3, 4}) == doctest::Approx(1.0));
  CHECK(asr::CharacterErrorRate({1}, {1, 2, 3}) == doctest::Approx(2.0));
}
