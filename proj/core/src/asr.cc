// core/src/asr.cc

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

#include "vcse/asr.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>

namespace vcse {
namespace asr {

namespace {

constexpr double kLogZero = -1e30;

double LogSumExp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b <= kLogZero / 2) return a;
  return a + std::log1p(std::exp(b - a));
}

// Iterative radix-2 FFT, n must be a power of two.
void Fft(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / double(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

Vocabulary::Vocabulary() {
  tokens_.push_back("<blank>");
  for (char c = 'A'; c <= 'Z'; ++c) tokens_.push_back(std::string(1, c));
  tokens_.push_back("<space>");
  tokens_.push_back("'");
}

std::vector<int> Vocabulary::Encode(const std::string& text) const {
  std::vector<int> ids;
  for (char c : text) {
    if (c >= 'A' && c <= 'Z') {
      ids.push_back(1 + (c - 'A'));
    } else if (c == ' ') {
      ids.push_back(27);
    } else if (c == '\'') {
      ids.push_back(28);
    } else {
      throw DataError(std::string("Vocabulary: unencodable character '") + c + "'");
    }
  }
  return ids;
}

std::string Vocabulary::Decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    Check(id > 0 && id < size(), "Vocabulary: id out of range");
    if (id == 27) {
      out += ' ';
    } else {
      out += tokens_[size_t(id)];
    }
  }
  return out;
}

void Vocabulary::Save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write vocabulary: " + path.string());
  for (const auto& t : tokens_) os << t << "\n";
}

Vocabulary Vocabulary::Load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read vocabulary: " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(is, line)) tokens.push_back(line);
  Vocabulary v;
  if (tokens != v.tokens_) throw DataError("unexpected vocabulary contents: " + path.string());
  return v;
}

std::string NormalizeTranscript(const std::string& text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    const char u = char(std::toupper(static_cast<unsigned char>(c)));
    if ((u >= 'A' && u <= 'Z') || u == '\'') {
      if (pending_space && !out.empty()) out += ' ';
      pending_space = false;
      out += u;
    } else if (u == ' ' || u == '\t' || u == '\n' || u == '\r') {
      pending_space = true;
    }
  }
  return out;
}

Mat MelSpectrogram(const VecD& samples) {
  const Eigen::Index len = samples.size();
  const Eigen::Index frames = (len + kHopSamples - 1) / kHopSamples;
  const Eigen::Index padded = (frames - 1) * kHopSamples + kWinSamples;
  const Eigen::Index pad_left = (padded - len) / 2;
  constexpr int kFftSize = 512;
  constexpr int kBins = kFftSize / 2 + 1;

  VecD window(kWinSamples);
  for (int i = 0; i < kWinSamples; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (kWinSamples - 1));
  }

  // Triangular mel filterbank, 0..8 kHz.
  Eigen::MatrixXd fbank = Eigen::MatrixXd::Zero(kMelBins, kBins);
  const double mel_lo = HzToMel(0.0), mel_hi = HzToMel(kSampleRate / 2.0);
  std::vector<double> centers(kMelBins + 2);
  for (int m = 0; m < kMelBins + 2; ++m) {
    const double hz = MelToHz(mel_lo + (mel_hi - mel_lo) * m / (kMelBins + 1));
    centers[size_t(m)] = hz * kFftSize / kSampleRate;
  }
  for (int m = 0; m < kMelBins; ++m) {
    const double l = centers[size_t(m)], c = centers[size_t(m) + 1], r = centers[size_t(m) + 2];
    for (int k = 0; k < kBins; ++k) {
      if (k > l && k < c) {
        fbank(m, k) = (k - l) / (c - l);
      } else if (k >= c && k < r) {
        fbank(m, k) = (r - k) / (r - c);
      }
    }
  }

  Mat mel(kMelBins, frames);
  std::vector<std::complex<double>> buf(kFftSize);
  Eigen::VectorXd power(kBins);
  for (Eigen::Index f = 0; f < frames; ++f) {
    for (int i = 0; i < kFftSize; ++i) {
      const Eigen::Index idx = f * kHopSamples - pad_left + i;
      const double v = (i < kWinSamples && idx >= 0 && idx < len) ? samples[idx] * window[i] : 0.0;
      buf[size_t(i)] = v;
    }
    Fft(buf);
    for (int k = 0; k < kBins; ++k) power[k] = std::norm(buf[size_t(k)]);
    const Eigen::VectorXd m = fbank * power;
    for (int b = 0; b < kMelBins; ++b) mel(b, f) = Scalar(std::log(m[b] + 1e-10));
  }
  return mel;
}

AsrEncoder::AsrEncoder(const Preset& preset, Rng& rng)
    : sub1_(kModelDim, kMelBins, 3, 2, 1, 1, 1, 1, rng),
      sub2_(kModelDim, kModelDim, 3, 2, 1, 1, 1, 1, rng) {
  for (int i = 0; i < preset.asr_layers; ++i) {
    layers_.emplace_back(kModelDim, preset.asr_heads, preset.asr_ff, rng);
  }
  head_ = nn::Linear(vocab_.size(), kModelDim, rng);
}

nn::Tensor AsrEncoder::Encode(const VecD& samples) const {
  Check(double(samples.size()) / kSampleRate >= kMinInputSeconds,
        "AsrEncoder: input shorter than 0.2 s");
  return EncodeFeatures(nn::Tensor(MelSpectrogram(samples)));
}

nn::Tensor AsrEncoder::EncodeFeatures(const nn::Tensor& mel) const {
  CheckShape(mel.rows() == kMelBins, "AsrEncoder: expects 80 mel bins");
  nn::Tensor x = nn::Relu(sub1_.Forward(mel));
  x = nn::Relu(sub2_.Forward(x));
  // Sinusoidal positions.
  Mat pe(kModelDim, x.cols());
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    for (int i = 0; i < kModelDim / 2; ++i) {
      const double angle = double(t) / std::pow(10000.0, 2.0 * i / kModelDim);
      pe(2 * i, t) = Scalar(std::sin(angle));
      pe(2 * i + 1, t) = Scalar(std::cos(angle));
    }
  }
  x = nn::Add(x, nn::Tensor(std::move(pe)));
  for (const auto& layer : layers_) x = layer.Forward(x);
  return x;
}

nn::Tensor AsrEncoder::Logits(const nn::Tensor& features) const {
  return head_.Forward(features);
}

void AsrEncoder::Params(const std::string& prefix, nn::ParamMap& out) const {
  sub1_.Params(prefix + ".sub1", out);
  sub2_.Params(prefix + ".sub2", out);
  for (size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].Params(prefix + ".layer" + std::to_string(i), out);
  }
  head_.Params(prefix + ".head", out);
}

nn::Tensor CtcLoss(const nn::Tensor& logits, const std::vector<int>& target) {
  const Eigen::Index v = logits.rows();
  const Eigen::Index t_len = logits.cols();
  for (int id : target) Check(id > 0 && id < v, "CtcLoss: target id out of range");

  // Extended label sequence with interleaved blanks.
  const Eigen::Index s_len = 2 * Eigen::Index(target.size()) + 1;
  std::vector<int> lab(size_t(s_len), Vocabulary::kBlank);
  for (size_t u = 0; u < target.size(); ++u) lab[2 * u + 1] = target[u];

  // Log-softmax in double.
  Eigen::MatrixXd logy(v, t_len);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    Eigen::VectorXd col = logits.value().col(t).cast<double>();
    const double mx = col.maxCoeff();
    const double lse = mx + std::log((col.array() - mx).exp().sum());
    logy.col(t) = col.array() - lse;
  }

  Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(s_len, t_len, kLogZero);
  Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(s_len, t_len, kLogZero);
  alpha(0, 0) = logy(lab[0], 0);
  if (s_len > 1) alpha(1, 0) = logy(lab[1], 0);
  for (Eigen::Index t = 1; t < t_len; ++t) {
    for (Eigen::Index s = 0; s < s_len; ++s) {
      double a = alpha(s, t - 1);
      if (s >= 1) a = LogSumExp(a, alpha(s - 1, t - 1));
      if (s >= 2 && lab[size_t(s)] != Vocabulary::kBlank && lab[size_t(s)] != lab[size_t(s) - 2]) {
        a = LogSumExp(a, alpha(s - 2, t - 1));
      }
      alpha(s, t) = a + logy(lab[size_t(s)], t);
    }
  }
  double log_p = alpha(s_len - 1, t_len - 1);
  if (s_len > 1) log_p = LogSumExp(log_p, alpha(s_len - 2, t_len - 1));
  Check(log_p > kLogZero / 2,
        "CtcLoss: transcript longer than admissible alignments");

  beta(s_len - 1, t_len - 1) = logy(lab[size_t(s_len) - 1], t_len - 1);
  if (s_len > 1) beta(s_len - 2, t_len - 1) = logy(lab[size_t(s_len) - 2], t_len - 1);
  for (Eigen::Index t = t_len - 2; t >= 0; --t) {
    for (Eigen::Index s = 0; s < s_len; ++s) {
      double b = beta(s, t + 1);
      if (s + 1 < s_len) b = LogSumExp(b, beta(s + 1, t + 1));
      if (s + 2 < s_len && lab[size_t(s)] != Vocabulary::kBlank &&
          lab[size_t(s)] != lab[size_t(s) + 2]) {
        b = LogSumExp(b, beta(s + 2, t + 1));
      }
      beta(s, t) = b + logy(lab[size_t(s)], t);
    }
  }

  // d(-log P)/d logits = softmax - per-symbol posterior mass.
  Mat grad(v, t_len);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    Eigen::VectorXd post = Eigen::VectorXd::Zero(v);
    for (Eigen::Index s = 0; s < s_len; ++s) {
      const double g = alpha(s, t) + beta(s, t) - logy(lab[size_t(s)], t) - log_p;
      if (g > kLogZero / 2) post[lab[size_t(s)]] += std::exp(g);
    }
    grad.col(t) = (logy.col(t).array().exp() - post.array()).cast<Scalar>();
  }

  Mat value = Mat::Constant(1, 1, Scalar(-log_p));
  return nn::MakeOp(std::move(value), {logits},
                    [logits, grad](const Mat& g, nn::GradStore& gs) {
                      if (!logits.requires_grad()) return;
                      Mat& gx = gs.Accum(logits.node().get(), logits.rows(), logits.cols());
                      gx += g(0, 0) * grad;
                    });
}

std::vector<int> GreedyDecode(const Mat& logits) {
  std::vector<int> out;
  int prev = Vocabulary::kBlank;
  for (Eigen::Index t = 0; t < logits.cols(); ++t) {
    Eigen::Index arg = 0;
    logits.col(t).maxCoeff(&arg);
    const int id = int(arg);
    if (id != Vocabulary::kBlank && id != prev) out.push_back(id);
    prev = id;
  }
  return out;
}

double CharacterErrorRate(const std::vector<int>& ref, const std::vector<int>& hyp) {
  const size_t n = ref.size(), m = hyp.size();
  if (n == 0) return m == 0 ? 0.0 : 1.0;
  std::vector<size_t> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = j;
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= m; ++j) {
      const size_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return double(prev[m]) / double(n);
}

}  // namespace asr
}  // namespace vcse
