// core/src/signals.cc

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

#include "vcse/signals.h"

#include <cmath>

namespace vcse {

void Waveform::Validate() const {
  Check(samples.size() > 0, "Waveform: empty");
  Check(sample_rate == kSampleRate, "Waveform: sample rate must be 16 kHz");
  Check(samples.allFinite(), "Waveform: non-finite samples");
}

namespace signals {

namespace {

// 10*log10(num/den) with a symmetric relative floor so perfect and worthless
// reconstructions land at +/-80 dB instead of infinities.
double FlooredRatioDb(double num, double den) {
  den = std::max(den, kEpsFloor * num);
  num = std::max(num, kEpsFloor * den);
  return 10.0 * std::log10(num / den);
}

void CheckSameLength(const Waveform& a, const Waveform& b, const char* what) {
  CheckShape(a.size() == b.size(), std::string(what) + ": length mismatch");
}

}  // namespace

double SiSnr(const Waveform& ref, const Waveform& est, bool zero_mean) {
  CheckSameLength(ref, est, "SiSnr");
  VecD s = ref.samples, e = est.samples;
  if (zero_mean) {
    s.array() -= s.mean();
    e.array() -= e.mean();
  }
  const double s_energy = s.squaredNorm();
  Check(s_energy > 0, "SiSnr: all-zero reference");
  const double alpha = e.dot(s) / s_energy;
  const double target_energy = alpha * alpha * s_energy;
  const double noise_energy = (e - alpha * s).squaredNorm();
  return FlooredRatioDb(target_energy, noise_energy);
}

double SiSnrLoss(const Waveform& ref, const Waveform& est, bool zero_mean) {
  return -SiSnr(ref, est, zero_mean);
}

double Sdr(const Waveform& ref, const Waveform& est, SdrMode mode) {
  CheckSameLength(ref, est, "Sdr");
  const VecD& s = ref.samples;
  const VecD& e = est.samples;
  if (mode == SdrMode::kFast) {
    return FlooredRatioDb(s.squaredNorm(), (e - s).squaredNorm());
  }
  const Eigen::Index n = s.size();
  const int taps = kSdrFilterTaps;
  CheckShape(n >= taps, "Sdr: reference shorter than filter length");
  // Autocorrelation of ref (Toeplitz Gram matrix of its shifts) and the
  // cross-correlation with the estimate; shift k delays ref by k samples.
  VecD acorr = VecD::Zero(taps), xcorr = VecD::Zero(taps);
  for (int k = 0; k < taps; ++k) {
    acorr[k] = s.head(n - k).dot(s.tail(n - k));
    xcorr[k] = e.tail(n - k).dot(s.head(n - k));
  }
  Eigen::MatrixXd gram(taps, taps);
  for (int i = 0; i < taps; ++i) {
    for (int j = 0; j < taps; ++j) gram(i, j) = acorr[std::abs(i - j)];
  }
  gram.diagonal().array() += 1e-10 * std::max(acorr[0], 1e-30);
  const VecD h = gram.ldlt().solve(xcorr);
  VecD target = VecD::Zero(n);
  for (int k = 0; k < taps; ++k) {
    if (h[k] != 0.0) target.tail(n - k) += h[k] * s.head(n - k);
  }
  const double target_energy = target.squaredNorm();
  const double dist_energy = (e - target).squaredNorm();
  return FlooredRatioDb(target_energy, dist_energy);
}

double Improvement(Metric metric, const Waveform& ref, const Waveform& est,
                   const Waveform& mixture) {
  CheckSameLength(ref, mixture, "Improvement");
  switch (metric) {
    case Metric::kSiSnr:
      return SiSnr(ref, est) - SiSnr(ref, mixture);
    case Metric::kSdr:
      return Sdr(ref, est) - Sdr(ref, mixture);
  }
  throw VcseError("Improvement: bad metric");
}

std::pair<Waveform, Waveform> MixAtSnr(const Waveform& s1, const Waveform& s2,
                                       double snr_db) {
  CheckSameLength(s1, s2, "MixAtSnr");
  const double p1 = s1.samples.squaredNorm() / s1.size();
  const double p2 = s2.samples.squaredNorm() / s2.size();
  Check(p1 > 0 && p2 > 0, "MixAtSnr: zero-power input");
  const double gain = std::sqrt(p1 / (p2 * std::pow(10.0, snr_db / 10.0)));
  Waveform scaled{VecD(gain * s2.samples), s2.sample_rate, s2.role};
  Waveform mixture{VecD(s1.samples + scaled.samples), s1.sample_rate, WaveRole::kMixture};
  return {std::move(mixture), std::move(scaled)};
}

PitResult PitLoss(const std::array<Waveform, 2>& refs,
                  const std::array<Waveform, 2>& ests) {
  const double straight =
      0.5 * (SiSnrLoss(refs[0], ests[0]) + SiSnrLoss(refs[1], ests[1]));
  const double swapped =
      0.5 * (SiSnrLoss(refs[0], ests[1]) + SiSnrLoss(refs[1], ests[0]));
  if (swapped < straight) return {swapped, {1, 0}};
  return {straight, {0, 1}};
}

nn::Tensor SiSnrLossOp(const nn::Tensor& est, const VecD& ref) {
  CheckShape(est.rows() == 1 && est.cols() == ref.size(), "SiSnrLossOp: shape");
  const VecD e = est.value().row(0).transpose().cast<double>();
  const double s_energy = ref.squaredNorm();
  Check(s_energy > 0, "SiSnrLossOp: all-zero reference");
  const double alpha = e.dot(ref) / s_energy;
  const double target_energy = alpha * alpha * s_energy;
  const double noise_energy = (e - alpha * ref).squaredNorm();
  const bool saturated = noise_energy < kEpsFloor * target_energy ||
                         target_energy < kEpsFloor * noise_energy;
  const double loss = -FlooredRatioDb(target_energy, noise_energy);

  VecD grad = VecD::Zero(ref.size());
  if (!saturated) {
    // d(-10 log10 ||t||^2/||n||^2)/de with t = alpha*ref, n = e - t.
    const double c = 10.0 / std::log(10.0);
    grad = -c * (2.0 * alpha / target_energy * ref -
                 (2.0 * e - 2.0 * alpha * ref) / noise_energy);
  }
  Mat value = Mat::Constant(1, 1, Scalar(loss));
  return nn::MakeOp(std::move(value), {est},
                    [est, grad](const Mat& g, nn::GradStore& gs) {
                      if (!est.requires_grad()) return;
                      Mat& gx = gs.Accum(est.node().get(), est.rows(), est.cols());
                      gx.row(0) += g(0, 0) * grad.transpose().cast<Scalar>();
                    });
}

}  // namespace signals
}  // namespace vcse
