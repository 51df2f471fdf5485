// core/include/vcse/signals.h
//
// Metric core: SI-SNR, BSS-eval style SDR, improvement metrics, SNR-exact
// mixing and the 2-speaker PIT objective. Everything here is a pure function
// over double-precision waveforms.

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

#ifndef VCSE_SIGNALS_H_
#define VCSE_SIGNALS_H_

#include <array>
#include <utility>

#include "vcse/common.h"
#include "vcse/tensor.h"

namespace vcse {

enum class WaveRole { kMixture, kClean, kEstimate, kEnrollment };

struct Waveform {
  VecD samples;
  int sample_rate = kSampleRate;
  WaveRole role = WaveRole::kClean;

  Eigen::Index size() const { return samples.size(); }
  double duration_s() const { return double(samples.size()) / sample_rate; }
  void Validate() const;
};

struct MetricReport {
  double si_snr_db = 0;
  double sdr_db = 0;
  double si_snri_db = 0;
  double sdri_db = 0;
};

namespace signals {

// Relative floor inside the log ratio; caps results at +/-80 dB.
constexpr double kEpsFloor = 1e-8;
constexpr int kSdrFilterTaps = 512;

enum class Metric { kSiSnr, kSdr };
enum class SdrMode { kProjection, kFast };

// Eq.-1 SI-SNR in dB. `zero_mean` subtracts per-signal means first; the
// default follows the raw formula (the hand-evaluated reference cases assume
// no mean removal).
double SiSnr(const Waveform& ref, const Waveform& est, bool zero_mean = false);
double SiSnrLoss(const Waveform& ref, const Waveform& est, bool zero_mean = false);

// BSS-eval style SDR: the target component is the least-squares projection of
// `est` onto the 512-tap shift span of `ref`. kFast is a plain energy-ratio
// SNR without the projection.
double Sdr(const Waveform& ref, const Waveform& est, SdrMode mode = SdrMode::kProjection);

double Improvement(Metric metric, const Waveform& ref, const Waveform& est,
                   const Waveform& mixture);

// Scales s2 so the s1/s2 power ratio is exactly snr_db, returns the mixture
// and the scaled interferer.
std::pair<Waveform, Waveform> MixAtSnr(const Waveform& s1, const Waveform& s2,
                                       double snr_db);

struct PitResult {
  double loss;
  std::array<int, 2> permutation;  // permutation[i] = estimate index for ref i
};
PitResult PitLoss(const std::array<Waveform, 2>& refs,
                  const std::array<Waveform, 2>& ests);

// Differentiable SI-SNR loss node for training: -SiSnr(ref, est). `est` is a
// (1 x T) tensor; internals run in double and match the pure function.
nn::Tensor SiSnrLossOp(const nn::Tensor& est, const VecD& ref);

}  // namespace signals
}  // namespace vcse

#endif  // VCSE_SIGNALS_H_
