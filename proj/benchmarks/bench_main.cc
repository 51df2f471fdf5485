// benchmarks/bench_main.cc
//
// Micro-benchmarks for the hot paths: SI-SNR metric, latent-domain
// convolution and a full TCN mask-estimator forward.

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

#include <benchmark/benchmark.h>

#include "vcse/extractors.h"
#include "vcse/frontends.h"
#include "vcse/signals.h"

namespace {

using namespace vcse;

void BM_SiSnr(benchmark::State& state) {
  Rng rng(1);
  std::normal_distribution<double> d(0.0, 1.0);
  VecD ref(48000), est(48000);
  for (Eigen::Index i = 0; i < ref.size(); ++i) {
    ref[i] = d(rng);
    est[i] = ref[i] + 0.3 * d(rng);
  }
  const Waveform rw{ref, kSampleRate, WaveRole::kClean};
  const Waveform ew{est, kSampleRate, WaveRole::kEstimate};
  for (auto _ : state) {
    benchmark::DoNotOptimize(signals::SiSnr(rw, ew));
  }
}
BENCHMARK(BM_SiSnr);

void BM_AudioEncoder(benchmark::State& state) {
  Rng rng(2);
  frontends::AudioEncoder enc(rng);
  std::normal_distribution<double> d(0.0, 0.1);
  VecD wave(48000);
  for (Eigen::Index i = 0; i < wave.size(); ++i) wave[i] = d(rng);
  nn::Tensor w = frontends::WaveTensor(wave);
  for (auto _ : state) {
    benchmark::DoNotOptimize(enc.Forward(w).value().sum());
  }
}
BENCHMARK(BM_AudioEncoder);

void BM_MaskEstimatorToy(benchmark::State& state) {
  Rng rng(3);
  extract::MaskEstimator est(1, 1, Preset::Toy(), rng);
  nn::Tensor x(Mat::Random(kModelDim, 2400));
  nn::Tensor ref(Mat::Random(kModelDim, 2400));
  for (auto _ : state) {
    benchmark::DoNotOptimize(est.Forward(x, {ref}).value().sum());
  }
}
BENCHMARK(BM_MaskEstimatorToy);

}  // namespace

BENCHMARK_MAIN();
