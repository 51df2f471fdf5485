// core/include/vcse/datakit.h
//
// Corpus plumbing: the synthetic desk-scale corpus generator, the 3-second
// preparation rule, speaker-pair-disjoint mixture simulation and the batch
// loader with on-the-fly SNR-exact mixing.

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

#ifndef VCSE_DATAKIT_H_
#define VCSE_DATAKIT_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vcse/io.h"

namespace vcse {
namespace data {

constexpr double kUtteranceSeconds = 3.0;
constexpr Eigen::Index kUtteranceSamples = Eigen::Index(kUtteranceSeconds * kSampleRate);
constexpr int kUtteranceLipFrames = int(kUtteranceSeconds * kVideoFps);
constexpr double kSnrLowDb = -5.0, kSnrHighDb = 5.0;

struct UtteranceRecord {
  std::string id;
  std::string audio_path, lips_path, transcript_path;
  std::string speaker_id;
  double duration_s = 0;
};

struct MixtureRecord {
  UtteranceRecord target, interferer;
  double snr_db = 0;
  std::optional<UtteranceRecord> enrollment;  // for the a_s baseline
};

struct MixtureSplits {
  std::vector<MixtureRecord> train, valid, test;
};

struct SplitCounts {
  int train = 200, valid = 40, test = 40;
};

// Writes a synthetic corpus: per-speaker harmonic voices with token-driven
// formants, lip frames rendered as aperture ellipses tracking the amplitude
// envelope, and matching character transcripts. Emits raw_manifest.jsonl.
std::vector<UtteranceRecord> GenerateToyCorpus(const std::filesystem::path& out_dir,
                                               int n_speakers, int n_utterances,
                                               uint64_t seed,
                                               double duration_s = kUtteranceSeconds);

struct PrepareReport {
  std::vector<UtteranceRecord> records;
  int dropped_short = 0;
  std::vector<std::string> errors;  // per-record failures; run continues
};

// Truncates every utterance to exactly 3 s / 75 lip frames into `out_dir`,
// dropping shorter ones. Deterministic given the seed (records are emitted
// in sorted-id order; the seed is recorded for downstream sampling).
PrepareReport PrepareCorpus(const std::vector<UtteranceRecord>& raw,
                            const std::filesystem::path& out_dir, uint64_t seed);

// Speaker-disjoint pair sampling with uniform SNR in [-5, 5]; train and test
// draw from disjoint speaker-pair sets.
MixtureSplits SimulateMixtures(const std::vector<UtteranceRecord>& records,
                               const SplitCounts& counts, uint64_t seed);

// Manifest I/O (newline-delimited JSON, one record per line).
void WriteUtteranceManifest(const std::filesystem::path& path,
                            const std::vector<UtteranceRecord>& records);
std::vector<UtteranceRecord> ReadUtteranceManifest(const std::filesystem::path& path);
void WriteMixtureManifest(const std::filesystem::path& path,
                          const std::vector<MixtureRecord>& records);
std::vector<MixtureRecord> ReadMixtureManifest(const std::filesystem::path& path);

// Fixed simulated-set mode: writes mixture/target WAVs next to the manifest.
void MaterializeMixtures(const std::vector<MixtureRecord>& records,
                         const std::filesystem::path& out_dir);

struct Sample {
  std::string id;
  VecD mixture, target, interferer_scaled;
  LipSequence lips;
  std::string transcript;
  VecD enrollment;  // empty when the record has none
  double snr_db = 0;
};

// Loads one record, mixing on the fly.
Sample LoadSample(const MixtureRecord& record);

// Deterministic epoch shuffling; reproducible batch order under (seed, epoch).
class BatchLoader {
 public:
  BatchLoader(std::vector<MixtureRecord> records, int batch_size, uint64_t seed);
  // Batches of one epoch, in order.
  std::vector<std::vector<Sample>> Epoch(int epoch) const;
  std::vector<std::vector<MixtureRecord>> EpochRecords(int epoch) const;
  int batch_size() const { return batch_size_; }
  size_t size() const { return records_.size(); }

 private:
  std::vector<MixtureRecord> records_;
  int batch_size_;
  uint64_t seed_;
};

}  // namespace data
}  // namespace vcse

#endif  // VCSE_DATAKIT_H_
