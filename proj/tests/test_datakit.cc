// tests/test_datakit.cc
//
// Corpus plumbing: synthetic corpus contracts (byte-determinism, lip/audio
// correlation), 3-second preparation, speaker-pair-disjoint simulation with
// uniform SNR, manifests and the deterministic batch loader.

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

#include <fstream>
#include <set>

#include "vcse/datakit.h"
#include "vcse/signals.h"

using namespace vcse;
namespace fs = std::filesystem;

namespace {

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "vcse_datakit" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<uint8_t> ReadBytes(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(bool(is));
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(is), {});
}

double PearsonR(const VecD& a, const VecD& b) {
  const VecD da = a.array() - a.mean();
  const VecD db = b.array() - b.mean();
  return da.dot(db) / std::sqrt(da.squaredNorm() * db.squaredNorm());
}

// One-sample Kolmogorov-Smirnov statistic against Uniform[lo, hi].
double KsStatistic(std::vector<double> xs, double lo, double hi) {
  std::sort(xs.begin(), xs.end());
  double d = 0;
  const double n = double(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    const double f = (xs[i] - lo) / (hi - lo);
    d = std::max(d, std::max(f - double(i) / n, double(i + 1) / n - f));
  }
  return d;
}

}  // namespace

TEST_CASE("toy corpus: contract, determinism and lip/audio correlation") {
  const fs::path dir_a = FreshDir("gen_a");
  const auto records = data::GenerateToyCorpus(dir_a, 4, 8, 7);
  REQUIRE(records.size() == 8);
  std::set<std::string> speakers;
  for (const auto& r : records) {
    const Waveform audio = io::ReadWav(r.audio_path);
    const LipSequence lips = io::ReadLips(r.lips_path);
    CHECK(audio.samples.size() == 48000);
    CHECK(lips.frames == 75);
    CHECK_FALSE(io::ReadText(r.transcript_path).empty());
    speakers.insert(r.speaker_id);

    // Lip aperture (dark-pixel count) tracks the audio envelope at lag 0.
    VecD envelope(75), aperture(75);
    for (int f = 0; f < 75; ++f) {
      envelope[f] = std::sqrt(audio.samples.segment(f * 640, 640).squaredNorm() / 640);
      int dark = 0;
      const uint8_t* px = lips.frame(f);
      for (int i = 0; i < kLipSize * kLipSize; ++i) dark += px[i] < 100;
      aperture[f] = dark;
    }
    CHECK(PearsonR(envelope, aperture) >= 0.8);
  }
  CHECK(speakers.size() == 4);

  // Regeneration with the same seed is byte-identical.
  const fs::path dir_b = FreshDir("gen_b");
  const auto again = data::GenerateToyCorpus(dir_b, 4, 8, 7);
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(ReadBytes(records[i].audio_path) == ReadBytes(again[i].audio_path));
    CHECK(ReadBytes(records[i].lips_path) == ReadBytes(again[i].lips_path));
    CHECK(ReadBytes(records[i].transcript_path) == ReadBytes(again[i].transcript_path));
  }
}

TEST_CASE("prepare: truncates long, drops short, reports bad records") {
  const fs::path gen = FreshDir("prep_gen");
  auto records = data::GenerateToyCorpus(gen, 2, 4, 3, 7.0);  // 7 s utterances
  // One short utterance (2.5 s) and one broken record.
  auto short_rec = data::GenerateToyCorpus(FreshDir("prep_short"), 2, 1, 4, 2.5);
  records.push_back(short_rec[0]);
  data::UtteranceRecord broken = records[0];
  broken.id = "zz_broken";
  broken.audio_path = (gen / "missing.wav").string();
  records.push_back(broken);

  const auto report = data::PrepareCorpus(records, FreshDir("prep_out"), 1);
  CHECK(report.records.size() == 4);
  CHECK(report.dropped_short == 1);
  REQUIRE(report.errors.size() == 1);
  CHECK(report.errors[0].find("zz_broken") != std::string::npos);
  for (const auto& r : report.records) {
    CHECK(r.duration_s == 3.0);
    CHECK(io::ReadWav(r.audio_path).samples.size() == data::kUtteranceSamples);
    CHECK(io::ReadLips(r.lips_path).frames == data::kUtteranceLipFrames);
  }

  // Same inputs, same seed: identical record list.
  const auto repeat = data::PrepareCorpus(records, FreshDir("prep_out2"), 1);
  REQUIRE(repeat.records.size() == report.records.size());
  for (size_t i = 0; i < repeat.records.size(); ++i) {
    CHECK(repeat.records[i].id == report.records[i].id);
  }
}

TEST_CASE("simulate: counts, cross-speaker pairs, split disjointness, uniform snr") {
  const auto raw = data::GenerateToyCorpus(FreshDir("sim_gen"), 6, 36, 11);
  const auto prepared = data::PrepareCorpus(raw, FreshDir("sim_prep"), 11).records;
  const data::SplitCounts counts{60, 20, 20};
  const auto splits = data::SimulateMixtures(prepared, counts, 11);
  CHECK(splits.train.size() == 60);
  CHECK(splits.valid.size() == 20);
  CHECK(splits.test.size() == 20);

  auto pair_key = [](const data::MixtureRecord& m) {
    return m.target.speaker_id < m.interferer.speaker_id
               ? m.target.speaker_id + "|" + m.interferer.speaker_id
               : m.interferer.speaker_id + "|" + m.target.speaker_id;
  };
  std::set<std::string> train_pairs, test_pairs;
  std::vector<double> snrs;
  for (const auto* split : {&splits.train, &splits.valid, &splits.test}) {
    for (const auto& m : *split) {
      CHECK(m.target.speaker_id != m.interferer.speaker_id);
      CHECK(m.snr_db >= data::kSnrLowDb);
      CHECK(m.snr_db <= data::kSnrHighDb);
      snrs.push_back(m.snr_db);
      if (split == &splits.test) {
        test_pairs.insert(pair_key(m));
      } else {
        train_pairs.insert(pair_key(m));
      }
      if (m.enrollment) {
        CHECK(m.enrollment->speaker_id == m.target.speaker_id);
        CHECK(m.enrollment->id != m.target.id);
      }
    }
  }
  for (const auto& p : test_pairs) CHECK(train_pairs.count(p) == 0);

  // KS uniformity on [-5, 5] at alpha = 0.01 (critical value 1.628/sqrt(n)).
  const double d = KsStatistic(snrs, data::kSnrLowDb, data::kSnrHighDb);
  CHECK(d < 1.628 / std::sqrt(double(snrs.size())));

  CHECK_THROWS_AS(
      data::SimulateMixtures({prepared[0], prepared[0]}, data::SplitCounts{1, 1, 1}, 1),
      VcseError);
}

TEST_CASE("manifest round trips") {
  const auto raw = data::GenerateToyCorpus(FreshDir("man_gen"), 4, 8, 13);
  const fs::path path = FreshDir("man") / "utts.jsonl";
  data::WriteUtteranceManifest(path, raw);
  const auto back = data::ReadUtteranceManifest(path);
  REQUIRE(back.size() == raw.size());
  CHECK(back[2].id == raw[2].id);
  CHECK(back[2].audio_path == raw[2].audio_path);
  CHECK(back[2].speaker_id == raw[2].speaker_id);

  const auto splits = data::SimulateMixtures(raw, data::SplitCounts{4, 2, 2}, 13);
  const fs::path mpath = FreshDir("man2") / "mix.jsonl";
  data::WriteMixtureManifest(mpath, splits.train);
  const auto mback = data::ReadMixtureManifest(mpath);
  REQUIRE(mback.size() == splits.train.size());
  CHECK(mback[1].target.id == splits.train[1].target.id);
  CHECK(mback[1].snr_db == splits.train[1].snr_db);
  CHECK(bool(mback[1].enrollment) == bool(splits.train[1].enrollment));
}

TEST_CASE("load_sample mixes additively at the recorded snr") {
  const auto raw = data::GenerateToyCorpus(FreshDir("load_gen"), 3, 6, 17);
  const auto splits = data::SimulateMixtures(raw, data::SplitCounts{6, 1, 1}, 17);
  for (const auto& record : splits.train) {
    const data::Sample s = data::LoadSample(record);
    CHECK(s.mixture.size() == 48000);
    CHECK(s.lips.frames == 75);
    CHECK((s.mixture - (s.target + s.interferer_scaled)).cwiseAbs().maxCoeff() == 0.0);
    const double achieved = 10 * std::log10(s.target.squaredNorm() /
                                            s.interferer_scaled.squaredNorm());
    CHECK(std::abs(achieved - record.snr_db) <= 1e-6);
  }
}

TEST_CASE("batch loader: reproducible order, reshuffled across epochs") {
  const auto raw = data::GenerateToyCorpus(FreshDir("batch_gen"), 4, 8, 19);
  const auto splits = data::SimulateMixtures(raw, data::SplitCounts{12, 1, 1}, 19);
  data::BatchLoader a(splits.train, 4, 23), b(splits.train, 4, 23), c(splits.train, 4, 24);
  auto ids = [](const std::vector<std::vector<data::MixtureRecord>>& batches) {
    std::vector<std::string> out;
    for (const auto& batch : batches)
      for (const auto& r : batch) out.push_back(r.target.id + "|" + r.interferer.id);
    return out;
  };
  CHECK(ids(a.EpochRecords(1)) == ids(b.EpochRecords(1)));
  CHECK(ids(a.EpochRecords(2)) == ids(b.EpochRecords(2)));
  CHECK(ids(a.EpochRecords(1)) != ids(c.EpochRecords(1)));
  CHECK(ids(a.EpochRecords(1)) != ids(a.EpochRecords(2)));
  CHECK(a.EpochRecords(1).size() == 3);
  CHECK(a.EpochRecords(1)[0].size() == 4);
}

TEST_CASE("materialize writes mixture wavs") {
  const auto raw = data::GenerateToyCorpus(FreshDir("mat_gen"), 4, 8, 29);
  const auto splits = data::SimulateMixtures(raw, data::SplitCounts{2, 1, 1}, 29);
  const fs::path out = FreshDir("mat_out");
  data::MaterializeMixtures(splits.train, out);
  CHECK(fs::exists(out / "mix0" / "mixture.wav"));
  CHECK(fs::exists(out / "mix1" / "target.wav"));
  CHECK(fs::exists(out / "mix1" / "interferer.wav"));
  const Waveform mix = io::ReadWav(out / "mix0" / "mixture.wav");
  CHECK(mix.samples.size() == 48000);
}
