// core/src/datakit.cc

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

#include "vcse/datakit.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "vcse/signals.h"

namespace vcse {
namespace data {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Toy corpus synthesis
// ---------------------------------------------------------------------------

namespace {

constexpr double kSyllableSeconds = 0.5;

struct Syllable {
  char consonant, vowel;
  double f1, f2;        // vowel formant centers, Hz
  double burst;         // consonant onset noise level
  double amp = 1.0;     // per-syllable loudness
  double voiced = 0.45; // voiced fraction of the syllable slot
  bool silent = false;  // pause slot
};

const char kConsonants[] = {'B', 'K', 'T', 'M', 'S', 'N', 'D', 'G'};
// (vowel, F1, F2) rough monophthong chart values.
const struct { char v; double f1, f2; } kVowels[] = {
    {'A', 850, 1600}, {'E', 550, 1900}, {'I', 300, 2300}, {'O', 500, 1000}, {'U', 350, 800},
};

// Loudness, voicing length and pauses vary per syllable. Without this the
// amplitude contour would be (near-)identical across simultaneous talkers —
// every slot would carry the same raised cosine — and the lip aperture could
// not identify which speaker in a mixture is the target.
Syllable DrawSyllable(Rng& rng) {
  std::uniform_int_distribution<int> ci(0, int(std::size(kConsonants)) - 1);
  std::uniform_int_distribution<int> vi(0, int(std::size(kVowels)) - 1);
  std::uniform_real_distribution<double> amp_d(0.18, 1.0), voiced_d(0.24, 0.68);
  std::uniform_real_distribution<double> pause_d(0.0, 1.0);
  const auto& vow = kVowels[vi(rng)];
  const char c = kConsonants[ci(rng)];
  const double burst = (c == 'S' || c == 'T' || c == 'K') ? 0.25 : 0.08;
  Syllable s{c, vow.v, vow.f1, vow.f2, burst};
  s.amp = amp_d(rng);
  s.voiced = voiced_d(rng);
  s.silent = pause_d(rng) < 0.28;
  return s;
}

// Raised-cosine envelope over the syllable's voiced fraction, zero in the
// inter-syllable gap (and through pause slots entirely).
double SyllableEnvelope(const Syllable& s, double t_in_syllable) {
  const double voiced = s.voiced * kSyllableSeconds;
  if (s.silent || t_in_syllable >= voiced) return 0.0;
  return s.amp * (0.5 - 0.5 * std::cos(2.0 * M_PI * t_in_syllable / voiced));
}

VecD SynthesizeUtterance(const std::vector<Syllable>& syllables, double f0_base,
                         double vibrato_hz, Eigen::Index n_samples, Rng& rng) {
  VecD x = VecD::Zero(n_samples);
  std::normal_distribution<double> noise(0.0, 1.0);
  double phase = 0.0;
  for (Eigen::Index n = 0; n < n_samples; ++n) {
    const double t = double(n) / kSampleRate;
    const size_t syl = std::min(size_t(t / kSyllableSeconds), syllables.size() - 1);
    const double ts = t - double(syl) * kSyllableSeconds;
    const Syllable& s = syllables[syl];
    const double env = SyllableEnvelope(s, ts);

    const double f0 = f0_base * (1.0 + 0.04 * std::sin(2.0 * M_PI * vibrato_hz * t));
    phase += 2.0 * M_PI * f0 / kSampleRate;
    double v = 0.0;
    for (int h = 1; h * f0 < 3800.0; ++h) {
      const double f = h * f0;
      const double a = std::exp(-std::pow((f - s.f1) / 220.0, 2)) +
                       0.7 * std::exp(-std::pow((f - s.f2) / 260.0, 2)) + 0.06;
      v += a * std::sin(h * phase);
    }
    if (ts < 0.04 && !s.silent) v += s.amp * s.burst * noise(rng);  // consonant onset
    x[n] = env * v;
  }
  const double peak = x.cwiseAbs().maxCoeff();
  if (peak > 0) x *= 0.5 / peak;
  return x;
}

LipSequence RenderLips(const VecD& audio, int n_frames) {
  const Eigen::Index hop = kSampleRate / kVideoFps;  // 640 samples per frame
  VecD env(n_frames);
  for (int f = 0; f < n_frames; ++f) {
    const Eigen::Index a = std::min(Eigen::Index(f) * hop, audio.size());
    const Eigen::Index n = std::min(hop, audio.size() - a);
    env[f] = n > 0 ? std::sqrt(audio.segment(a, n).squaredNorm() / double(n)) : 0.0;
  }
  const double peak = env.maxCoeff();
  if (peak > 0) env /= peak;

  LipSequence lips;
  lips.frames = n_frames;
  lips.pixels.assign(size_t(n_frames) * kLipSize * kLipSize, 200);
  const double cx = kLipSize / 2.0, cy = kLipSize / 2.0, a_axis = 34.0;
  for (int f = 0; f < n_frames; ++f) {
    const double b_axis = 3.0 + 27.0 * env[f];  // mouth opening tracks envelope
    uint8_t* px = lips.pixels.data() + size_t(f) * kLipSize * kLipSize;
    for (int y = 0; y < kLipSize; ++y) {
      for (int x = 0; x < kLipSize; ++x) {
        const double dx = (x - cx) / a_axis, dy = (y - cy) / b_axis;
        if (dx * dx + dy * dy <= 1.0) px[y * kLipSize + x] = 30;
      }
    }
  }
  return lips;
}

json ToJson(const UtteranceRecord& r) {
  return json{{"id", r.id},
              {"audio_path", r.audio_path},
              {"lips_path", r.lips_path},
              {"transcript_path", r.transcript_path},
              {"speaker_id", r.speaker_id},
              {"duration_s", r.duration_s}};
}

UtteranceRecord UtteranceFromJson(const json& j) {
  UtteranceRecord r;
  r.id = j.at("id").get<std::string>();
  r.audio_path = j.at("audio_path").get<std::string>();
  r.lips_path = j.at("lips_path").get<std::string>();
  r.transcript_path = j.at("transcript_path").get<std::string>();
  r.speaker_id = j.at("speaker_id").get<std::string>();
  r.duration_s = j.at("duration_s").get<double>();
  return r;
}

json ToJson(const MixtureRecord& r) {
  json j{{"target", ToJson(r.target)},
         {"interferer", ToJson(r.interferer)},
         {"snr_db", r.snr_db}};
  j["enrollment"] = r.enrollment ? ToJson(*r.enrollment) : json(nullptr);
  return j;
}

MixtureRecord MixtureFromJson(const json& j) {
  MixtureRecord r;
  r.target = UtteranceFromJson(j.at("target"));
  r.interferer = UtteranceFromJson(j.at("interferer"));
  r.snr_db = j.at("snr_db").get<double>();
  if (!j.at("enrollment").is_null()) r.enrollment = UtteranceFromJson(j.at("enrollment"));
  return r;
}

}  // namespace

std::vector<UtteranceRecord> GenerateToyCorpus(const fs::path& out_dir, int n_speakers,
                                               int n_utterances, uint64_t seed,
                                               double duration_s) {
  Check(n_speakers >= 2, "GenerateToyCorpus: need at least 2 speakers");
  fs::create_directories(out_dir);
  Rng rng(seed);

  // Per-speaker voice: distinct f0 base plus a seeded vibrato rate.
  std::vector<double> f0(size_t(n_speakers), 0.0), vib(size_t(n_speakers), 0.0);
  std::uniform_real_distribution<double> jitter(-8.0, 8.0), vib_d(3.0, 6.5);
  for (int s = 0; s < n_speakers; ++s) {
    f0[size_t(s)] = 105.0 + 38.0 * s + jitter(rng);
    vib[size_t(s)] = vib_d(rng);
  }

  const Eigen::Index n_samples = Eigen::Index(std::llround(duration_s * kSampleRate));
  const int n_frames = int(std::llround(duration_s * kVideoFps));
  const int n_syll = std::max(1, int(std::ceil(duration_s / kSyllableSeconds)));

  std::vector<UtteranceRecord> records;
  for (int u = 0; u < n_utterances; ++u) {
    const int spk = u % n_speakers;
    std::vector<Syllable> syllables;
    std::string transcript;
    for (int k = 0; k < n_syll; ++k) {
      syllables.push_back(DrawSyllable(rng));
      if (k == 0) syllables.back().silent = false;  // never fully silent
      if (syllables.back().silent) continue;
      if (!transcript.empty()) transcript += ' ';
      transcript += syllables.back().consonant;
      transcript += syllables.back().vowel;
    }
    const VecD audio = SynthesizeUtterance(syllables, f0[size_t(spk)], vib[size_t(spk)],
                                           n_samples, rng);
    const LipSequence lips = RenderLips(audio, n_frames);

    UtteranceRecord r;
    r.id = "utt" + std::to_string(u) + "_spk" + std::to_string(spk);
    r.speaker_id = "spk" + std::to_string(spk);
    r.duration_s = duration_s;
    const fs::path dir = out_dir / r.id;
    fs::create_directories(dir);
    r.audio_path = (dir / "audio.wav").string();
    r.lips_path = (dir / "lips.bin").string();
    r.transcript_path = (dir / "transcript.txt").string();
    io::WriteWav(r.audio_path, Waveform{audio, kSampleRate, WaveRole::kClean});
    io::WriteLips(r.lips_path, lips);
    io::WriteText(r.transcript_path, transcript);
    records.push_back(std::move(r));
  }
  WriteUtteranceManifest(out_dir / "raw_manifest.jsonl", records);
  return records;
}

PrepareReport PrepareCorpus(const std::vector<UtteranceRecord>& raw,
                            const fs::path& out_dir, uint64_t seed) {
  (void)seed;  // recorded by callers into the run manifest; order is sorted
  fs::create_directories(out_dir);
  PrepareReport report;
  std::vector<UtteranceRecord> sorted = raw;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const auto& r : sorted) {
    try {
      Waveform audio = io::ReadWav(r.audio_path);
      LipSequence lips = io::ReadLips(r.lips_path);
      const std::string transcript = io::ReadText(r.transcript_path);
      const double audio_s = audio.duration_s();
      const double video_s = double(lips.frames) / lips.fps;
      if (std::abs(audio_s - video_s) > 0.05) {
        throw DataError("audio/video duration mismatch");
      }
      if (audio.samples.size() < kUtteranceSamples || lips.frames < kUtteranceLipFrames) {
        ++report.dropped_short;
        continue;
      }
      audio.samples.conservativeResize(kUtteranceSamples);
      lips.pixels.resize(size_t(kUtteranceLipFrames) * kLipSize * kLipSize);
      lips.frames = kUtteranceLipFrames;

      UtteranceRecord out = r;
      out.duration_s = kUtteranceSeconds;
      const fs::path dir = out_dir / r.id;
      fs::create_directories(dir);
      out.audio_path = (dir / "audio.wav").string();
      out.lips_path = (dir / "lips.bin").string();
      out.transcript_path = (dir / "transcript.txt").string();
      io::WriteWav(out.audio_path, audio);
      io::WriteLips(out.lips_path, lips);
      io::WriteText(out.transcript_path, transcript);
      report.records.push_back(std::move(out));
    } catch (const std::exception& e) {
      report.errors.push_back(r.id + ": " + e.what());
    }
  }
  WriteUtteranceManifest(out_dir / "manifest.jsonl", report.records);
  return report;
}

MixtureSplits SimulateMixtures(const std::vector<UtteranceRecord>& records,
                               const SplitCounts& counts, uint64_t seed) {
  // Group utterances by speaker.
  std::vector<std::string> speakers;
  std::vector<std::vector<const UtteranceRecord*>> by_speaker;
  for (const auto& r : records) {
    auto it = std::find(speakers.begin(), speakers.end(), r.speaker_id);
    size_t idx;
    if (it == speakers.end()) {
      speakers.push_back(r.speaker_id);
      by_speaker.emplace_back();
      idx = speakers.size() - 1;
    } else {
      idx = size_t(it - speakers.begin());
    }
    by_speaker[idx].push_back(&r);
  }
  Check(speakers.size() >= 2, "SimulateMixtures: need at least 2 distinct speakers");

  // Assign unordered speaker pairs to splits: test pairs are disjoint from
  // train/valid pairs.
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < int(speakers.size()); ++i) {
    for (int j = i + 1; j < int(speakers.size()); ++j) pairs.emplace_back(i, j);
  }
  Rng rng(seed);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  const size_t n_test_pairs = std::max<size_t>(1, pairs.size() / 3);
  Check(pairs.size() - n_test_pairs >= 1, "SimulateMixtures: too few speaker pairs");
  std::vector<std::pair<int, int>> test_pairs(pairs.begin(), pairs.begin() + long(n_test_pairs));
  std::vector<std::pair<int, int>> train_pairs(pairs.begin() + long(n_test_pairs), pairs.end());

  std::uniform_real_distribution<double> snr(kSnrLowDb, kSnrHighDb);
  auto draw = [&](const std::vector<std::pair<int, int>>& from_pairs) {
    std::uniform_int_distribution<size_t> pair_d(0, from_pairs.size() - 1);
    auto [a, b] = from_pairs[pair_d(rng)];
    if (std::uniform_int_distribution<int>(0, 1)(rng) == 1) std::swap(a, b);
    const auto& tgt_list = by_speaker[size_t(a)];
    const auto& int_list = by_speaker[size_t(b)];
    std::uniform_int_distribution<size_t> ti(0, tgt_list.size() - 1);
    std::uniform_int_distribution<size_t> ii(0, int_list.size() - 1);
    MixtureRecord m;
    m.target = *tgt_list[ti(rng)];
    m.interferer = *int_list[ii(rng)];
    m.snr_db = snr(rng);
    if (tgt_list.size() > 1) {
      // Enrollment: a different utterance from the target speaker.
      const UtteranceRecord* e = nullptr;
      do {
        e = tgt_list[ti(rng)];
      } while (e->id == m.target.id);
      m.enrollment = *e;
    }
    return m;
  };

  MixtureSplits splits;
  for (int i = 0; i < counts.train; ++i) splits.train.push_back(draw(train_pairs));
  for (int i = 0; i < counts.valid; ++i) splits.valid.push_back(draw(train_pairs));
  for (int i = 0; i < counts.test; ++i) splits.test.push_back(draw(test_pairs));
  return splits;
}

void WriteUtteranceManifest(const fs::path& path,
                            const std::vector<UtteranceRecord>& records) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write manifest: " + path.string());
  for (const auto& r : records) os << ToJson(r).dump() << "\n";
}

std::vector<UtteranceRecord> ReadUtteranceManifest(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read manifest: " + path.string());
  std::vector<UtteranceRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) out.push_back(UtteranceFromJson(json::parse(line)));
  }
  return out;
}

void WriteMixtureManifest(const fs::path& path, const std::vector<MixtureRecord>& records) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write manifest: " + path.string());
  for (const auto& r : records) os << ToJson(r).dump() << "\n";
}

std::vector<MixtureRecord> ReadMixtureManifest(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read manifest: " + path.string());
  std::vector<MixtureRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) out.push_back(MixtureFromJson(json::parse(line)));
  }
  return out;
}

void MaterializeMixtures(const std::vector<MixtureRecord>& records, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  int idx = 0;
  for (const auto& r : records) {
    const Sample s = LoadSample(r);
    const fs::path base = out_dir / ("mix" + std::to_string(idx++));
    fs::create_directories(base);
    io::WriteWav(base / "mixture.wav", Waveform{s.mixture, kSampleRate, WaveRole::kMixture});
    io::WriteWav(base / "target.wav", Waveform{s.target, kSampleRate, WaveRole::kClean});
    io::WriteWav(base / "interferer.wav",
                 Waveform{s.interferer_scaled, kSampleRate, WaveRole::kClean});
  }
}

Sample LoadSample(const MixtureRecord& record) {
  Sample s;
  s.id = record.target.id + "+" + record.interferer.id;
  s.snr_db = record.snr_db;
  try {
    const Waveform target = io::ReadWav(record.target.audio_path);
    const Waveform interferer = io::ReadWav(record.interferer.audio_path);
    auto [mixture, scaled] = signals::MixAtSnr(target, interferer, record.snr_db);
    s.mixture = mixture.samples;
    s.target = target.samples;
    s.interferer_scaled = scaled.samples;
    s.lips = io::ReadLips(record.target.lips_path);
    s.transcript = io::ReadText(record.target.transcript_path);
    if (record.enrollment) s.enrollment = io::ReadWav(record.enrollment->audio_path).samples;
  } catch (const std::exception& e) {
    throw DataError("record " + s.id + ": " + e.what());
  }
  return s;
}

BatchLoader::BatchLoader(std::vector<MixtureRecord> records, int batch_size, uint64_t seed)
    : records_(std::move(records)), batch_size_(batch_size), seed_(seed) {
  Check(batch_size_ >= 1, "BatchLoader: batch size");
}

std::vector<std::vector<MixtureRecord>> BatchLoader::EpochRecords(int epoch) const {
  std::vector<size_t> order(records_.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed_ * 0x9e3779b97f4a7c15ull + uint64_t(epoch) + 1);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<MixtureRecord>> batches;
  for (size_t i = 0; i < order.size(); i += size_t(batch_size_)) {
    std::vector<MixtureRecord> batch;
    for (size_t j = i; j < std::min(order.size(), i + size_t(batch_size_)); ++j) {
      batch.push_back(records_[order[j]]);
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::vector<std::vector<Sample>> BatchLoader::Epoch(int epoch) const {
  std::vector<std::vector<Sample>> out;
  for (const auto& batch : EpochRecords(epoch)) {
    std::vector<Sample> samples;
    samples.reserve(batch.size());
    for (const auto& r : batch) samples.push_back(LoadSample(r));
    out.push_back(std::move(samples));
  }
  return out;
}

}  // namespace data
}  // namespace vcse
