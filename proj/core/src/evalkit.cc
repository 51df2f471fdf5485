// core/src/evalkit.cc

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

#include "vcse/evalkit.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "vcse/signals.h"

namespace vcse {
namespace eval {

namespace fs = std::filesystem;

data::MixtureRecord SwapRoles(const data::MixtureRecord& record) {
  data::MixtureRecord out;
  out.target = record.interferer;
  out.interferer = record.target;
  out.snr_db = -record.snr_db;
  // The swapped target has no disjoint enrollment in the record; score the
  // speaker-conditioned baseline with the utterance itself.
  out.enrollment = record.interferer;
  return out;
}

namespace {

Waveform AsWave(const VecD& samples, WaveRole role) {
  return Waveform{samples, kSampleRate, role};
}

struct DirectionScore {
  double si_snri, sdri;
};

DirectionScore ScoreDirection(const ExtractFn& fn, const data::Sample& sample, bool pit) {
  const std::vector<VecD> ests = fn(sample);
  Check(!ests.empty(), "estimator produced no output");
  const Waveform ref = AsWave(sample.target, WaveRole::kClean);
  const Waveform mix = AsWave(sample.mixture, WaveRole::kMixture);
  size_t pick = 0;
  if (pit && ests.size() > 1) {
    double best = -1e300;
    for (size_t k = 0; k < ests.size(); ++k) {
      const double v = signals::SiSnr(ref, AsWave(ests[k], WaveRole::kEstimate));
      if (v > best) {
        best = v;
        pick = k;
      }
    }
  }
  const Waveform est = AsWave(ests[pick], WaveRole::kEstimate);
  return {signals::Improvement(signals::Metric::kSiSnr, ref, est, mix),
          signals::Improvement(signals::Metric::kSdr, ref, est, mix)};
}

std::string Fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void WriteAtomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw DataError("cannot write report file: " + path.string());
    os.write(content.data(), std::streamsize(content.size()));
    if (!os) throw DataError("write failure: " + path.string());
  }
  fs::rename(tmp, path);
}

// Minimal 24-bit bottom-up BMP.
std::string RenderBarChart(const std::vector<EvalRow>& rows) {
  const int bar_w = 48, gap = 16, margin = 24, height = 220, axis = 20;
  const int width = margin * 2 + int(rows.size()) * (bar_w + gap) - gap;
  const int stride = (width * 3 + 3) / 4 * 4;
  std::vector<uint8_t> px(size_t(stride) * height, 255);

  auto put = [&](int x, int y, uint8_t r, uint8_t g, uint8_t b) {
    if (x < 0 || x >= width || y < 0 || y >= height) return;
    uint8_t* p = px.data() + size_t(height - 1 - y) * stride + size_t(x) * 3;
    p[0] = b;
    p[1] = g;
    p[2] = r;
  };

  double top = 1.0;
  for (const auto& r : rows) top = std::max(top, r.si_snri_db);
  const int plot_h = height - axis - margin;
  for (int x = 0; x < width; ++x) put(x, height - axis, 0, 0, 0);
  for (size_t i = 0; i < rows.size(); ++i) {
    const int h = std::max(1, int(std::lround(std::max(0.0, rows[i].si_snri_db) /
                                              top * plot_h)));
    const int x0 = margin + int(i) * (bar_w + gap);
    for (int x = x0; x < x0 + bar_w; ++x) {
      for (int y = height - axis - h; y < height - axis; ++y) put(x, y, 58, 98, 180);
    }
  }

  std::string out;
  const uint32_t data_size = uint32_t(px.size());
  const uint32_t file_size = 54 + data_size;
  auto u16 = [&](uint16_t v) { out.push_back(char(v)); out.push_back(char(v >> 8)); };
  auto u32 = [&](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char(v >> (8 * i)));
  };
  out += "BM";
  u32(file_size);
  u32(0);
  u32(54);
  u32(40);
  u32(uint32_t(width));
  u32(uint32_t(height));
  u16(1);
  u16(24);
  u32(0);
  u32(data_size);
  u32(2835);
  u32(2835);
  u32(0);
  u32(0);
  out.append(reinterpret_cast<const char*>(px.data()), px.size());
  return out;
}

}  // namespace

EvalRow EvaluateFn(const ExtractFn& fn, const std::vector<data::MixtureRecord>& test,
                   const std::string& model_name, const std::string& reference_kind,
                   bool pit) {
  Check(!test.empty(), "Evaluate: empty test split");
  EvalRow row;
  row.model_name = model_name;
  row.reference_kind = reference_kind;
  double si_sum = 0, sdr_sum = 0;
  for (const auto& record : test) {
    for (const auto& direction : {record, SwapRoles(record)}) {
      const DirectionScore s = ScoreDirection(fn, data::LoadSample(direction), pit);
      si_sum += s.si_snri;
      sdr_sum += s.sdri;
      ++row.n_utterances;
    }
  }
  row.si_snri_db = si_sum / row.n_utterances;
  row.sdri_db = sdr_sum / row.n_utterances;
  return row;
}

EvalRow Evaluate(const extract::Model& model, const std::vector<data::MixtureRecord>& test) {
  const extract::VariantKind kind = model.config().kind;
  ExtractFn fn = [&model](const data::Sample& sample) {
    extract::Model::Inputs in;
    in.mixture = sample.mixture;
    in.lips = &sample.lips;
    if (sample.enrollment.size() > 0) in.enrollment = &sample.enrollment;
    in.oracle_clean = &sample.target;
    const auto out = model.Forward(in, extract::ContextSource::kPreExtracted);
    std::vector<VecD> ests;
    for (const auto& e : out.estimates) {
      ests.push_back(e.value().row(0).transpose().cast<double>());
    }
    return ests;
  };
  return EvaluateFn(fn, test, extract::VariantName(kind), extract::ReferenceKind(kind),
                    kind == extract::VariantKind::kPit);
}

void RenderReport(const std::vector<EvalRow>& rows, const fs::path& out_dir) {
  if (rows.empty()) throw DataError("RenderReport: no rows");
  fs::create_directories(out_dir);

  size_t name_w = 5, ref_w = 9;
  for (const auto& r : rows) {
    name_w = std::max(name_w, r.model_name.size());
    ref_w = std::max(ref_w, r.reference_kind.size());
  }
  std::string table, csv = "model,reference,si_snri_db,sdri_db,n_utterances\n";
  auto pad = [](const std::string& s, size_t w) { return s + std::string(w - s.size(), ' '); };
  table += pad("Model", name_w) + "  " + pad("Reference", ref_w) +
           "  SI-SNRi    SDRi       N\n";
  table += std::string(name_w + ref_w + 30, '-') + "\n";
  for (const auto& r : rows) {
    const std::string si = Fmt4(r.si_snri_db), sdr = Fmt4(r.sdri_db);
    table += pad(r.model_name, name_w) + "  " + pad(r.reference_kind, ref_w) + "  " +
             pad(si, 9) + "  " + pad(sdr, 9) + "  " + std::to_string(r.n_utterances) + "\n";
    csv += r.model_name + "," + r.reference_kind + "," + si + "," + sdr + "," +
           std::to_string(r.n_utterances) + "\n";
  }

  WriteAtomic(out_dir / "report.txt", table);
  WriteAtomic(out_dir / "report.csv", csv);
  WriteAtomic(out_dir / "report.bmp", RenderBarChart(rows));
}

}  // namespace eval
}  // namespace vcse
