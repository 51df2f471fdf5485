// core/include/vcse/evalkit.h
//
// Evaluation harness: per-utterance SI-SNRi/SDRi averaged over a test split
// (both speakers of every mixture are scored as targets), plus report
// rendering (text table, CSV, bar-chart image).

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

#ifndef VCSE_EVALKIT_H_
#define VCSE_EVALKIT_H_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "vcse/extractors.h"
#include "vcse/trainkit.h"

namespace vcse {
namespace eval {

struct EvalRow {
  std::string model_name;
  std::string reference_kind;  // "-", "A_S", "V", "C (Oracle)", "V+C (Oracle)", "V+C"
  double si_snri_db = 0;
  double sdri_db = 0;
  int n_utterances = 0;
};

// Generic estimator hook: returns one estimate per output stream (two for
// the permutation-invariant baseline). Lets tests plug in identity/oracle
// "models" without a checkpoint.
using ExtractFn = std::function<std::vector<VecD>(const data::Sample&)>;

// Scores an estimator over the split. Every mixture is scored twice, once
// per speaker as target (the swapped direction reuses the same mixture up to
// scale, which both metrics are invariant to). With `pit`, metrics take the
// best output permutation per utterance.
EvalRow EvaluateFn(const ExtractFn& fn, const std::vector<data::MixtureRecord>& test,
                   const std::string& model_name, const std::string& reference_kind,
                   bool pit);

// Scores a trained variant model (inference with self-enrolled context;
// oracle variants consume the clean target by construction).
EvalRow Evaluate(const extract::Model& model, const std::vector<data::MixtureRecord>& test);

// Writes report.txt (aligned table), report.csv (4-decimal metrics, same
// numbers as the table) and report.bmp (deterministic SI-SNRi bar chart).
// Empty rows -> error before any file is touched; writes are atomic.
void RenderReport(const std::vector<EvalRow>& rows, const std::filesystem::path& out_dir);

// The MixtureRecord with target/interferer roles exchanged (enrollment, when
// present, becomes the new target's own utterance).
data::MixtureRecord SwapRoles(const data::MixtureRecord& record);

}  // namespace eval
}  // namespace vcse

#endif  // VCSE_EVALKIT_H_
