// core/include/vcse/trainkit.h
//
// Staged training: stage plans with freezing rules, the oracle-to-self-
// enrolled context switch, plateau/warmup learning-rate policies, adam,
// checkpoint files and newline-delimited run manifests.

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

#ifndef VCSE_TRAINKIT_H_
#define VCSE_TRAINKIT_H_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "vcse/datakit.h"
#include "vcse/extractors.h"

namespace vcse {
namespace train {

enum class LossTarget { kSav, kCtc, kSac };

struct StagePlan {
  int stage = 1;
  std::vector<std::string> trainable;  // parameter group names
  std::vector<std::string> frozen;
  extract::ContextSource context_source = extract::ContextSource::kNone;
  LossTarget loss_target = LossTarget::kSav;
};

// The 5-step schedule. Throws on stage outside 1..5.
StagePlan StagePlanFor(int stage);

// Ordered stage list a variant actually trains: single-stage baselines run
// {1}, oracle-context baselines run {2, 1} (ASR first), two-stage variants
// run all five.
std::vector<int> VariantStages(extract::VariantKind kind);

// ---------------------------------------------------------------------------
// Learning-rate policies
// ---------------------------------------------------------------------------

struct LrState {
  double lr = 1e-3;
  int bad_epochs = 0;
  bool halted = false;
};

// Halve after 3 consecutive validation-loss increases, halt after 6; the
// counter resets on any non-increase. Pure function of (state, history).
LrState PlateauPolicy(const LrState& state, const std::vector<double>& val_loss_history);

// lr = model_dim^-0.5 * min(step^-0.5, step * warmup_steps^-1.5), step >= 1.
double WarmupLr(int step, int model_dim, int warmup_steps);

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct AdamConfig {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double clip_norm = 5.0;  // global-norm gradient clipping; <= 0 disables
};

class Adam {
 public:
  explicit Adam(nn::ParamMap params, AdamConfig cfg = {});
  // Applies one update from accumulated gradients; `grad_scale` converts a
  // summed batch gradient into a mean. Parameters without a gradient entry
  // (frozen subgraphs) are left untouched.
  void Step(const nn::GradStore& grads, double lr, double grad_scale = 1.0);
  int step_count() const { return t_; }

 private:
  nn::ParamMap params_;
  std::vector<Mat> m_, v_;
  int t_ = 0;
  AdamConfig cfg_;
};

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

struct CheckpointInfo {
  std::string variant;
  int stage = 0;
  int epoch = 0;
  std::vector<std::string> param_names;
};

std::string CheckpointName(const std::string& variant, int stage, int epoch);

void SaveCheckpoint(const std::filesystem::path& path, const nn::ParamMap& params,
                    const std::string& variant, int stage, int epoch);
// Loads values into the given parameter set; names and shapes must match
// exactly (checkpoint/variant mismatch is an error).
CheckpointInfo LoadCheckpoint(const std::filesystem::path& path, nn::ParamMap& params);
CheckpointInfo PeekCheckpoint(const std::filesystem::path& path);

// Content hash over names, shapes and raw values (order-sensitive).
uint64_t ParamsHash(const nn::ParamMap& params);

// Highest-epoch `{variant}_{stage}_*.ckpt` under dir; empty path if none.
std::filesystem::path FindStageCheckpoint(const std::filesystem::path& dir,
                                          const std::string& variant, int stage);

// Loads the prerequisite checkpoint for `stage` of this variant into the
// model (no-op for the variant's first stage). Throws naming the missing
// stage otherwise.
void LoadPrerequisites(extract::Model& model, const std::filesystem::path& dir, int stage);

// ---------------------------------------------------------------------------
// Stage runner
// ---------------------------------------------------------------------------

struct EpochEvent {
  int stage = 0;
  int epoch = 0;
  std::string split;  // "train" | "valid"
  double loss = 0;
  double lr = 0;
};

struct RunOptions {
  int max_epochs = 30;
  int batch_size = 4;
  double lr0 = 1e-3;
  int warmup_steps = 200;     // CTC stage only
  uint64_t seed = 0;
  double time_budget_s = 0;   // 0 = unlimited; checked between epochs
  double stop_below_train = -1e30;  // early stop once train loss drops below
  std::function<void(const EpochEvent&)> on_event;
};

struct StageResult {
  std::vector<double> train_losses, val_losses;
  std::filesystem::path checkpoint;
  int epochs_run = 0;
  bool halted = false;
};

// Loss of one sample under the plan; fills `grads` (summed in) when given.
// Reused by the stage runner, the overfit check and unit tests.
double SampleLoss(const extract::Model& model, const StagePlan& plan,
                  const data::Sample& sample, nn::GradStore* grads);

// Trains one stage: freezes/unfreezes groups per the plan, optimizes with
// adam under the stage's LR policy, appends events to out_dir/events.jsonl
// and writes per-epoch checkpoints. Frozen groups are bit-identical after.
StageResult RunStage(extract::Model& model, const StagePlan& plan,
                     const std::vector<data::MixtureRecord>& train_records,
                     const std::vector<data::MixtureRecord>& valid_records,
                     const RunOptions& options, const std::filesystem::path& out_dir);

}  // namespace train
}  // namespace vcse

#endif  // VCSE_TRAINKIT_H_
