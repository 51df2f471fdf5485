// tests/test_trainkit.cc
//
// Staged training: stage plans and variant schedules, plateau/warmup learning
// rates, adam, checkpoint files, prerequisite loading and freeze integrity
// through a short real stage run.

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

#include "vcse/datakit.h"
#include "vcse/trainkit.h"

using namespace vcse;
namespace fs = std::filesystem;

namespace {

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "vcse_trainkit" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

extract::Model ToyModel(extract::VariantKind kind, uint64_t seed = 5) {
  extract::VariantConfig cfg;
  cfg.kind = kind;
  cfg.toy_scale = true;
  cfg.seed = seed;
  return extract::Model(cfg);
}

std::vector<data::MixtureRecord> TinyMixtures(const std::string& tag, int n_train) {
  const auto raw = data::GenerateToyCorpus(FreshDir(tag), 4, 8, 31);
  return data::SimulateMixtures(raw, data::SplitCounts{n_train, 1, 1}, 31).train;
}

}  // namespace

TEST_CASE("stage plans") {
  using extract::ContextSource;
  const auto p1 = train::StagePlanFor(1);
  CHECK(p1.trainable == std::vector<std::string>{"audio_visual"});
  CHECK(p1.loss_target == train::LossTarget::kSav);
  CHECK(p1.context_source == ContextSource::kNone);

  const auto p2 = train::StagePlanFor(2);
  CHECK(p2.trainable == std::vector<std::string>{"asr"});
  CHECK(p2.loss_target == train::LossTarget::kCtc);

  const auto p3 = train::StagePlanFor(3);
  CHECK(p3.trainable == std::vector<std::string>{"audio_contextual"});
  CHECK(p3.frozen == std::vector<std::string>{"audio_visual", "asr"});
  CHECK(p3.context_source == ContextSource::kCleanOracle);
  CHECK(p3.loss_target == train::LossTarget::kSac);

  const auto p4 = train::StagePlanFor(4);
  CHECK(p4.trainable == p3.trainable);
  CHECK(p4.frozen == p3.frozen);
  CHECK(p4.context_source == ContextSource::kPreExtracted);

  const auto p5 = train::StagePlanFor(5);
  CHECK(p5.trainable ==
        std::vector<std::string>{"audio_visual", "asr", "audio_contextual"});
  CHECK(p5.frozen.empty());
  CHECK(p5.context_source == ContextSource::kPreExtracted);

  CHECK_THROWS_AS(train::StagePlanFor(0), VcseError);
  CHECK_THROWS_AS(train::StagePlanFor(6), VcseError);
}

TEST_CASE("variant schedules") {
  using extract::VariantKind;
  CHECK(train::VariantStages(VariantKind::kPit) == std::vector<int>{1});
  CHECK(train::VariantStages(VariantKind::kAS) == std::vector<int>{1});
  CHECK(train::VariantStages(VariantKind::kAV) == std::vector<int>{1});
  CHECK(train::VariantStages(VariantKind::kAcOracle) == std::vector<int>{2, 1});
  CHECK(train::VariantStages(VariantKind::kAvcOracle) == std::vector<int>{2, 1});
  CHECK(train::VariantStages(VariantKind::kVcse) == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(train::VariantStages(VariantKind::kVcsev) == std::vector<int>{1, 2, 3, 4, 5});
}

TEST_CASE("plateau policy worked examples") {
  train::LrState s0;
  s0.lr = 0.001;

  const auto decreasing = train::PlateauPolicy(s0, {5, 4, 3, 2});
  CHECK(decreasing.lr == 0.001);
  CHECK(decreasing.bad_epochs == 0);
  CHECK_FALSE(decreasing.halted);

  const auto three_up = train::PlateauPolicy(s0, {3, 4, 5, 6});
  CHECK(three_up.lr == 0.0005);
  CHECK(three_up.bad_epochs == 3);
  CHECK_FALSE(three_up.halted);

  const auto six_up = train::PlateauPolicy(s0, {3, 4, 5, 6, 7, 8, 9});
  CHECK(six_up.halted);

  // The counter resets on any non-increase.
  const auto reset = train::PlateauPolicy(s0, {3, 4, 5, 5, 6, 7});
  CHECK(reset.lr == 0.001);
  CHECK(reset.bad_epochs == 2);
}

TEST_CASE("warmup schedule identities") {
  const int d = 32, w = 4000;
  // Continuity at the knee: both branches agree at step == warmup_steps.
  CHECK(train::WarmupLr(w, d, w) ==
        doctest::Approx(std::pow(d, -0.5) * std::pow(w, -0.5)).epsilon(1e-12));
  // Linear ramp before the knee.
  CHECK(train::WarmupLr(100, d, w) ==
        doctest::Approx(100.0 * train::WarmupLr(1, d, w)).epsilon(1e-12));
  // Inverse-sqrt decay after: half the peak at 4x warmup.
  CHECK(train::WarmupLr(4 * w, d, w) ==
        doctest::Approx(0.5 * train::WarmupLr(w, d, w)).epsilon(1e-12));
  // Strictly increasing up to the knee, strictly decreasing beyond.
  CHECK(train::WarmupLr(w - 1, d, w) < train::WarmupLr(w, d, w));
  CHECK(train::WarmupLr(w + 1, d, w) < train::WarmupLr(w, d, w));
  CHECK_THROWS_AS(train::WarmupLr(0, d, w), VcseError);
}

TEST_CASE("adam minimizes a quadratic and skips gradient-free params") {
  nn::Tensor x(Mat::Constant(1, 1, 5.0f), true);
  nn::Tensor frozen(Mat::Constant(1, 1, 2.0f), true);
  nn::ParamMap params{{"x", x}, {"frozen", frozen}};
  train::Adam adam(params);
  for (int i = 0; i < 2000; ++i) {
    nn::GradStore grads;
    // d/dx (x - 3)^2
    grads.Accum(x.node().get(), 1, 1)(0, 0) = 2 * (x.value()(0, 0) - 3.0f);
    adam.Step(grads, 0.01);
  }
  CHECK(std::abs(x.value()(0, 0) - 3.0f) < 1e-3);
  CHECK(frozen.value()(0, 0) == 2.0f);
  CHECK(adam.step_count() == 2000);
}

TEST_CASE("checkpoints: naming, round trip, peek, mismatch") {
  CHECK(train::CheckpointName("vcse", 3, 12) == "vcse_3_12.ckpt");

  extract::Model model = ToyModel(extract::VariantKind::kVcse);
  nn::ParamMap params = model.AllParams();
  const uint64_t hash_before = train::ParamsHash(params);
  const fs::path dir = FreshDir("ckpt");
  const fs::path path = dir / train::CheckpointName("vcse", 3, 12);
  train::SaveCheckpoint(path, params, "vcse", 3, 12);

  const auto peek = train::PeekCheckpoint(path);
  CHECK(peek.variant == "vcse");
  CHECK(peek.stage == 3);
  CHECK(peek.epoch == 12);
  CHECK(peek.param_names.size() == params.size());

  // Perturb every parameter, then restore from disk bit-exactly.
  for (auto& [name, p] : params) p.mutable_value().array() += 0.25f;
  CHECK(train::ParamsHash(params) != hash_before);
  const auto info = train::LoadCheckpoint(path, params);
  CHECK(info.epoch == 12);
  CHECK(train::ParamsHash(params) == hash_before);

  // A different variant's parameter set does not accept this checkpoint.
  extract::Model av = ToyModel(extract::VariantKind::kAV);
  nn::ParamMap av_params = av.AllParams();
  CHECK_THROWS_AS(train::LoadCheckpoint(path, av_params), DataError);

  // Corrupt magic is rejected.
  const fs::path bogus = dir / "bogus.ckpt";
  std::ofstream(bogus, std::ios::binary) << "NOPE!!!!";
  CHECK_THROWS_AS(train::PeekCheckpoint(bogus), DataError);
}

TEST_CASE("find_stage_checkpoint picks the highest epoch") {
  extract::Model model = ToyModel(extract::VariantKind::kAV);
  const nn::ParamMap params = model.AllParams();
  const fs::path dir = FreshDir("find");
  for (int epoch : {1, 7, 3}) {
    train::SaveCheckpoint(dir / train::CheckpointName("av", 1, epoch), params, "av", 1,
                          epoch);
  }
  CHECK(train::FindStageCheckpoint(dir, "av", 1).filename() == "av_1_7.ckpt");
  CHECK(train::FindStageCheckpoint(dir, "av", 2).empty());
  CHECK(train::FindStageCheckpoint(dir / "missing", "av", 1).empty());
}

TEST_CASE("load_prerequisites") {
  const fs::path dir = FreshDir("prereq");
  extract::Model model = ToyModel(extract::VariantKind::kVcse);

  // First stage of the schedule has no prerequisite.
  CHECK_NOTHROW(train::LoadPrerequisites(model, dir, 1));

  // Stage 3 needs the stage-2 checkpoint; the error names the missing stage.
  try {
    train::LoadPrerequisites(model, dir, 3);
    FAIL("expected a missing-prerequisite error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("stage 2") != std::string::npos);
  }

  // After writing it, loading succeeds and restores those exact values.
  extract::Model donor = ToyModel(extract::VariantKind::kVcse, 99);
  const nn::ParamMap donor_params = donor.AllParams();
  train::SaveCheckpoint(dir / train::CheckpointName("vcse", 2, 4), donor_params, "vcse",
                        2, 4);
  train::LoadPrerequisites(model, dir, 3);
  CHECK(train::ParamsHash(model.AllParams()) == train::ParamsHash(donor_params));
}

TEST_CASE("run_stage: freeze integrity, events and checkpoints on disk") {
  const auto records = TinyMixtures("run", 6);
  extract::Model model = ToyModel(extract::VariantKind::kVcse, 3);
  const uint64_t av_before = train::ParamsHash(model.ParamsGroup("audio_visual"));
  const uint64_t asr_before = train::ParamsHash(model.ParamsGroup("asr"));
  const uint64_t ac_before = train::ParamsHash(model.ParamsGroup("audio_contextual"));

  train::RunOptions options;
  options.max_epochs = 2;
  options.batch_size = 3;
  options.lr0 = 1e-3;
  options.seed = 17;
  std::vector<train::EpochEvent> events;
  options.on_event = [&](const train::EpochEvent& e) { events.push_back(e); };

  const fs::path out = FreshDir("run_out");
  const auto result = train::RunStage(model, train::StagePlanFor(3), records,
                                      {records[0]}, options, out);
  CHECK(result.epochs_run == 2);
  CHECK(result.train_losses.size() == 2);
  CHECK(result.val_losses.size() == 2);
  CHECK(fs::exists(result.checkpoint));
  CHECK(fs::exists(out / "events.jsonl"));
  CHECK(events.size() == 4);  // train + valid per epoch

  // Frozen groups are bit-identical; the trainable group moved.
  CHECK(train::ParamsHash(model.ParamsGroup("audio_visual")) == av_before);
  CHECK(train::ParamsHash(model.ParamsGroup("asr")) == asr_before);
  CHECK(train::ParamsHash(model.ParamsGroup("audio_contextual")) != ac_before);

  // The checkpoint matches the final in-memory state.
  extract::Model reload = ToyModel(extract::VariantKind::kVcse, 77);
  nn::ParamMap reload_params = reload.AllParams();
  train::LoadCheckpoint(result.checkpoint, reload_params);
  CHECK(train::ParamsHash(reload_params) == train::ParamsHash(model.AllParams()));
}

TEST_CASE("run_stage with the same seed reproduces the loss trajectory") {
  const auto records = TinyMixtures("det", 4);
  train::RunOptions options;
  options.max_epochs = 2;
  options.batch_size = 2;
  options.seed = 9;
  std::vector<double> first, second;
  for (std::vector<double>* sink : {&first, &second}) {
    extract::Model model = ToyModel(extract::VariantKind::kAV, 5);
    const auto result = train::RunStage(model, train::StagePlanFor(1), records, {},
                                        options, FreshDir("det_out"));
    *sink = result.train_losses;
  }
  CHECK(first == second);
}
