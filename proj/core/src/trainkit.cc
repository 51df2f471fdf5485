// core/src/trainkit.cc

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

#include "vcse/trainkit.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "vcse/ops.h"
#include "vcse/signals.h"

namespace vcse {
namespace train {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Stage plans
// ---------------------------------------------------------------------------

StagePlan StagePlanFor(int stage) {
  Check(stage >= 1 && stage <= 5, "stage must be in 1..5");
  StagePlan plan;
  plan.stage = stage;
  switch (stage) {
    case 1:
      plan.trainable = {"audio_visual"};
      plan.loss_target = LossTarget::kSav;
      plan.context_source = extract::ContextSource::kNone;
      break;
    case 2:
      plan.trainable = {"asr"};
      plan.frozen = {"audio_visual"};
      plan.loss_target = LossTarget::kCtc;
      plan.context_source = extract::ContextSource::kNone;
      break;
    case 3:
      plan.trainable = {"audio_contextual"};
      plan.frozen = {"audio_visual", "asr"};
      plan.loss_target = LossTarget::kSac;
      plan.context_source = extract::ContextSource::kCleanOracle;
      break;
    case 4:
      plan.trainable = {"audio_contextual"};
      plan.frozen = {"audio_visual", "asr"};
      plan.loss_target = LossTarget::kSac;
      plan.context_source = extract::ContextSource::kPreExtracted;
      break;
    case 5:
      plan.trainable = {"audio_visual", "asr", "audio_contextual"};
      plan.loss_target = LossTarget::kSac;
      plan.context_source = extract::ContextSource::kPreExtracted;
      break;
  }
  return plan;
}

std::vector<int> VariantStages(extract::VariantKind kind) {
  using extract::VariantKind;
  switch (kind) {
    case VariantKind::kPit:
    case VariantKind::kAS:
    case VariantKind::kAV:
      return {1};
    case VariantKind::kAcOracle:
    case VariantKind::kAvcOracle:
      return {2, 1};  // ASR pretraining precedes the extraction stage
    case VariantKind::kVcse:
    case VariantKind::kVcsev:
      return {1, 2, 3, 4, 5};
  }
  throw VcseError("unknown variant kind");
}

// ---------------------------------------------------------------------------
// Learning-rate policies
// ---------------------------------------------------------------------------

LrState PlateauPolicy(const LrState& state, const std::vector<double>& val_loss_history) {
  Check(!val_loss_history.empty(), "plateau policy needs a non-empty history");
  LrState out = state;
  for (size_t i = 1; i < val_loss_history.size(); ++i) {
    if (val_loss_history[i] > val_loss_history[i - 1]) {
      ++out.bad_epochs;
      if (out.bad_epochs == 3) out.lr *= 0.5;
      if (out.bad_epochs >= 6) out.halted = true;
    } else {
      out.bad_epochs = 0;
    }
  }
  return out;
}

double WarmupLr(int step, int model_dim, int warmup_steps) {
  Check(step >= 1 && model_dim >= 1 && warmup_steps >= 1, "warmup_lr arguments");
  return std::pow(double(model_dim), -0.5) *
         std::min(std::pow(double(step), -0.5),
                  double(step) * std::pow(double(warmup_steps), -1.5));
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

Adam::Adam(nn::ParamMap params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& [name, p] : params_) {
    m_.push_back(Mat::Zero(p.rows(), p.cols()));
    v_.push_back(Mat::Zero(p.rows(), p.cols()));
  }
}

void Adam::Step(const nn::GradStore& grads, double lr, double grad_scale) {
  ++t_;
  double sq_norm = 0;
  for (const auto& [name, p] : params_) {
    if (const Mat* g = grads.Find(p.node().get())) {
      sq_norm += double(g->squaredNorm()) * grad_scale * grad_scale;
    }
  }
  double clip_scale = 1.0;
  const double norm = std::sqrt(sq_norm);
  if (cfg_.clip_norm > 0 && norm > cfg_.clip_norm) clip_scale = cfg_.clip_norm / norm;

  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i].second;
    const Mat* g = grads.Find(p.node().get());
    if (g == nullptr) continue;
    const Mat gs = (*g) * Scalar(grad_scale * clip_scale);
    m_[i] = Scalar(cfg_.beta1) * m_[i] + Scalar(1.0 - cfg_.beta1) * gs;
    v_[i] = Scalar(cfg_.beta2) * v_[i] +
            Scalar(1.0 - cfg_.beta2) * gs.cwiseProduct(gs).eval();
    const Mat m_hat = m_[i] / Scalar(bc1);
    const Mat v_hat = v_[i] / Scalar(bc2);
    p.mutable_value() -=
        (Scalar(lr) * m_hat.array() / (v_hat.array().sqrt() + Scalar(cfg_.eps))).matrix();
  }
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

uint64_t ParamsHash(const nn::ParamMap& params) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& [name, p] : params) {
    h = Fnv1a64(name.data(), name.size(), h);
    const int64_t shape[2] = {p.rows(), p.cols()};
    h = Fnv1a64(shape, sizeof(shape), h);
    h = Fnv1a64(p.value().data(), size_t(p.value().size()) * sizeof(Scalar), h);
  }
  return h;
}

std::string CheckpointName(const std::string& variant, int stage, int epoch) {
  return variant + "_" + std::to_string(stage) + "_" + std::to_string(epoch) + ".ckpt";
}

namespace {
constexpr char kCkptMagic[4] = {'V', 'C', 'K', 'P'};

void WriteU32(std::ofstream& os, uint32_t v) {
  char b[4] = {char(v), char(v >> 8), char(v >> 16), char(v >> 24)};
  os.write(b, 4);
}

uint32_t ReadU32(std::ifstream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

json ReadManifest(std::ifstream& is, const fs::path& path) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kCkptMagic, 4) != 0) {
    throw DataError("not a checkpoint file: " + path.string());
  }
  const uint32_t len = ReadU32(is);
  std::string text(len, '\0');
  is.read(text.data(), len);
  if (!is) throw DataError("truncated checkpoint: " + path.string());
  return json::parse(text);
}
}  // namespace

void SaveCheckpoint(const fs::path& path, const nn::ParamMap& params,
                    const std::string& variant, int stage, int epoch) {
  json manifest{{"format", 1},
                {"variant", variant},
                {"stage", stage},
                {"epoch", epoch},
                {"hash", ParamsHash(params)}};
  json plist = json::array();
  for (const auto& [name, p] : params) {
    plist.push_back(json{{"name", name}, {"rows", p.rows()}, {"cols", p.cols()}});
  }
  manifest["params"] = std::move(plist);
  const std::string text = manifest.dump();

  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw DataError("cannot write checkpoint: " + path.string());
    os.write(kCkptMagic, 4);
    WriteU32(os, uint32_t(text.size()));
    os.write(text.data(), std::streamsize(text.size()));
    for (const auto& [name, p] : params) {
      os.write(reinterpret_cast<const char*>(p.value().data()),
               std::streamsize(size_t(p.value().size()) * sizeof(Scalar)));
    }
    if (!os) throw DataError("write failure: " + path.string());
  }
  fs::rename(tmp, path);
}

CheckpointInfo PeekCheckpoint(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read checkpoint: " + path.string());
  const json manifest = ReadManifest(is, path);
  CheckpointInfo info;
  info.variant = manifest.at("variant").get<std::string>();
  info.stage = manifest.at("stage").get<int>();
  info.epoch = manifest.at("epoch").get<int>();
  for (const auto& p : manifest.at("params")) {
    info.param_names.push_back(p.at("name").get<std::string>());
  }
  return info;
}

CheckpointInfo LoadCheckpoint(const fs::path& path, nn::ParamMap& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read checkpoint: " + path.string());
  const json manifest = ReadManifest(is, path);
  const auto& plist = manifest.at("params");
  if (plist.size() != params.size()) {
    throw DataError("checkpoint/variant mismatch: " + path.string() + " holds " +
                    std::to_string(plist.size()) + " parameters, model has " +
                    std::to_string(params.size()));
  }
  CheckpointInfo info;
  info.variant = manifest.at("variant").get<std::string>();
  info.stage = manifest.at("stage").get<int>();
  info.epoch = manifest.at("epoch").get<int>();
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& entry = plist[i];
    auto& [name, p] = params[i];
    if (entry.at("name").get<std::string>() != name ||
        entry.at("rows").get<Eigen::Index>() != p.rows() ||
        entry.at("cols").get<Eigen::Index>() != p.cols()) {
      throw DataError("checkpoint/variant mismatch at parameter '" + name + "': " +
                      path.string());
    }
    info.param_names.push_back(name);
    is.read(reinterpret_cast<char*>(p.mutable_value().data()),
            std::streamsize(size_t(p.value().size()) * sizeof(Scalar)));
  }
  if (!is) throw DataError("truncated checkpoint: " + path.string());
  const uint64_t expected = manifest.at("hash").get<uint64_t>();
  if (ParamsHash(params) != expected) {
    throw DataError("checkpoint hash mismatch: " + path.string());
  }
  return info;
}

fs::path FindStageCheckpoint(const fs::path& dir, const std::string& variant, int stage) {
  const std::string prefix = variant + "_" + std::to_string(stage) + "_";
  fs::path best;
  int best_epoch = -1;
  if (!fs::exists(dir)) return best;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(prefix, 0) != 0 || entry.path().extension() != ".ckpt") continue;
    const int epoch = std::atoi(name.c_str() + prefix.size());
    if (epoch > best_epoch) {
      best_epoch = epoch;
      best = entry.path();
    }
  }
  return best;
}

void LoadPrerequisites(extract::Model& model, const fs::path& dir, int stage) {
  const std::vector<int> stages = VariantStages(model.config().kind);
  const auto it = std::find(stages.begin(), stages.end(), stage);
  Check(it != stages.end(), "stage " + std::to_string(stage) + " is not part of the " +
                                extract::VariantName(model.config().kind) + " schedule");
  if (it == stages.begin()) return;
  const int prev = *(it - 1);
  const fs::path ckpt = FindStageCheckpoint(dir, extract::VariantName(model.config().kind), prev);
  if (ckpt.empty()) {
    throw DataError("stage " + std::to_string(stage) + " requires the stage " +
                    std::to_string(prev) + " checkpoint, none found under " + dir.string());
  }
  nn::ParamMap params = model.AllParams();
  LoadCheckpoint(ckpt, params);
}

// ---------------------------------------------------------------------------
// Stage runner
// ---------------------------------------------------------------------------

double SampleLoss(const extract::Model& model, const StagePlan& plan,
                  const data::Sample& sample, nn::GradStore* grads) {
  nn::Tensor loss;
  if (plan.loss_target == LossTarget::kCtc) {
    // ASR pretraining runs on the clean target speech.
    nn::Tensor logits = model.asr_encoder().Logits(model.asr_encoder().Encode(sample.target));
    const std::vector<int> target =
        model.asr_encoder().vocab().Encode(asr::NormalizeTranscript(sample.transcript));
    loss = asr::CtcLoss(logits, target);
  } else {
    extract::Model::Inputs in;
    in.mixture = sample.mixture;
    in.lips = &sample.lips;
    if (sample.enrollment.size() > 0) in.enrollment = &sample.enrollment;
    in.oracle_clean = &sample.target;
    const auto out = model.Forward(in, plan.context_source);
    if (model.config().kind == extract::VariantKind::kPit) {
      // Differentiable PIT: evaluate both assignments, keep the better one.
      nn::Tensor a = nn::Add(signals::SiSnrLossOp(out.estimates[0], sample.target),
                             signals::SiSnrLossOp(out.estimates[1], sample.interferer_scaled));
      nn::Tensor b = nn::Add(signals::SiSnrLossOp(out.estimates[0], sample.interferer_scaled),
                             signals::SiSnrLossOp(out.estimates[1], sample.target));
      loss = a.value()(0, 0) <= b.value()(0, 0) ? a : b;
      loss = nn::Scale(loss, Scalar(0.5));
    } else {
      const nn::Tensor& est = plan.loss_target == LossTarget::kSav && out.s_av.defined()
                                  ? out.s_av
                                  : out.estimates[0];
      loss = signals::SiSnrLossOp(est, sample.target);
    }
  }
  if (grads != nullptr) grads->Add(nn::Backward(loss));
  return double(loss.value()(0, 0));
}

namespace {

void ApplyFreezing(extract::Model& model, const StagePlan& plan) {
  for (const auto& group : model.Groups()) {
    nn::ParamMap params = model.ParamsGroup(group);
    const bool trainable = std::find(plan.trainable.begin(), plan.trainable.end(), group) !=
                           plan.trainable.end();
    nn::SetTrainable(params, trainable);
  }
}

}  // namespace

StageResult RunStage(extract::Model& model, const StagePlan& plan,
                     const std::vector<data::MixtureRecord>& train_records,
                     const std::vector<data::MixtureRecord>& valid_records,
                     const RunOptions& options, const fs::path& out_dir) {
  Check(!train_records.empty(), "RunStage: empty training split");
  fs::create_directories(out_dir);
  const std::string variant = extract::VariantName(model.config().kind);
  const auto t0 = std::chrono::steady_clock::now();

  ApplyFreezing(model, plan);
  // Freeze-integrity bookkeeping: frozen groups must come out bit-identical.
  std::vector<std::pair<std::string, uint64_t>> frozen_hashes;
  for (const auto& group : model.Groups()) {
    if (std::find(plan.trainable.begin(), plan.trainable.end(), group) ==
        plan.trainable.end()) {
      frozen_hashes.emplace_back(group, ParamsHash(model.ParamsGroup(group)));
    }
  }

  nn::ParamMap trainable;
  for (const auto& group : plan.trainable) {
    if (std::find(model.Groups().begin(), model.Groups().end(), group) ==
        model.Groups().end()) {
      continue;  // plan names a module this variant does not instantiate
    }
    nn::ParamMap part = model.ParamsGroup(group);
    trainable.insert(trainable.end(), part.begin(), part.end());
  }
  Check(!trainable.empty(), "RunStage: nothing to train for this variant/stage");
  Adam adam(trainable);

  data::BatchLoader loader(train_records, options.batch_size, options.seed);
  std::ofstream events(out_dir / "events.jsonl", std::ios::app);

  const bool warmup_schedule = plan.loss_target == LossTarget::kCtc;
  LrState lr_state;
  lr_state.lr = options.lr0;
  int step = 0;

  StageResult result;
  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    double train_sum = 0;
    size_t train_n = 0;
    double lr = lr_state.lr;
    for (const auto& batch : loader.EpochRecords(epoch)) {
      nn::GradStore grads;
      double batch_sum = 0;
      for (const auto& record : batch) {
        batch_sum += SampleLoss(model, plan, data::LoadSample(record), &grads);
      }
      ++step;
      if (warmup_schedule) lr = WarmupLr(step, kModelDim, options.warmup_steps);
      adam.Step(grads, lr, 1.0 / double(batch.size()));
      train_sum += batch_sum;
      train_n += batch.size();
    }
    const double train_loss = train_sum / double(train_n);

    double val_loss = train_loss;
    if (!valid_records.empty()) {
      double val_sum = 0;
      for (const auto& record : valid_records) {
        val_sum += SampleLoss(model, plan, data::LoadSample(record), nullptr);
      }
      val_loss = val_sum / double(valid_records.size());
    }
    result.train_losses.push_back(train_loss);
    result.val_losses.push_back(val_loss);
    result.epochs_run = epoch;

    for (const char* split : {"train", "valid"}) {
      const double loss = split == std::string("train") ? train_loss : val_loss;
      events << json{{"stage", plan.stage}, {"epoch", epoch}, {"split", split},
                     {"loss", loss},        {"lr", lr}}
                    .dump()
             << "\n";
      if (options.on_event) {
        options.on_event(EpochEvent{plan.stage, epoch, split, loss, lr});
      }
    }
    events.flush();

    result.checkpoint = out_dir / CheckpointName(variant, plan.stage, epoch);
    SaveCheckpoint(result.checkpoint, model.AllParams(), variant, plan.stage, epoch);

    if (!warmup_schedule) {
      LrState fresh;
      fresh.lr = options.lr0;
      lr_state = PlateauPolicy(fresh, result.val_losses);
      if (lr_state.halted) {
        result.halted = true;
        break;
      }
    }
    if (train_loss < options.stop_below_train) break;
    if (options.time_budget_s > 0) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (elapsed > options.time_budget_s) break;
    }
  }

  for (const auto& [group, hash] : frozen_hashes) {
    Check(ParamsHash(model.ParamsGroup(group)) == hash,
          "freeze integrity violated for group " + group);
  }
  return result;
}

}  // namespace train
}  // namespace vcse
