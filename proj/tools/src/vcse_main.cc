// tools/src/vcse_main.cc
//
// Command-line driver: corpus synthesis and simulation, staged training over
// the variant matrix, evaluation and report rendering.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 training/eval failure.

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

#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vcse/config.h"
#include "vcse/evalkit.h"
#include "vcse/trainkit.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vcse;

namespace {

struct CliState {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  bool toy = false;
  std::string out_dir;
  std::string device = "cpu";
};

cfg::Config Resolve(const CliState& cli) {
  cfg::Config config = cfg::LoadConfig(cfg::ResolveConfigPath(cli.config_path));
  if (cli.toy) cfg::ApplyToy(config);
  if (cli.seed_set) config.seed = cli.seed;
  if (!cli.out_dir.empty()) config.out_dir = cli.out_dir;
  if (!cli.device.empty()) config.device = cli.device;
  if (config.device == "gpu") {
    std::cerr << "warning: no GPU backend available, falling back to cpu\n";
    config.device = "cpu";
  } else if (config.device != "cpu") {
    throw DataError("unknown device: " + config.device);
  }
  return config;
}

fs::path PreparedManifest(const cfg::Config& c) {
  return fs::path(c.out_dir) / "corpus" / "prepared" / "manifest.jsonl";
}
fs::path MixtureDir(const cfg::Config& c) { return fs::path(c.out_dir) / "mixtures"; }
fs::path TrainDir(const cfg::Config& c, const std::string& variant) {
  return fs::path(c.out_dir) / "train" / variant;
}

void CmdToyCorpus(const cfg::Config& config) {
  const fs::path corpus = fs::path(config.out_dir) / "corpus";
  const auto raw = data::GenerateToyCorpus(corpus / "raw", config.n_speakers,
                                           config.n_utterances, config.seed);
  const auto report = data::PrepareCorpus(raw, corpus / "prepared", config.seed);
  std::cout << "generated " << raw.size() << " utterances, prepared "
            << report.records.size() << " (dropped " << report.dropped_short
            << " short)\n";
  for (const auto& e : report.errors) std::cerr << "error: " << e << "\n";
  if (!report.errors.empty()) throw DataError("corpus preparation reported errors");
}

void CmdSimulate(const cfg::Config& config, bool materialize) {
  const auto records = data::ReadUtteranceManifest(PreparedManifest(config));
  const auto splits = data::SimulateMixtures(records, config.counts, config.seed);
  const fs::path dir = MixtureDir(config);
  fs::create_directories(dir);
  data::WriteMixtureManifest(dir / "train.jsonl", splits.train);
  data::WriteMixtureManifest(dir / "valid.jsonl", splits.valid);
  data::WriteMixtureManifest(dir / "test.jsonl", splits.test);
  if (materialize) data::MaterializeMixtures(splits.test, dir / "materialized");
  std::cout << "simulated " << splits.train.size() << "/" << splits.valid.size() << "/"
            << splits.test.size() << " train/valid/test mixtures\n";
}

train::RunOptions OptionsFor(const cfg::Config& config, int stage) {
  train::RunOptions options;
  options.max_epochs = config.stage_epochs[size_t(stage - 1)];
  options.batch_size = config.batch_size;
  options.lr0 = config.lr0;
  options.warmup_steps = config.warmup_steps;
  options.seed = config.seed;
  options.time_budget_s = config.stage_time_budget_s;
  options.on_event = [](const train::EpochEvent& e) {
    std::cout << "stage " << e.stage << " epoch " << e.epoch << " " << e.split
              << " loss " << e.loss << " lr " << e.lr << "\n";
  };
  return options;
}

void TrainStages(const cfg::Config& config, extract::Model& model,
                 const std::vector<int>& stages) {
  const fs::path dir = TrainDir(config, extract::VariantName(model.config().kind));
  const auto train_records = data::ReadMixtureManifest(MixtureDir(config) / "train.jsonl");
  const auto valid_records = data::ReadMixtureManifest(MixtureDir(config) / "valid.jsonl");
  for (int stage : stages) {
    train::LoadPrerequisites(model, dir, stage);
    const auto result = train::RunStage(model, train::StagePlanFor(stage), train_records,
                                        valid_records, OptionsFor(config, stage), dir);
    std::cout << "stage " << stage << " done after " << result.epochs_run << " epochs"
              << (result.halted ? " (halted by plateau rule)" : "") << "\n";
  }
}

void CmdTrain(const cfg::Config& config, const std::string& variant, int stage) {
  extract::VariantConfig vc{extract::ParseVariant(variant), config.toy, config.seed};
  auto model = extract::BuildVariant(vc);
  TrainStages(config, *model, {stage});
}

void CmdTrainAll(const cfg::Config& config, const std::string& variant) {
  std::vector<std::string> variants;
  if (!variant.empty()) {
    variants.push_back(variant);
  } else {
    variants = {"pit", "a_s", "av", "ac_oracle", "avc_oracle", "vcse", "vcsev"};
  }
  for (const auto& name : variants) {
    std::cout << "=== training " << name << " ===\n";
    extract::VariantConfig vc{extract::ParseVariant(name), config.toy, config.seed};
    auto model = extract::BuildVariant(vc);
    TrainStages(config, *model, train::VariantStages(vc.kind));
  }
}

void CmdEvaluate(const cfg::Config& config, const std::string& variant) {
  extract::VariantConfig vc{extract::ParseVariant(variant), config.toy, config.seed};
  auto model = extract::BuildVariant(vc);
  const int last_stage = train::VariantStages(vc.kind).back();
  const fs::path ckpt =
      train::FindStageCheckpoint(TrainDir(config, variant), variant, last_stage);
  if (ckpt.empty()) {
    throw DataError("no stage-" + std::to_string(last_stage) + " checkpoint for " + variant);
  }
  nn::ParamMap params = model->AllParams();
  train::LoadCheckpoint(ckpt, params);

  const auto test = data::ReadMixtureManifest(MixtureDir(config) / "test.jsonl");
  const eval::EvalRow row = eval::Evaluate(*model, test);
  const fs::path dir = fs::path(config.out_dir) / "eval";
  fs::create_directories(dir);
  std::ofstream os(dir / (variant + ".json"));
  os << json{{"model", row.model_name},
             {"reference", row.reference_kind},
             {"si_snri_db", row.si_snri_db},
             {"sdri_db", row.sdri_db},
             {"n_utterances", row.n_utterances}}
            .dump(2)
     << "\n";
  std::cout << variant << ": SI-SNRi " << row.si_snri_db << " dB, SDRi " << row.sdri_db
            << " dB over " << row.n_utterances << " utterances\n";
}

void CmdReport(const cfg::Config& config) {
  std::vector<eval::EvalRow> rows;
  const fs::path dir = fs::path(config.out_dir) / "eval";
  for (const char* name : {"pit", "a_s", "av", "ac_oracle", "avc_oracle", "vcse", "vcsev"}) {
    const fs::path path = dir / (std::string(name) + ".json");
    if (!fs::exists(path)) continue;
    std::ifstream is(path);
    json j = json::parse(is);
    rows.push_back(eval::EvalRow{j.at("model").get<std::string>(),
                                 j.at("reference").get<std::string>(),
                                 j.at("si_snri_db").get<double>(),
                                 j.at("sdri_db").get<double>(),
                                 j.at("n_utterances").get<int>()});
  }
  eval::RenderReport(rows, fs::path(config.out_dir) / "report");
  std::cout << "report written to " << (fs::path(config.out_dir) / "report").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-stage visual-contextual speaker extraction"};
  app.require_subcommand(1);

  CliState cli;
  app.add_option("--config", cli.config_path, "config file (JSON); VCSE_CONFIG also honored");
  auto* seed_opt = app.add_option("--seed", cli.seed, "random seed");
  app.add_flag("--toy", cli.toy, "toy presets everywhere");
  app.add_option("--out", cli.out_dir, "output directory");
  app.add_option("--device", cli.device, "compute device")
      ->check(CLI::IsMember({"cpu", "gpu"}));

  auto* toy_corpus = app.add_subcommand("toy-corpus", "synthesize the desk-scale corpus");
  auto* simulate = app.add_subcommand("simulate", "simulate 2-speaker mixtures");
  bool materialize = false;
  simulate->add_flag("--materialize", materialize, "also write mixed test WAVs");

  std::string variant;
  int stage = 1;
  auto* train_cmd = app.add_subcommand("train", "train one stage of one variant");
  train_cmd->add_option("--stage", stage, "stage number 1..5")->required();
  train_cmd->add_option("--variant", variant, "variant name")->required();
  auto* train_all = app.add_subcommand("train-all", "train all stages (all variants by default)");
  std::string all_variant;
  train_all->add_option("--variant", all_variant, "restrict to one variant");
  auto* evaluate = app.add_subcommand("evaluate", "evaluate a trained variant");
  std::string eval_variant;
  evaluate->add_option("--variant", eval_variant, "variant name")->required();
  auto* report = app.add_subcommand("report", "render metric tables and chart");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    cli.seed_set = seed_opt->count() > 0;
    const cfg::Config config = Resolve(cli);
    if (toy_corpus->parsed()) {
      CmdToyCorpus(config);
    } else if (simulate->parsed()) {
      CmdSimulate(config, materialize);
    } else if (train_cmd->parsed()) {
      CmdTrain(config, variant, stage);
    } else if (train_all->parsed()) {
      CmdTrainAll(config, all_variant);
    } else if (evaluate->parsed()) {
      CmdEvaluate(config, eval_variant);
    } else if (report->parsed()) {
      CmdReport(config);
    }
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
