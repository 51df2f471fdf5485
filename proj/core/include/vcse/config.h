// core/include/vcse/config.h
//
// Hierarchical run configuration: JSON file (path from --config or the
// VCSE_CONFIG environment variable), every default overridable.

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

#ifndef VCSE_CONFIG_H_
#define VCSE_CONFIG_H_

#include <array>
#include <filesystem>
#include <string>

#include "vcse/datakit.h"

namespace vcse {
namespace cfg {

struct Config {
  bool toy = false;
  uint64_t seed = 0;
  std::string out_dir = "out";
  std::string device = "cpu";

  // Corpus knobs.
  int n_speakers = 4;
  int n_utterances = 32;
  data::SplitCounts counts;  // desk-scale 200/40/40 defaults

  // Training knobs.
  int batch_size = 4;
  double lr0 = 1e-3;
  int warmup_steps = 4000;                          // toy preset 200
  std::array<int, 5> stage_epochs = {30, 50, 30, 30, 20};
  double stage_time_budget_s = 0;                   // 0 = unlimited
};

// --config wins over VCSE_CONFIG; empty result means "defaults only".
std::filesystem::path ResolveConfigPath(const std::string& cli_path);

// Parses the JSON file (missing keys keep their defaults). Empty path ->
// all defaults. Malformed file or unknown key -> error.
Config LoadConfig(const std::filesystem::path& path);

// Toy presets: small warmup and a bounded per-stage wall clock.
void ApplyToy(Config& config);

}  // namespace cfg
}  // namespace vcse

#endif  // VCSE_CONFIG_H_
