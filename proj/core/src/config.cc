// core/src/config.cc

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

#include "vcse/config.h"

#include <cstdlib>
#include <fstream>

#include <json.hpp>

namespace vcse {
namespace cfg {

using nlohmann::json;

std::filesystem::path ResolveConfigPath(const std::string& cli_path) {
  if (!cli_path.empty()) return cli_path;
  if (const char* env = std::getenv("VCSE_CONFIG")) return env;
  return {};
}

void ApplyToy(Config& config) {
  config.toy = true;
  config.warmup_steps = 200;
  config.stage_time_budget_s = 300;
}

Config LoadConfig(const std::filesystem::path& path) {
  Config config;
  if (path.empty()) return config;
  std::ifstream is(path);
  if (!is) throw DataError("cannot read config: " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const std::exception& e) {
    throw DataError("malformed config " + path.string() + ": " + e.what());
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "toy") {
      if (value.get<bool>()) ApplyToy(config);
    } else if (key == "seed") {
      config.seed = value.get<uint64_t>();
    } else if (key == "out_dir") {
      config.out_dir = value.get<std::string>();
    } else if (key == "device") {
      config.device = value.get<std::string>();
    } else if (key == "n_speakers") {
      config.n_speakers = value.get<int>();
    } else if (key == "n_utterances") {
      config.n_utterances = value.get<int>();
    } else if (key == "counts") {
      config.counts.train = value.at("train").get<int>();
      config.counts.valid = value.at("valid").get<int>();
      config.counts.test = value.at("test").get<int>();
    } else if (key == "batch_size") {
      config.batch_size = value.get<int>();
    } else if (key == "lr0") {
      config.lr0 = value.get<double>();
    } else if (key == "warmup_steps") {
      config.warmup_steps = value.get<int>();
    } else if (key == "stage_epochs") {
      const auto v = value.get<std::vector<int>>();
      Check(v.size() == 5, "stage_epochs needs 5 entries");
      std::copy(v.begin(), v.end(), config.stage_epochs.begin());
    } else if (key == "stage_time_budget_s") {
      config.stage_time_budget_s = value.get<double>();
    } else {
      throw DataError("unknown config key: " + key);
    }
  }
  return config;
}

}  // namespace cfg
}  // namespace vcse
