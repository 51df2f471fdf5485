// core/include/vcse/preset.h
//
// Architecture presets. `Full()` is the documented configuration (18-layer
// visual ResNet, R=3/X=8 TCN, 6-layer ASR encoder); `Toy()` shrinks depth and
// widths so staged training finishes in minutes on one CPU core.

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

#ifndef VCSE_PRESET_H_
#define VCSE_PRESET_H_

#include <utility>
#include <vector>

namespace vcse {

struct Preset {
  bool toy = false;

  // Visual encoder: optional input average-pooling, 3-D conv front channel
  // count, then (channels, blocks) residual stages applied per frame.
  int visual_pool = 1;
  int visual_front_channels = 64;
  std::vector<std::pair<int, int>> visual_stages;

  // Extraction TCN. Dilations grow as growth^x within a repeat; the toy
  // preset compensates for its shallow stack with a faster growth so the
  // receptive field still spans a syllable-scale window.
  int tcn_bottleneck = 256;
  int tcn_hidden = 512;
  int tcn_repeats = 3;
  int tcn_blocks = 8;
  int tcn_dilation_growth = 2;

  // ASR transformer encoder.
  int asr_layers = 6;
  int asr_heads = 4;
  int asr_ff = 1024;

  static Preset Full() {
    Preset p;
    p.visual_stages = {{64, 2}, {128, 2}, {256, 2}, {512, 2}};
    return p;
  }

  static Preset Toy() {
    Preset p;
    p.toy = true;
    p.visual_pool = 4;
    p.visual_front_channels = 16;
    p.visual_stages = {{16, 1}, {32, 1}};
    p.tcn_bottleneck = 64;
    p.tcn_hidden = 128;
    p.tcn_repeats = 1;
    p.tcn_blocks = 4;
    p.tcn_dilation_growth = 6;
    p.asr_layers = 2;
    return p;
  }
};

}  // namespace vcse

#endif  // VCSE_PRESET_H_
