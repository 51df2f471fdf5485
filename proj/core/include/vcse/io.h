// core/include/vcse/io.h
//
// On-disk formats: mono 16-bit PCM WAV at 16 kHz, the "LIPS" raw lip-frame
// container, and plain-text transcripts.

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

#ifndef VCSE_IO_H_
#define VCSE_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vcse/signals.h"

namespace vcse {

// T_v frames of H x W grayscale pixels, row-major within a frame.
struct LipSequence {
  std::vector<uint8_t> pixels;
  int frames = 0;
  int height = kLipSize;
  int width = kLipSize;
  int fps = kVideoFps;

  const uint8_t* frame(int t) const { return pixels.data() + size_t(t) * height * width; }
  void Validate() const;
};

namespace io {

void WriteWav(const std::filesystem::path& path, const Waveform& wave);
Waveform ReadWav(const std::filesystem::path& path);

// LIPS container: magic "LIPS", u16 version, u32 frame count, u16 height,
// u16 width (little-endian), then frames*height*width uint8 pixels.
void WriteLips(const std::filesystem::path& path, const LipSequence& lips);
LipSequence ReadLips(const std::filesystem::path& path);

void WriteText(const std::filesystem::path& path, const std::string& text);
std::string ReadText(const std::filesystem::path& path);

}  // namespace io
}  // namespace vcse

#endif  // VCSE_IO_H_
