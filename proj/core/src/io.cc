// core/src/io.cc

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

#include "vcse/io.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace vcse {

void LipSequence::Validate() const {
  Check(height == kLipSize && width == kLipSize, "LipSequence: spatial size must be 120x120");
  Check(frames > 0, "LipSequence: empty");
  Check(pixels.size() == size_t(frames) * height * width, "LipSequence: pixel count");
}

namespace io {

namespace {

template <typename T>
void PutLe(std::ofstream& os, T v) {
  unsigned char buf[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); ++i) buf[i] = (v >> (8 * i)) & 0xff;
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T GetLe(std::ifstream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  T v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= T(buf[i]) << (8 * i);
  return v;
}

std::ofstream OpenOut(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for writing: " + path.string());
  return os;
}

std::ifstream OpenIn(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open for reading: " + path.string());
  return is;
}

}  // namespace

void WriteWav(const std::filesystem::path& path, const Waveform& wave) {
  wave.Validate();
  auto os = OpenOut(path);
  const uint32_t n = uint32_t(wave.samples.size());
  const uint32_t data_bytes = n * 2;
  os.write("RIFF", 4);
  PutLe<uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  PutLe<uint32_t>(os, 16);
  PutLe<uint16_t>(os, 1);  // PCM
  PutLe<uint16_t>(os, 1);  // mono
  PutLe<uint32_t>(os, uint32_t(wave.sample_rate));
  PutLe<uint32_t>(os, uint32_t(wave.sample_rate) * 2);
  PutLe<uint16_t>(os, 2);
  PutLe<uint16_t>(os, 16);
  os.write("data", 4);
  PutLe<uint32_t>(os, data_bytes);
  for (uint32_t i = 0; i < n; ++i) {
    double v = std::clamp(wave.samples[i], -1.0, 1.0);
    PutLe<uint16_t>(os, uint16_t(int16_t(std::lrint(v * 32767.0))));
  }
}

Waveform ReadWav(const std::filesystem::path& path) {
  auto is = OpenIn(path);
  char tag[4];
  is.read(tag, 4);
  if (std::memcmp(tag, "RIFF", 4) != 0) throw DataError("not a WAV file: " + path.string());
  GetLe<uint32_t>(is);
  is.read(tag, 4);
  if (std::memcmp(tag, "WAVE", 4) != 0) throw DataError("not a WAV file: " + path.string());

  uint16_t channels = 0, bits = 0;
  uint32_t rate = 0;
  std::vector<int16_t> pcm;
  while (is.read(tag, 4)) {
    const uint32_t size = GetLe<uint32_t>(is);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      const uint16_t fmt = GetLe<uint16_t>(is);
      channels = GetLe<uint16_t>(is);
      rate = GetLe<uint32_t>(is);
      GetLe<uint32_t>(is);
      GetLe<uint16_t>(is);
      bits = GetLe<uint16_t>(is);
      if (fmt != 1 || channels != 1 || bits != 16)
        throw DataError("unsupported WAV encoding: " + path.string());
      if (size > 16) is.seekg(size - 16, std::ios::cur);
    } else if (std::memcmp(tag, "data", 4) == 0) {
      pcm.resize(size / 2);
      for (auto& s : pcm) s = int16_t(GetLe<uint16_t>(is));
      break;
    } else {
      is.seekg(size, std::ios::cur);
    }
  }
  if (pcm.empty()) throw DataError("WAV has no data chunk: " + path.string());
  Waveform w;
  w.sample_rate = int(rate);
  w.samples.resize(Eigen::Index(pcm.size()));
  for (size_t i = 0; i < pcm.size(); ++i) w.samples[Eigen::Index(i)] = pcm[i] / 32767.0;
  return w;
}

void WriteLips(const std::filesystem::path& path, const LipSequence& lips) {
  lips.Validate();
  auto os = OpenOut(path);
  os.write("LIPS", 4);
  PutLe<uint16_t>(os, 1);
  PutLe<uint32_t>(os, uint32_t(lips.frames));
  PutLe<uint16_t>(os, uint16_t(lips.height));
  PutLe<uint16_t>(os, uint16_t(lips.width));
  os.write(reinterpret_cast<const char*>(lips.pixels.data()), std::streamsize(lips.pixels.size()));
}

LipSequence ReadLips(const std::filesystem::path& path) {
  auto is = OpenIn(path);
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, "LIPS", 4) != 0) throw DataError("bad LIPS magic: " + path.string());
  const uint16_t version = GetLe<uint16_t>(is);
  if (version != 1) throw DataError("unsupported LIPS version: " + path.string());
  LipSequence lips;
  lips.frames = int(GetLe<uint32_t>(is));
  lips.height = GetLe<uint16_t>(is);
  lips.width = GetLe<uint16_t>(is);
  lips.pixels.resize(size_t(lips.frames) * lips.height * lips.width);
  is.read(reinterpret_cast<char*>(lips.pixels.data()), std::streamsize(lips.pixels.size()));
  if (!is) throw DataError("truncated LIPS file: " + path.string());
  lips.Validate();
  return lips;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  auto os = OpenOut(path);
  os.write(text.data(), std::streamsize(text.size()));
}

std::string ReadText(const std::filesystem::path& path) {
  auto is = OpenIn(path);
  std::string s((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return s;
}

}  // namespace io
}  // namespace vcse
