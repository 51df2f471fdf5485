// core/include/vcse/common.h

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

#ifndef VCSE_COMMON_H_
#define VCSE_COMMON_H_

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace vcse {

// Model math runs in float; metrics and loss internals use double.
using Scalar = float;
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using VecD = Eigen::VectorXd;

constexpr int kSampleRate = 16000;
constexpr int kVideoFps = 25;
constexpr int kLipSize = 120;
constexpr int kModelDim = 256;  // latent channel count N, shared by all streams

class VcseError : public std::runtime_error {
 public:
  explicit VcseError(const std::string& msg) : std::runtime_error(msg) {}
};

class ShapeError : public VcseError {
 public:
  explicit ShapeError(const std::string& msg) : VcseError(msg) {}
};

class DataError : public VcseError {
 public:
  explicit DataError(const std::string& msg) : VcseError(msg) {}
};

inline void Check(bool cond, const std::string& msg) {
  if (!cond) throw VcseError(msg);
}

inline void CheckShape(bool cond, const std::string& msg) {
  if (!cond) throw ShapeError(msg);
}

// FNV-1a over raw bytes; used for checkpoint content hashes and
// freeze-integrity comparisons.
inline uint64_t Fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

// All randomness flows through explicitly seeded engines so that corpus
// generation, init and training order are reproducible run to run.
using Rng = std::mt19937_64;

}  // namespace vcse

#endif  // VCSE_COMMON_H_
