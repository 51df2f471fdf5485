// core/include/vcse/tensor.h
//
// Reverse-mode autodiff over 2-D float tensors (channels x frames).
// The graph is built dynamically; Backward() never mutates nodes, all
// gradients live in a per-call GradStore, so frozen models can be shared
// across readers.

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

#ifndef VCSE_TENSOR_H_
#define VCSE_TENSOR_H_

#include <functional>
#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vcse/common.h"

namespace vcse {
namespace nn {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// Gradients keyed by node identity. Owned by the caller of Backward();
// accumulation order is the (deterministic) reverse topological order.
class GradStore {
 public:
  Mat& Accum(const Node* n, Eigen::Index rows, Eigen::Index cols) {
    auto it = grads_.find(n);
    if (it == grads_.end()) {
      it = grads_.emplace(n, Mat::Zero(rows, cols)).first;
    }
    return it->second;
  }
  const Mat* Find(const Node* n) const {
    auto it = grads_.find(n);
    return it == grads_.end() ? nullptr : &it->second;
  }
  void Clear() { grads_.clear(); }
  void Erase(const Node* n) { grads_.erase(n); }
  // Merges another store (summing), used for gradient accumulation over a
  // batch of per-utterance graphs.
  void Add(const GradStore& other) {
    for (const auto& [n, g] : other.grads_) {
      Mat& mine = Accum(n, g.rows(), g.cols());
      mine += g;
    }
  }

 private:
  std::unordered_map<const Node*, Mat> grads_;
};

struct Node {
  Mat value;
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  // Receives d(loss)/d(this node), adds contributions into parent slots.
  std::function<void(const Mat& grad_out, GradStore& gs)> backward;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Mat value, bool requires_grad = false)
      : node_(std::make_shared<Node>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
  }
  static Tensor Scalar(vcse::Scalar v) { return Tensor(Mat::Constant(1, 1, v)); }

  bool defined() const { return node_ != nullptr; }
  const Mat& value() const { return node_->value; }
  Mat& mutable_value() { return node_->value; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool b) { node_->requires_grad = b; }
  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

// Runs reverse-mode accumulation from a 1x1 root. Returns the store holding
// gradients for every reachable node that requires grad.
GradStore Backward(const Tensor& root);

// Builds an op node. The backward closure sees the already-computed value.
Tensor MakeOp(Mat value, std::vector<Tensor> inputs,
              std::function<void(const Mat&, GradStore&)> backward);

inline bool AnyRequiresGrad(const std::vector<Tensor>& ts) {
  for (const auto& t : ts)
    if (t.requires_grad()) return true;
  return false;
}

}  // namespace nn
}  // namespace vcse

#endif  // VCSE_TENSOR_H_
