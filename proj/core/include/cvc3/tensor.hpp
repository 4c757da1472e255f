// Copyright 2026 The cyclegan-vc3 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense double-precision tensors with tape-free reverse-mode gradients.
//
// Every op result remembers its parents and a closure that pushes the
// output gradient back into them. Calling backward() on a scalar walks the
// graph in reverse topological order. Leaves created with requires_grad
// accumulate gradients across backward() calls until zero_grad().

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cvc3 {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct Node;
using BackwardFn = std::function<void(const Node& self)>;

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until the first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward;

  std::span<double> grad_buffer();
};

}  // namespace detail

/// While alive, op results on this thread record no graph (inference).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

  static bool grad_enabled();

 private:
  bool previous_;
};

class Tensor {
 public:
  Tensor() = default;
  /// Zero-filled tensor.
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor full(Shape shape, double v, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t i) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  /// Mutable view for leaves (optimizer updates, perturbation in grad checks).
  std::span<double> data_mut();
  double item() const;
  double at(std::size_t flat_index) const { return data()[flat_index]; }

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> grad_mut();
  void zero_grad();

  /// Reverse-mode sweep from a scalar. Seeds d(self)/d(self) = 1.
  void backward() const;

  /// Copy of the values with no graph history.
  Tensor detach() const;
  /// Deep copy preserving requires_grad but not history.
  Tensor clone() const;

  const detail::Node* node() const { return node_.get(); }

  /// Builds an op result. Gradient bookkeeping is skipped when no parent
  /// requires a gradient. Throws NumericError on non-finite values.
  static Tensor make_result(Shape shape, std::vector<double> values,
                            const std::vector<Tensor>& parents,
                            detail::BackwardFn backward);

  /// Gradient accumulator of an op input, or an empty span when the input
  /// does not participate in differentiation.
  static std::span<double> grad_sink(const Tensor& t);

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

}  // namespace cvc3
