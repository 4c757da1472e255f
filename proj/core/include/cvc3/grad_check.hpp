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

#pragma once

#include <functional>
#include <span>

#include "cvc3/tensor.hpp"

namespace cvc3 {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;  // index into the inputs span
  std::size_t worst_coord = 0;  // flat coordinate inside that input
};

/// Compares reverse-mode gradients of a scalar closure against central
/// differences over every coordinate of every input. The relative error of a
/// coordinate is |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|).
/// Throws NumericError when the closure value or a gradient is non-finite.
GradCheckReport grad_check_report(const std::function<Tensor()>& closure,
                                  std::span<Tensor> inputs, double eps = 1e-5);

/// Maximum relative error of grad_check_report.
double grad_check(const std::function<Tensor()>& closure, std::span<Tensor> inputs,
                  double eps = 1e-5);

}  // namespace cvc3
