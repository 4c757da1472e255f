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

#include <cstdint>
#include <random>

#include "cvc3/tensor.hpp"

namespace cvc3 {

using Rng = std::mt19937_64;

/// Trainable leaf drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor uniform_param(Shape shape, std::size_t fan_in, Rng& rng);

/// Trainable leaf filled with a constant.
Tensor constant_param(Shape shape, double value);

/// Non-trainable tensor with N(0, stddev^2) entries (test inputs, noise).
Tensor normal_tensor(Shape shape, Rng& rng, double stddev = 1.0);

}  // namespace cvc3
