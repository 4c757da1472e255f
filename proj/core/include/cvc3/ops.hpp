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

// Differentiable tensor operations. Feature maps carry no batch axis:
// 1D features are [C, T], 2D features are [C, Q, T].

#pragma once

#include <cstddef>
#include <vector>

#include "cvc3/tensor.hpp"

namespace cvc3 {

// Elementwise arithmetic. Shapes must match exactly (no broadcasting).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);

Tensor abs(const Tensor& a);
Tensor square(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// Same data, new shape of equal element count.
Tensor reshape(const Tensor& a, Shape shape);

struct Conv1dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

/// input [C_in, T], weight [C_out, C_in, K], bias [C_out] or undefined.
/// Output length floor((T + 2*pad - K) / stride) + 1.
Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              Conv1dOptions opt = {});

struct Conv2dOptions {
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
  std::size_t pad_h = 0;
  std::size_t pad_w = 0;
};

/// input [C_in, H, W], weight [C_out, C_in, KH, KW], bias [C_out] or undefined.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              Conv2dOptions opt = {});

/// Splits the leading (channel) axis into halves [a; b], returns a * sigmoid(b).
Tensor glu(const Tensor& input);

struct InstanceNormResult {
  Tensor output;
  std::vector<double> mean;   // per channel
  std::vector<double> sigma;  // sqrt(population variance + eps), per channel
};

/// Per-channel standardization over every non-channel axis of one instance.
InstanceNormResult instance_norm_stats(const Tensor& input, double eps = 1e-6);
Tensor instance_norm(const Tensor& input, double eps = 1e-6);

/// out[c, ...] = gamma[c] * in[c, ...] + beta[c].
Tensor channel_affine(const Tensor& input, const Tensor& gamma, const Tensor& beta);

/// [C*r*r, H, W] -> [C, r*H, r*W]; out[c, h*r+i, w*r+j] = in[c*r*r + i*r + j, h, w].
Tensor pixel_shuffle(const Tensor& input, std::size_t r);
/// Exact inverse of pixel_shuffle.
Tensor pixel_unshuffle(const Tensor& input, std::size_t r);

/// Adaptive average pooling of the last axis of [C, T] to [C, out_len].
/// Window i covers [floor(i*T/out), ceil((i+1)*T/out)).
Tensor adaptive_avg_pool_last(const Tensor& input, std::size_t out_len);

/// Nearest-neighbour resize of the last two axes of [C, H, W] to [C, out_h, out_w],
/// source index floor(i * H / out_h).
Tensor nearest_resize_2d(const Tensor& input, std::size_t out_h, std::size_t out_w);

}  // namespace cvc3
