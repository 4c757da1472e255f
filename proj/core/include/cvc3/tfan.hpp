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

// Time-frequency adaptive normalization.
//
// The feature f is instance-normalized per channel, then modulated
// elementwise by gamma(x) and beta(x), both produced from the source
// mel-spectrogram x by a shared convolutional trunk and two linear heads:
//
//   f' = gamma(x) * (f - mu(f)) / sigma(f) + beta(x)
//
// 1D mode works on [C, T] features and treats x as a Q-channel sequence
// average-pooled to T. 2D mode works on [C, Q, T] features and treats x as a
// single-channel map resized (nearest neighbour) to the feature grid.

#pragma once

#include <string>
#include <vector>

#include "cvc3/init.hpp"
#include "cvc3/tensor.hpp"

namespace cvc3 {

enum class TfanMode { OneD, TwoD };

std::string to_string(TfanMode mode);

struct TfanConfig {
  std::size_t depth = 3;              // trunk conv layers
  std::size_t hidden_channels = 128;  // trunk width
  std::size_t kernel_size = 5;
  TfanMode mode = TfanMode::OneD;

  void validate() const;
  bool operator==(const TfanConfig&) const = default;
};

struct ConvParams {
  Tensor weight;
  Tensor bias;
};

struct TfanParams {
  std::vector<ConvParams> trunk;
  ConvParams gamma_head;
  ConvParams beta_head;
};

/// Initializes weights for a TFAN modulating `feature_channels` channels.
/// `cond_channels` is the mel-bin count Q in 1D mode and 1 in 2D mode.
TfanParams make_tfan_params(const TfanConfig& cfg, std::size_t feature_channels,
                            std::size_t cond_channels, Rng& rng);

/// Brings the conditioning spectrogram x ([Q, T]) to the resolution of f.
Tensor tfan_condition(const Tensor& f, const Tensor& x, const TfanConfig& cfg);

/// Scale and bias maps, each with the shape of f.
std::pair<Tensor, Tensor> tfan_modulation(const Tensor& f, const Tensor& x,
                                          const TfanParams& params, const TfanConfig& cfg);

Tensor tfan(const Tensor& f, const Tensor& x, const TfanParams& params, const TfanConfig& cfg,
            double eps = 1e-6);

}  // namespace cvc3
