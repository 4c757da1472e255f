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

// Training objectives in least-squares GAN form. Patch maps are reduced by
// the arithmetic mean over cells; the two conversion directions are summed.

#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "cvc3/tensor.hpp"

namespace cvc3 {

struct LossWeights {
  double lambda_cyc = 10.0;
  double lambda_id = 5.0;
  std::uint64_t id_cutoff_iters = 10000;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

/// Per-step scalar losses, both directions summed.
struct LossReport {
  double adv_g = 0, adv_d = 0, adv2_g = 0, adv2_d = 0, cyc = 0, id = 0, total_g = 0, total_d = 0;

  static std::string csv_header();
  std::string csv_row(std::uint64_t iteration) const;
  bool all_finite() const;
};

/// mean((D(real) - 1)^2) + mean(D(fake)^2).
Tensor adv_loss_d(const Tensor& real_patches, const Tensor& fake_patches);
/// mean((D(fake) - 1)^2).
Tensor adv_loss_g(const Tensor& fake_patches);

/// mean|x_cyc - x| + mean|y_cyc - y|.
Tensor cycle_loss(const Tensor& x, const Tensor& x_cyc, const Tensor& y, const Tensor& y_cyc);

/// mean|G_xy(y) - y| + mean|G_yx(x) - x|.
Tensor identity_loss(const Tensor& x, const Tensor& g_yx_of_x, const Tensor& y,
                     const Tensor& g_xy_of_y);

using PatchFn = std::function<Tensor(const Tensor&)>;

struct SecondAdvTerms {
  Tensor g_term;  // drives generators through x_cyc / y_cyc
  Tensor d_term;  // drives D'_X / D'_Y; cyclic inputs are detached
};

/// Second adversarial losses on circularly converted features.
SecondAdvTerms second_adv_losses(const Tensor& x, const Tensor& x_cyc, const Tensor& y,
                                 const Tensor& y_cyc, const PatchFn& d2_x, const PatchFn& d2_y);

struct LossParts {
  Tensor adv_g, adv_d, adv2_g, adv2_d, cyc, id;  // id may be undefined past the cutoff
};

struct TotalLosses {
  Tensor total_g, total_d;
};

/// total_g = adv_g + adv2_g + lambda_cyc*cyc + [iter < cutoff]*lambda_id*id,
/// total_d = adv_d + adv2_d. The identity term is omitted, not zero-weighted,
/// past the cutoff.
TotalLosses total_losses(const LossParts& parts, const LossWeights& w, std::uint64_t iter);

bool identity_active(const LossWeights& w, std::uint64_t iter);

}  // namespace cvc3
