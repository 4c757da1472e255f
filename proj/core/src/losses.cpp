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

#include "cvc3/losses.hpp"

#include <cmath>

#include "cvc3/errors.hpp"
#include "cvc3/key_value.hpp"
#include "cvc3/ops.hpp"

namespace cvc3 {

void LossWeights::validate() const {
  if (!(lambda_cyc >= 0.0) || !(lambda_id >= 0.0)) throw ConfigError("loss weights must be >= 0");
}

std::string LossReport::csv_header() {
  return "iteration,adv_g,adv_d,adv2_g,adv2_d,cyc,id,total_g,total_d";
}

std::string LossReport::csv_row(std::uint64_t iteration) const {
  std::string row = std::to_string(iteration);
  for (double v : {adv_g, adv_d, adv2_g, adv2_d, cyc, id, total_g, total_d}) {
    row += ',';
    row += format_double(v);
  }
  return row;
}

bool LossReport::all_finite() const {
  for (double v : {adv_g, adv_d, adv2_g, adv2_d, cyc, id, total_g, total_d}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

Tensor l1_mean(const Tensor& a, const Tensor& b) { return mean(abs(sub(a, b))); }

}  // namespace

Tensor adv_loss_d(const Tensor& real_patches, const Tensor& fake_patches) {
  require_same(real_patches, fake_patches, "adv_loss_d");
  return add(mean(square(add_scalar(real_patches, -1.0))), mean(square(fake_patches)));
}

Tensor adv_loss_g(const Tensor& fake_patches) { return mean(square(add_scalar(fake_patches, -1.0))); }

Tensor cycle_loss(const Tensor& x, const Tensor& x_cyc, const Tensor& y, const Tensor& y_cyc) {
  require_same(x, x_cyc, "cycle_loss");
  require_same(y, y_cyc, "cycle_loss");
  return add(l1_mean(x_cyc, x), l1_mean(y_cyc, y));
}

Tensor identity_loss(const Tensor& x, const Tensor& g_yx_of_x, const Tensor& y,
                     const Tensor& g_xy_of_y) {
  require_same(x, g_yx_of_x, "identity_loss");
  require_same(y, g_xy_of_y, "identity_loss");
  return add(l1_mean(g_xy_of_y, y), l1_mean(g_yx_of_x, x));
}

SecondAdvTerms second_adv_losses(const Tensor& x, const Tensor& x_cyc, const Tensor& y,
                                 const Tensor& y_cyc, const PatchFn& d2_x, const PatchFn& d2_y) {
  require_same(x, x_cyc, "second_adv_losses");
  require_same(y, y_cyc, "second_adv_losses");
  SecondAdvTerms t;
  t.g_term = add(adv_loss_g(d2_x(x_cyc)), adv_loss_g(d2_y(y_cyc)));
  t.d_term = add(adv_loss_d(d2_x(x), d2_x(x_cyc.detach())), adv_loss_d(d2_y(y), d2_y(y_cyc.detach())));
  return t;
}

bool identity_active(const LossWeights& w, std::uint64_t iter) { return iter < w.id_cutoff_iters; }

TotalLosses total_losses(const LossParts& parts, const LossWeights& w, std::uint64_t iter) {
  Tensor g = add(add(parts.adv_g, parts.adv2_g), scale(parts.cyc, w.lambda_cyc));
  if (identity_active(w, iter) && parts.id.defined()) g = add(g, scale(parts.id, w.lambda_id));
  return {g, add(parts.adv_d, parts.adv2_d)};
}

}  // namespace cvc3
