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

#include "cvc3/tfan.hpp"

#include "cvc3/errors.hpp"
#include "cvc3/ops.hpp"

namespace cvc3 {

std::string to_string(TfanMode mode) { return mode == TfanMode::OneD ? "1d" : "2d"; }

void TfanConfig::validate() const {
  if (depth < 1) throw ConfigError("tfan depth must be >= 1");
  if (hidden_channels < 1) throw ConfigError("tfan hidden channels must be >= 1");
  if (kernel_size % 2 == 0) throw ConfigError("tfan kernel size must be odd");
}

namespace {

ConvParams make_conv(const TfanConfig& cfg, std::size_t out, std::size_t in, Rng& rng) {
  const std::size_t k = cfg.kernel_size;
  if (cfg.mode == TfanMode::OneD) {
    return {uniform_param({out, in, k}, in * k, rng), uniform_param({out}, in * k, rng)};
  }
  return {uniform_param({out, in, k, k}, in * k * k, rng), uniform_param({out}, in * k * k, rng)};
}

Tensor apply_conv(const Tensor& h, const ConvParams& p, const TfanConfig& cfg) {
  const std::size_t pad = cfg.kernel_size / 2;
  if (cfg.mode == TfanMode::OneD) return conv1d(h, p.weight, p.bias, {1, pad});
  return conv2d(h, p.weight, p.bias, {1, 1, pad, pad});
}

}  // namespace

TfanParams make_tfan_params(const TfanConfig& cfg, std::size_t feature_channels,
                            std::size_t cond_channels, Rng& rng) {
  cfg.validate();
  TfanParams p;
  std::size_t in = cond_channels;
  for (std::size_t i = 0; i < cfg.depth; ++i) {
    p.trunk.push_back(make_conv(cfg, cfg.hidden_channels, in, rng));
    in = cfg.hidden_channels;
  }
  p.gamma_head = make_conv(cfg, feature_channels, in, rng);
  p.beta_head = make_conv(cfg, feature_channels, in, rng);
  return p;
}

Tensor tfan_condition(const Tensor& f, const Tensor& x, const TfanConfig& cfg) {
  if (x.rank() != 2) throw ShapeError("tfan: conditioning input must be [Q, T]");
  if (cfg.mode == TfanMode::OneD) {
    if (f.rank() != 2) throw ShapeError("tfan 1d: feature must be [C, T], got " + shape_string(f.shape()));
    return adaptive_avg_pool_last(x, f.dim(1));
  }
  if (f.rank() != 3) throw ShapeError("tfan 2d: feature must be [C, Q, T], got " + shape_string(f.shape()));
  return nearest_resize_2d(reshape(x, {1, x.dim(0), x.dim(1)}), f.dim(1), f.dim(2));
}

std::pair<Tensor, Tensor> tfan_modulation(const Tensor& f, const Tensor& x,
                                          const TfanParams& params, const TfanConfig& cfg) {
  if (params.trunk.size() != cfg.depth) throw ShapeError("tfan: trunk depth does not match config");
  Tensor h = tfan_condition(f, x, cfg);
  for (const auto& layer : params.trunk) h = relu(apply_conv(h, layer, cfg));
  Tensor gamma = apply_conv(h, params.gamma_head, cfg);
  Tensor beta = apply_conv(h, params.beta_head, cfg);
  if (gamma.shape() != f.shape() || beta.shape() != f.shape()) {
    throw ShapeError("tfan: modulation shape " + shape_string(gamma.shape()) +
                     " does not match feature " + shape_string(f.shape()));
  }
  return {gamma, beta};
}

Tensor tfan(const Tensor& f, const Tensor& x, const TfanParams& params, const TfanConfig& cfg,
            double eps) {
  auto [gamma, beta] = tfan_modulation(f, x, params, cfg);
  return add(mul(gamma, instance_norm(f, eps)), beta);
}

}  // namespace cvc3
