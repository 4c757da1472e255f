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

// Shared helpers and independent scalar references for the unit tests.

#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <regex>
#include <string>
#include <vector>

#include "cvc3/init.hpp"
#include "cvc3/ops.hpp"
#include "cvc3/tensor.hpp"

namespace cvc3::testing {

inline Tensor random_tensor(const Shape& shape, Rng& rng, bool requires_grad = false, double stddev = 1.0) {
  Tensor t = normal_tensor(shape, rng, stddev);
  t.set_requires_grad(requires_grad);
  return t;
}

/// Scalar probe sum(t * w) with fixed random weights, so every output
/// coordinate carries a distinct gradient.
inline Tensor probe(const Tensor& t, const Tensor& weights) { return sum(mul(t, weights)); }

/// Direct-loop 2D convolution; input [Ci, H, W], weight [Co, Ci, KH, KW].
inline std::vector<double> naive_conv2d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t sh,
                                        std::size_t sw, std::size_t ph, std::size_t pw, std::size_t& oh,
                                        std::size_t& ow) {
  const std::size_t ci = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const std::size_t co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  oh = (h + 2 * ph - kh) / sh + 1;
  ow = (wd + 2 * pw - kw) / sw + 1;
  std::vector<double> out(co * oh * ow, 0.0);
  for (std::size_t o = 0; o < co; ++o) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xo = 0; xo < ow; ++xo) {
        double acc = b.defined() ? b.at(o) : 0.0;
        for (std::size_t c = 0; c < ci; ++c) {
          for (std::size_t i = 0; i < kh; ++i) {
            for (std::size_t j = 0; j < kw; ++j) {
              const long iy = static_cast<long>(y * sh + i) - static_cast<long>(ph);
              const long ix = static_cast<long>(xo * sw + j) - static_cast<long>(pw);
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(wd)) continue;
              acc += w.at(((o * ci + c) * kh + i) * kw + j) * x.at((c * h + iy) * wd + ix);
            }
          }
        }
        out[(o * oh + y) * ow + xo] = acc;
      }
    }
  }
  return out;
}

/// Parameters whose effect is removed by a following instance norm: conv
/// biases right before a normalization site, and the shift of the last
/// residual block, which reaches the to_2d norm only through a 1x1 conv.
/// Their exact gradient is zero.
inline bool shift_invariant_generator_param(const std::string& name, std::size_t n_residual_blocks) {
  static const std::regex re(R"((down\d|to_1d|to_2d|res\d+\.conv[12])\.bias)");
  const std::string last_shift =
      n_residual_blocks == 0 ? "to_1d.norm.beta" : "res" + std::to_string(n_residual_blocks) + ".norm2.beta";
  return std::regex_match(name, re) || name == last_shift;
}

inline bool shift_invariant_discriminator_param(const std::string& name) {
  static const std::regex re(R"((down\d+|penultimate)\.bias)");
  return std::regex_match(name, re);
}

/// Largest central-difference slope over the coordinates of `t`.
inline double max_abs_finite_difference(const std::function<Tensor()>& closure, Tensor& t, double eps = 1e-5) {
  double worst = 0.0;
  auto v = t.data_mut();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double saved = v[i];
    v[i] = saved + eps;
    const double plus = closure().item();
    v[i] = saved - eps;
    const double minus = closure().item();
    v[i] = saved;
    worst = std::max(worst, std::abs(plus - minus) / (2 * eps));
  }
  return worst;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("cvc3_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace cvc3::testing
