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

#include <gtest/gtest.h>

#include <limits>

#include "cvc3/errors.hpp"
#include "cvc3/grad_check.hpp"
#include "cvc3/ops.hpp"
#include "cvc3/tfan.hpp"
#include "test_util.hpp"

namespace cvc3 {
namespace {

using testing::naive_conv2d;
using testing::probe;
using testing::random_tensor;

TEST(Conv, DeltaKernelIsIdentity) {
  Rng rng(1);
  const Tensor x = random_tensor({1, 1, 9}, rng);
  const Tensor x1 = reshape(x, {1, 9});
  const Tensor w({1, 1, 3}, {0.0, 1.0, 0.0});
  const Tensor y = conv1d(x1, w, Tensor(), {1, 1});
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(y.at(i), x.at(i));

  const Tensor x2 = random_tensor({2, 5, 7}, rng);
  Tensor w2({2, 2, 3, 3});
  w2.data_mut()[(0 * 2 + 0) * 9 + 4] = 1.0;
  w2.data_mut()[(1 * 2 + 1) * 9 + 4] = 1.0;
  const Tensor y2 = conv2d(x2, w2, Tensor(), {1, 1, 1, 1});
  for (std::size_t i = 0; i < x2.numel(); ++i) EXPECT_EQ(y2.at(i), x2.at(i));
}

TEST(Conv, SlidingWindowSum) {
  const Tensor x({1, 3}, {1.0, 2.0, 3.0});
  const Tensor w({1, 1, 2}, {1.0, 1.0});
  const Tensor y = conv1d(x, w, Tensor());
  ASSERT_EQ(y.shape(), (Shape{1, 2}));
  EXPECT_EQ(y.at(0), 3.0);
  EXPECT_EQ(y.at(1), 5.0);
}

TEST(Conv, MatchesDirectLoops) {
  Rng rng(2);
  for (auto [sh, sw, ph, pw] : {std::array<std::size_t, 4>{1, 1, 0, 0}, {2, 2, 2, 2}, {1, 2, 1, 3}, {2, 1, 0, 1}}) {
    const Tensor x = random_tensor({3, 9, 11}, rng);
    const Tensor w = random_tensor({4, 3, 3, 5}, rng);
    const Tensor b = random_tensor({4}, rng);
    std::size_t oh, ow;
    const auto ref = naive_conv2d(x, w, b, sh, sw, ph, pw, oh, ow);
    const Tensor y = conv2d(x, w, b, {sh, sw, ph, pw});
    ASSERT_EQ(y.shape(), (Shape{4, oh, ow}));
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.at(i), ref[i], 1e-12);
  }
}

TEST(Conv, GradientsMatchFiniteDifferences) {
  Rng rng(3);
  Tensor x = random_tensor({2, 6, 7}, rng, true);
  Tensor w = random_tensor({3, 2, 3, 3}, rng, true);
  Tensor b = random_tensor({3}, rng, true);
  const Tensor pw = random_tensor({3, 3, 4}, rng);
  std::vector<Tensor> in{x, w, b};
  EXPECT_LT(grad_check([&] { return probe(conv2d(x, w, b, {2, 2, 1, 1}), pw); }, in), 1e-4);

  Tensor x1 = random_tensor({3, 10}, rng, true);
  Tensor w1 = random_tensor({2, 3, 3}, rng, true);
  Tensor b1 = random_tensor({2}, rng, true);
  const Tensor pw1 = random_tensor({2, 10}, rng);
  std::vector<Tensor> in1{x1, w1, b1};
  EXPECT_LT(grad_check([&] { return probe(conv1d(x1, w1, b1, {1, 1}), pw1); }, in1), 1e-4);
}

TEST(Conv, RejectsKernelLargerThanInput) {
  const Tensor x({1, 2}, {1.0, 2.0});
  const Tensor w({1, 1, 3}, {1.0, 1.0, 1.0});
  EXPECT_THROW(conv1d(x, w, Tensor()), ShapeError);
}

TEST(Glu, ZeroGateHalves) {
  Rng rng(4);
  const Tensor a = random_tensor({2, 3}, rng);
  std::vector<double> v(a.data().begin(), a.data().end());
  v.resize(12, 0.0);
  const Tensor y = glu(Tensor({4, 3}, v));
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(y.at(i), 0.5 * a.at(i));
}

TEST(Glu, SaturatedGatePassesContent) {
  Rng rng(5);
  const Tensor a = random_tensor({2, 3}, rng);
  std::vector<double> v(a.data().begin(), a.data().end());
  v.resize(12, 20.0);
  const Tensor y = glu(Tensor({4, 3}, v));
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(y.at(i), a.at(i), 1e-8 * std::max(1.0, std::abs(a.at(i))));
}

TEST(Glu, MatchesScalarReferenceAndGradients) {
  Rng rng(6);
  Tensor x = random_tensor({6, 4, 5}, rng, true);
  const Tensor y = glu(x);
  ASSERT_EQ(y.shape(), (Shape{3, 4, 5}));
  const std::size_t half = 60;
  for (std::size_t i = 0; i < half; ++i) {
    EXPECT_NEAR(y.at(i), x.at(i) / (1.0 + std::exp(-x.at(i + half))), 1e-15);
  }
  const Tensor pw = random_tensor(y.shape(), rng);
  std::vector<Tensor> in{x};
  EXPECT_LT(grad_check([&] { return probe(glu(x), pw); }, in), 1e-4);
}

TEST(InstanceNorm, TwoValues) {
  const Tensor y = instance_norm(Tensor({1, 2}, {1.0, -1.0}));
  EXPECT_NEAR(y.at(0), 1.0, 1e-5);
  EXPECT_NEAR(y.at(1), -1.0, 1e-5);
}

TEST(InstanceNorm, ConstantChannelIsZero) {
  const Tensor y = instance_norm(Tensor::full({2, 3, 4}, 7.5));
  for (double v : y.data()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(InstanceNorm, MatchesScalarReference) {
  Rng rng(7);
  const Tensor x = random_tensor({3, 5, 6}, rng, false, 3.0);
  const auto r = instance_norm_stats(x);
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < 30; ++i) m += x.at(c * 30 + i);
    m /= 30;
    for (std::size_t i = 0; i < 30; ++i) v += (x.at(c * 30 + i) - m) * (x.at(c * 30 + i) - m);
    v /= 30;
    EXPECT_NEAR(r.mean[c], m, 1e-12);
    EXPECT_NEAR(r.sigma[c], std::sqrt(v + 1e-6), 1e-12);
    for (std::size_t i = 0; i < 30; ++i) {
      EXPECT_NEAR(r.output.at(c * 30 + i), (x.at(c * 30 + i) - m) / std::sqrt(v + 1e-6), 1e-9);
    }
  }
}

TEST(InstanceNorm, Gradients) {
  Rng rng(8);
  Tensor x = random_tensor({3, 4, 5}, rng, true);
  const Tensor pw = random_tensor(x.shape(), rng);
  std::vector<Tensor> in{x};
  EXPECT_LT(grad_check([&] { return probe(instance_norm(x), pw); }, in), 1e-4);
}

TEST(PixelShuffle, Definition) {
  const Tensor y = pixel_shuffle(Tensor({4, 1, 1}, {1, 2, 3, 4}), 2);
  ASSERT_EQ(y.shape(), (Shape{1, 2, 2}));
  EXPECT_EQ(std::vector<double>(y.data().begin(), y.data().end()), (std::vector<double>{1, 2, 3, 4}));
}

TEST(PixelShuffle, InverseAndIndexFormula) {
  Rng rng(9);
  const std::size_t c = 3, r = 2, h = 4, w = 5;
  const Tensor x = random_tensor({c * r * r, h, w}, rng);
  const Tensor y = pixel_shuffle(x, r);
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < r * h; ++i) {
      for (std::size_t j = 0; j < r * w; ++j) {
        const std::size_t src = ((k * r * r + (i % r) * r + (j % r)) * h + i / r) * w + j / r;
        EXPECT_EQ(y.at((k * r * h + i) * r * w + j), x.at(src));
      }
    }
  }
  const Tensor back = pixel_unshuffle(y, r);
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(back.at(i), x.at(i));
}

TEST(ElementwiseOps, Gradients) {
  Rng rng(10);
  Tensor a = random_tensor({3, 4}, rng, true);
  Tensor b = random_tensor({3, 4}, rng, true);
  const Tensor pw = random_tensor({3, 4}, rng);
  std::vector<Tensor> in{a, b};
  EXPECT_LT(grad_check([&] { return probe(add(a, b), pw); }, in), 1e-4);
  EXPECT_LT(grad_check([&] { return probe(sub(a, b), pw); }, in), 1e-4);
  EXPECT_LT(grad_check([&] { return probe(mul(a, b), pw); }, in), 1e-4);
  EXPECT_LT(grad_check([&] { return probe(sigmoid(a), pw); }, in), 1e-4);
  EXPECT_LT(grad_check([&] { return probe(square(a), pw); }, in), 1e-4);
  EXPECT_LT(grad_check([&] { return mean(scale(add_scalar(a, 0.3), -2.0)); }, in), 1e-4);
  // Kinks at 0 are avoided by shifting the inputs away from them.
  Tensor c = Tensor({6}, {-1.5, -0.7, -0.2, 0.3, 0.9, 2.0}, true);
  std::vector<Tensor> in_c{c};
  const Tensor pc = random_tensor({6}, rng);
  EXPECT_LT(grad_check([&] { return probe(abs(c), pc); }, in_c), 1e-4);
  EXPECT_LT(grad_check([&] { return probe(relu(c), pc); }, in_c), 1e-4);
}

TEST(Resampling, PoolAndResize) {
  const Tensor x({1, 5}, {1, 2, 3, 4, 5});
  const Tensor p = adaptive_avg_pool_last(x, 2);
  // Windows [0, 3) and [2, 5).
  EXPECT_DOUBLE_EQ(p.at(0), 2.0);
  EXPECT_DOUBLE_EQ(p.at(1), 4.0);
  const Tensor m({1, 2, 2}, {1, 2, 3, 4});
  const Tensor r = nearest_resize_2d(m, 4, 3);
  const std::vector<double> expect{1, 1, 2, 1, 1, 2, 3, 3, 4, 3, 3, 4};
  EXPECT_EQ(std::vector<double>(r.data().begin(), r.data().end()), expect);

  Rng rng(11);
  Tensor y = random_tensor({2, 3, 7}, rng, true);
  const Tensor pw1 = random_tensor({6, 3}, rng);
  const Tensor pw2 = random_tensor({2, 5, 4}, rng);
  std::vector<Tensor> in{y};
  EXPECT_LT(grad_check([&] { return probe(adaptive_avg_pool_last(reshape(y, {6, 7}), 3), pw1); },
                       in),
            1e-4);
  EXPECT_LT(grad_check([&] { return probe(nearest_resize_2d(y, 5, 4), pw2); }, in), 1e-4);
}

TEST(GradCheck, LinearClosureIsExact) {
  Rng rng(12);
  Tensor x = random_tensor({10}, rng, true);
  const Tensor w = random_tensor({10}, rng);
  std::vector<Tensor> in{x};
  EXPECT_LT(grad_check([&] { return probe(x, w); }, in), 1e-10);
}

TEST(GradCheck, NanClosureSignals) {
  Tensor x = Tensor({2}, {1.0, 2.0}, true);
  std::vector<Tensor> in{x};
  // Non-finite results surface as NumericError, either from the op or the checker.
  EXPECT_THROW(grad_check([&] { return sum(scale(x, std::numeric_limits<double>::quiet_NaN())); }, in),
               NumericError);
}

TEST(Tensor, NoGradGuardSkipsGraph) {
  Tensor x = Tensor({2}, {1.0, 2.0}, true);
  {
    NoGradGuard guard;
    EXPECT_FALSE(square(x).requires_grad());
  }
  EXPECT_TRUE(square(x).requires_grad());
}

TEST(Tensor, GradientsAccumulateAcrossUses) {
  Tensor x = Tensor({1}, {3.0}, true);
  // d/dx (x*x + x) = 2x + 1.
  add(mul(x, x), x).backward();
  EXPECT_DOUBLE_EQ(x.grad()[0], 7.0);
  x.zero_grad();
  EXPECT_DOUBLE_EQ(x.grad()[0], 0.0);
}

// ------------------------------------------------------------------ TFAN

TfanParams zeroed_heads(TfanParams p) {
  for (auto* head : {&p.gamma_head, &p.beta_head}) {
    std::fill(head->weight.data_mut().begin(), head->weight.data_mut().end(), 0.0);
  }
  std::fill(p.gamma_head.bias.data_mut().begin(), p.gamma_head.bias.data_mut().end(), 1.0);
  std::fill(p.beta_head.bias.data_mut().begin(), p.beta_head.bias.data_mut().end(), 0.0);
  return p;
}

TEST(Tfan, ReducesToInstanceNorm) {
  Rng rng(13);
  for (TfanMode mode : {TfanMode::OneD, TfanMode::TwoD}) {
    TfanConfig cfg;
    cfg.hidden_channels = 6;
    cfg.mode = mode;
    const Shape fs = mode == TfanMode::OneD ? Shape{5, 8} : Shape{3, 4, 8};
    const TfanParams p = zeroed_heads(make_tfan_params(cfg, fs[0], mode == TfanMode::OneD ? 16 : 1, rng));
    const Tensor f = random_tensor(fs, rng);
    const Tensor x = random_tensor({16, 32}, rng);
    const Tensor y = tfan(f, x, p, cfg);
    const Tensor ref = instance_norm(f);
    for (std::size_t i = 0; i < y.numel(); ++i) EXPECT_EQ(y.at(i), ref.at(i));
  }
}

TEST(Tfan, ConstantFeaturesGiveBeta) {
  Rng rng(14);
  TfanConfig cfg;
  cfg.hidden_channels = 4;
  cfg.mode = TfanMode::TwoD;
  const TfanParams p = make_tfan_params(cfg, 2, 1, rng);
  const Tensor f = Tensor::full({2, 4, 6}, 3.0);
  const Tensor x = random_tensor({8, 12}, rng);
  const auto [gamma, beta] = tfan_modulation(f, x, p, cfg);
  const Tensor y = tfan(f, x, p, cfg);
  for (std::size_t i = 0; i < y.numel(); ++i) EXPECT_NEAR(y.at(i), beta.at(i), 1e-5);
}

TEST(Tfan, MatchesComposedReferenceAndGradients) {
  Rng rng(15);
  for (TfanMode mode : {TfanMode::OneD, TfanMode::TwoD}) {
    TfanConfig cfg;
    cfg.depth = 2;
    cfg.hidden_channels = 3;
    cfg.kernel_size = 3;
    cfg.mode = mode;
    const Shape fs = mode == TfanMode::OneD ? Shape{3, 4} : Shape{2, 3, 4};
    TfanParams p = make_tfan_params(cfg, fs[0], mode == TfanMode::OneD ? 6 : 1, rng);
    Tensor f = random_tensor(fs, rng, true);
    Tensor x = random_tensor({6, 8}, rng, true);

    // Independent composition: scalar-loop instance norm, then gamma * n + beta.
    const auto [gamma, beta] = tfan_modulation(f, x, p, cfg);
    const Tensor y = tfan(f, x, p, cfg);
    const std::size_t c = fs[0], n = f.numel() / c;
    for (std::size_t k = 0; k < c; ++k) {
      double m = 0, v = 0;
      for (std::size_t i = 0; i < n; ++i) m += f.at(k * n + i);
      m /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) v += (f.at(k * n + i) - m) * (f.at(k * n + i) - m);
      const double s = std::sqrt(v / static_cast<double>(n) + 1e-6);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = k * n + i;
        EXPECT_NEAR(y.at(j), gamma.at(j) * (f.at(j) - m) / s + beta.at(j), 1e-9);
      }
    }

    std::vector<Tensor> in{f, x};
    for (auto& layer : p.trunk) {
      in.push_back(layer.weight);
      in.push_back(layer.bias);
    }
    for (auto* head : {&p.gamma_head, &p.beta_head}) {
      in.push_back(head->weight);
      in.push_back(head->bias);
    }
    const Tensor pw = random_tensor(fs, rng);
    EXPECT_LT(grad_check([&] { return probe(tfan(f, x, p, cfg), pw); }, in), 1e-4) << to_string(mode);
  }
}

TEST(Ops, ShapeErrors) {
  EXPECT_THROW(glu(Tensor({3, 4})), ShapeError);
  EXPECT_THROW(pixel_shuffle(Tensor({6, 2, 2}), 2), ShapeError);
  EXPECT_THROW(instance_norm(Tensor({2, 1}, {1.0, 2.0})), ShapeError);
  EXPECT_THROW(add(Tensor({2}), Tensor({3})), ShapeError);
}

TEST(Conv, SamePaddingPreservesSize) {
  Rng rng(16);
  for (std::size_t k : {1u, 3u, 5u, 7u}) {
    const Tensor x = random_tensor({2, 9, 10}, rng);
    const Tensor w = random_tensor({3, 2, k, k}, rng);
    EXPECT_EQ(conv2d(x, w, Tensor(), {1, 1, k / 2, k / 2}).shape(), (Shape{3, 9, 10}));
    const Tensor x1 = random_tensor({2, 11}, rng);
    const Tensor w1 = random_tensor({4, 2, k}, rng);
    EXPECT_EQ(conv1d(x1, w1, Tensor(), {1, k / 2}).shape(), (Shape{4, 11}));
  }
}

TEST(Ops, LargeFiniteInputsStayFinite) {
  const Tensor x({4, 3}, {1e3, -1e3, 0.0, 999.0, -999.0, 1.0, 1e3, 1e3, -1e3, -1e3, 5.0, -5.0});
  for (const Tensor& y : {sigmoid(x), glu(x), instance_norm(x), relu(x), abs(x), square(x)}) {
    for (double v : y.data()) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(Tfan, OutputShapeMatchesFeature) {
  Rng rng(17);
  for (std::size_t depth : {1u, 2u, 4u}) {
    for (TfanMode mode : {TfanMode::OneD, TfanMode::TwoD}) {
      TfanConfig cfg;
      cfg.depth = depth;
      cfg.hidden_channels = 4;
      cfg.mode = mode;
      const Shape fs = mode == TfanMode::OneD ? Shape{6, 5} : Shape{3, 10, 5};
      const TfanParams p = make_tfan_params(cfg, fs[0], mode == TfanMode::OneD ? 20 : 1, rng);
      EXPECT_EQ(p.trunk.size(), depth);
      const Tensor f = random_tensor(fs, rng);
      const Tensor x = random_tensor({20, 20}, rng);
      EXPECT_EQ(tfan(f, x, p, cfg).shape(), fs);
    }
  }
}

TEST(Tfan, ConfigValidation) {
  TfanConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.kernel_size = 4;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.kernel_size = 5;
  cfg.depth = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace cvc3
