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

#include <fstream>
#include <sstream>

#include "cvc3/errors.hpp"
#include "cvc3/grad_check.hpp"
#include "cvc3/models.hpp"
#include "test_util.hpp"

#ifndef CVC3_SPEC_DIR
#error "CVC3_SPEC_DIR must point at core/specs"
#endif

namespace cvc3 {
namespace {

using testing::probe;
using testing::random_tensor;

const TfanPosition kPositions[] = {TfanPosition::None, TfanPosition::OneDToTwoD, TfanPosition::Upsampling,
                                   TfanPosition::Both};

GeneratorSpec small_spec(TfanPosition pos) {
  GeneratorSpec s;
  s.base_channels = 4;
  s.n_residual_blocks = 2;
  s.tfan.hidden_channels = 4;
  s.tfan.depth = 2;
  s.tfan_position = pos;
  return s;
}

TEST(Generator, ShapePreservingForEveryPosition) {
  Rng rng(1);
  for (TfanPosition pos : kPositions) {
    const Generator g(small_spec(pos), 7);
    for (std::size_t t : {8u, 20u, 64u}) {
      const Tensor x = random_tensor({80, t}, rng);
      const Tensor y = g.forward(x);
      EXPECT_EQ(y.shape(), x.shape()) << to_string(pos);
      for (double v : y.data()) ASSERT_TRUE(std::isfinite(v));
    }
  }
}

TEST(Generator, RejectsBadFrameCount) {
  const Generator g(small_spec(TfanPosition::Both), 1);
  EXPECT_THROW(g.forward(Tensor({80, 10})), ShapeError);
  EXPECT_THROW(g.forward(Tensor({40, 8})), ShapeError);
}

TEST(Generator, ZeroOutputLayerGivesZero) {
  Generator g(small_spec(TfanPosition::Both), 2);
  auto& out = g.output_layer();
  std::fill(out.weight.data_mut().begin(), out.weight.data_mut().end(), 0.0);
  std::fill(out.bias.data_mut().begin(), out.bias.data_mut().end(), 0.0);
  Rng rng(2);
  const Tensor y = g.forward(random_tensor({80, 16}, rng));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(Generator, TfanPathIsActive) {
  Rng rng(3);
  const Tensor x = random_tensor({80, 16}, rng);
  const Tensor a = Generator(small_spec(TfanPosition::None), 5).forward(x);
  const Tensor b = Generator(small_spec(TfanPosition::Both), 5).forward(x);
  double diff = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) diff = std::max(diff, std::abs(a.at(i) - b.at(i)));
  EXPECT_GT(diff, 1e-6);
}

TEST(Generator, SameSeedSameParameters) {
  const Generator a(small_spec(TfanPosition::Both), 11);
  const Generator b(small_spec(TfanPosition::Both), 11);
  const Generator c(small_spec(TfanPosition::Both), 12);
  ASSERT_EQ(a.parameters().size(), b.parameters().size());
  bool differs = false;
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    EXPECT_EQ(a.parameters()[i].name, b.parameters()[i].name);
    const auto da = a.parameters()[i].tensor.data(), db = b.parameters()[i].tensor.data();
    EXPECT_TRUE(std::equal(da.begin(), da.end(), db.begin()));
    const auto dc = c.parameters()[i].tensor.data();
    differs = differs || !std::equal(da.begin(), da.end(), dc.begin());
  }
  EXPECT_TRUE(differs);
}

// Layer-by-layer parameter arithmetic.
std::size_t tfan_count(std::size_t ch, std::size_t cond, const TfanConfig& t, bool two_d) {
  const std::size_t k = two_d ? t.kernel_size * t.kernel_size : t.kernel_size;
  std::size_t n = t.hidden_channels * cond * k + t.hidden_channels;
  n += (t.depth - 1) * (t.hidden_channels * t.hidden_channels * k + t.hidden_channels);
  n += 2 * (ch * t.hidden_channels * k + ch);
  return n;
}

std::size_t closed_form_generator_params(const GeneratorSpec& s) {
  const std::size_t c = s.base_channels, q4 = s.input_bins / 4;
  const bool t1 = s.tfan_position == TfanPosition::OneDToTwoD || s.tfan_position == TfanPosition::Both;
  const bool t2 = s.tfan_position == TfanPosition::Upsampling || s.tfan_position == TfanPosition::Both;
  std::size_t n = 2 * c * 75 + 2 * c;                       // input
  n += 4 * c * c * 25 + 4 * c + 8 * c;                       // down1 + IN
  n += 4 * c * 2 * c * 25 + 4 * c + 8 * c;                   // down2 + IN
  n += 2 * c * 2 * c * q4 + 2 * c + 4 * c;                   // to_1d + IN
  n += s.n_residual_blocks * ((4 * c * 2 * c * 3 + 4 * c + 8 * c) + (2 * c * 2 * c * 3 + 2 * c + 4 * c));
  n += 2 * c * q4 * 2 * c + 2 * c * q4;                      // to_2d
  n += t1 ? tfan_count(2 * c * q4, s.input_bins, s.tfan, false) : 2 * 2 * c * q4;
  n += 8 * c * 2 * c * 25 + 8 * c;                           // up1
  n += t2 ? tfan_count(2 * c, 1, s.tfan, true) : 2 * 2 * c;
  n += 4 * c * c * 25 + 4 * c;                               // up2
  n += t2 ? tfan_count(c, 1, s.tfan, true) : 2 * c;
  n += (c / 2) * 75 + 1;                                     // output
  return n;
}

TEST(Generator, ParameterCountClosedForm) {
  for (TfanPosition pos : kPositions) {
    GeneratorSpec s = GeneratorSpec::desk_scale();
    s.tfan_position = pos;
    const Generator g(s, 0);
    std::size_t actual = 0;
    for (const auto& p : g.parameters()) actual += p.tensor.numel();
    EXPECT_EQ(actual, closed_form_generator_params(s)) << to_string(pos);
    EXPECT_EQ(g.parameter_count(), actual);
  }
}

TEST(Generator, GoldenVc2Layout) {
  const GeneratorSpec spec = load_generator_spec(std::string(CVC3_SPEC_DIR) + "/generator_vc2.spec");
  EXPECT_EQ(spec.tfan_position, TfanPosition::None);
  EXPECT_EQ(spec.base_channels, 128u);
  std::ifstream golden(std::string(CVC3_SPEC_DIR) + "/generator_vc2.layers");
  ASSERT_TRUE(golden.good());
  std::vector<std::string> expected;
  for (std::string line; std::getline(golden, line);) {
    if (!line.empty()) expected.push_back(line);
  }
  EXPECT_EQ(Generator(spec, 0).layers(), expected);
}

TEST(Generator, TinySpecGradients) {
  GeneratorSpec s;
  s.input_bins = 8;
  s.base_channels = 4;
  s.n_residual_blocks = 1;
  s.tfan.depth = 1;
  s.tfan.hidden_channels = 2;
  s.tfan.kernel_size = 3;
  s.tfan_position = TfanPosition::Both;
  Generator g(s, 3);
  Rng rng(4);
  Tensor x = random_tensor({8, 16}, rng, true);
  const Tensor w = random_tensor({8, 16}, rng);
  const auto closure = [&] { return probe(g.forward(x), w); };
  std::vector<Tensor> live{x};
  std::vector<Tensor> dead;
  for (auto& p : g.parameters()) {
    (testing::shift_invariant_generator_param(p.name, g.spec().n_residual_blocks) ? dead : live).push_back(p.tensor);
  }
  EXPECT_EQ(dead.size(), 7u);
  EXPECT_LT(grad_check(closure, live), 1e-4);
  // Exact gradient zero: analytic values vanish and differences stay at roundoff.
  for (auto& t : dead) {
    for (double v : t.grad()) EXPECT_LT(std::abs(v), 1e-12);
    EXPECT_LT(testing::max_abs_finite_difference(closure, t), 1e-8);
  }
}

TEST(Generator, EveryParameterGetsGradient) {
  Generator g(small_spec(TfanPosition::Both), 6);
  Rng rng(6);
  const Tensor x = random_tensor({80, 16}, rng);
  const Tensor w = random_tensor({80, 16}, rng);
  probe(g.forward(x), w).backward();
  for (const auto& p : g.parameters()) {
    double norm = 0;
    for (double v : p.tensor.grad()) norm += v * v;
    if (testing::shift_invariant_generator_param(p.name, g.spec().n_residual_blocks)) {
      EXPECT_LT(std::sqrt(norm), 1e-10) << p.name;
    } else {
      EXPECT_GT(std::sqrt(norm), 1e-8) << p.name;
    }
  }
}

TEST(GeneratorSpec, KeyValueRoundTripAndValidation) {
  GeneratorSpec s = GeneratorSpec::paper_scale();
  s.tfan_position = TfanPosition::Upsampling;
  s.tfan.depth = 2;
  EXPECT_EQ(GeneratorSpec::from_key_values(s.to_key_values("g.") , "g."), s);
  EXPECT_EQ(GeneratorSpec::paper_scale().base_channels, 128u);
  EXPECT_EQ(GeneratorSpec::desk_scale().base_channels, 32u);
  GeneratorSpec bad;
  bad.input_bins = 78;
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(parse_tfan_position("sideways"), ConfigError);
  for (TfanPosition pos : kPositions) EXPECT_EQ(parse_tfan_position(to_string(pos)), pos);
}

TEST(Discriminator, PatchMapAndBiasOnly) {
  Discriminator d(DiscriminatorSpec{8, 3, true, true}, 1);
  Rng rng(7);
  const Tensor y = d.forward(random_tensor({80, 64}, rng));
  EXPECT_GT(y.numel(), 1u);
  EXPECT_EQ(y.shape(), (Shape{d.output_extent(80, 64).first, d.output_extent(80, 64).second}));

  auto& out = d.output_layer();
  std::fill(out.weight.data_mut().begin(), out.weight.data_mut().end(), 0.0);
  out.bias.data_mut()[0] = 0.375;
  const Tensor z = d.forward(random_tensor({80, 64}, rng));
  for (double v : z.data()) EXPECT_EQ(v, 0.375);
}

TEST(Discriminator, RejectsTinyInput) {
  const Discriminator d(DiscriminatorSpec{4, 3, true, true}, 1);
  EXPECT_THROW(d.forward(Tensor({4, 4})), ShapeError);
}

// Receptive field from the stack geometry: span 1 + sum (k_l - 1) J_l and
// offset sum p_l J_l, with J_l the product of earlier strides.
struct Axis {
  std::size_t k, s, p;
};

std::pair<long long, long long> closed_form_field(const std::vector<Axis>& stack, std::size_t cell) {
  long long jump = 1, span = 1, offset = 0;
  for (const auto& a : stack) {
    span += static_cast<long long>(a.k - 1) * jump;
    offset += static_cast<long long>(a.p) * jump;
    jump *= static_cast<long long>(a.s);
  }
  const long long lo = static_cast<long long>(cell) * jump - offset;
  return {lo, lo + span - 1};
}

TEST(Discriminator, ReceptiveFieldMatchesPerturbationProbe) {
  // Without normalization every patch cell has a bounded dependency set.
  const Discriminator d(DiscriminatorSpec{4, 3, true, false}, 9);
  const std::vector<Axis> freq{{3, 1, 1}, {3, 2, 1}, {3, 2, 1}, {3, 2, 1}, {2, 1, 0}, {1, 1, 0}};
  const std::vector<Axis> time{{3, 1, 1}, {3, 2, 1}, {3, 2, 1}, {3, 2, 1}, {5, 1, 2}, {3, 1, 1}};
  Rng rng(10);
  const Tensor x = random_tensor({80, 64}, rng);
  const Tensor base = d.forward(x);
  const std::size_t oq = base.dim(0), ot = base.dim(1);
  const std::pair<std::size_t, std::size_t> cells[] = {{0, 0}, {oq / 2, ot / 2}, {oq - 1, ot - 1}, {1, ot - 2}};
  for (auto [qi, ti] : cells) {
    const auto [fq, ft] = d.receptive_field(qi, ti);
    const auto cq = closed_form_field(freq, qi);
    const auto ct = closed_form_field(time, ti);
    EXPECT_EQ(fq.lo, cq.first);
    EXPECT_EQ(fq.hi, cq.second);
    EXPECT_EQ(ft.lo, ct.first);
    EXPECT_EQ(ft.hi, ct.second);
  }
  // Perturb single input coordinates and compare with the fields.
  for (std::size_t q = 0; q < 80; q += 3) {
    for (std::size_t t = 0; t < 64; t += 5) {
      Tensor xp = x.detach();
      xp.data_mut()[q * 64 + t] += 1.0;
      const Tensor yp = d.forward(xp);
      for (auto [qi, ti] : cells) {
        const auto [fq, ft] = d.receptive_field(qi, ti);
        const bool inside = static_cast<long long>(q) >= fq.lo && static_cast<long long>(q) <= fq.hi &&
                            static_cast<long long>(t) >= ft.lo && static_cast<long long>(t) <= ft.hi;
        const std::size_t idx = qi * ot + ti;
        if (!inside) EXPECT_EQ(yp.at(idx), base.at(idx)) << q << "," << t << " cell " << qi << "," << ti;
      }
    }
  }
  // The field is tight: its corners do influence the cell.
  const auto [fq, ft] = d.receptive_field(oq / 2, ot / 2);
  std::size_t moved = 0;
  for (long long q : {fq.lo, fq.hi}) {
    for (long long t : {ft.lo, ft.hi}) {
      if (q < 0 || t < 0 || q >= 80 || t >= 64) continue;
      Tensor xp = x.detach();
      xp.data_mut()[static_cast<std::size_t>(q) * 64 + static_cast<std::size_t>(t)] += 1.0;
      if (d.forward(xp).at((oq / 2) * ot + ot / 2) != base.at((oq / 2) * ot + ot / 2)) ++moved;
    }
  }
  EXPECT_GT(moved, 0u);
}

TEST(Discriminator, GradientsAndDeterminism) {
  Discriminator d(DiscriminatorSpec{2, 3, true, true}, 4);
  Rng rng(11);
  Tensor x = random_tensor({32, 32}, rng, true);
  const auto ext = d.output_extent(32, 32);
  const Tensor w = random_tensor({ext.first, ext.second}, rng);
  const auto closure = [&] { return probe(d.forward(x), w); };
  std::vector<Tensor> live{x};
  std::vector<Tensor> dead;
  for (auto& p : d.parameters()) {
    (testing::shift_invariant_discriminator_param(p.name) ? dead : live).push_back(p.tensor);
  }
  EXPECT_EQ(dead.size(), 4u);
  EXPECT_LT(grad_check(closure, live), 1e-4);
  for (auto& t : dead) EXPECT_LT(testing::max_abs_finite_difference(closure, t), 1e-8);

  const Discriminator e(DiscriminatorSpec{2, 3, true, true}, 4);
  for (std::size_t i = 0; i < d.parameters().size(); ++i) {
    const auto a = d.parameters()[i].tensor.data(), b = e.parameters()[i].tensor.data();
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST(DiscriminatorSpec, ShippedSpecLoads) {
  const DiscriminatorSpec s = load_discriminator_spec(std::string(CVC3_SPEC_DIR) + "/discriminator_paper.spec");
  EXPECT_EQ(s, DiscriminatorSpec::paper_scale());
  EXPECT_EQ(DiscriminatorSpec::from_key_values(s.to_key_values("d."), "d."), s);
}

}  // namespace
}  // namespace cvc3
