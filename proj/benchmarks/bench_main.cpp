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

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "cvc3/init.hpp"
#include "cvc3/models.hpp"
#include "cvc3/ops.hpp"
#include "cvc3/signal.hpp"
#include "cvc3/toyland.hpp"
#include "cvc3/training.hpp"

namespace cvc3 {
namespace {

Tensor filled(const Shape& s, std::uint64_t seed) {
  Rng rng(seed);
  return normal_tensor(s, rng);
}

// 2D conv at the generator's downsampling shape (channels, 80 bins, 128 frames).
void BM_Conv2dForward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const Tensor x = filled({c, 80, 128}, 1), k = filled({2 * c, c, 5, 5}, 2), b = filled({2 * c}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, k, b, {2, 2, 2, 2}));
}
BENCHMARK(BM_Conv2dForward)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Conv2dBackward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const Tensor x = filled({c, 80, 128}, 1);
  Tensor k = filled({2 * c, c, 5, 5}, 2), b = filled({2 * c}, 3);
  k.set_requires_grad(true);
  b.set_requires_grad(true);
  for (auto _ : state) {
    sum(conv2d(x, k, b, {2, 2, 2, 2})).backward();
    k.zero_grad();
    b.zero_grad();
  }
}
BENCHMARK(BM_Conv2dBackward)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_GeneratorForward(benchmark::State& state) {
  GeneratorSpec s;
  s.input_bins = 80;
  s.base_channels = static_cast<std::size_t>(state.range(0));
  s.n_residual_blocks = 2;
  const Generator g(s, 0);
  const Tensor x = filled({80, 128}, 4);
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(g.forward(x));
}
BENCHMARK(BM_GeneratorForward)->ArgName("base")->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_ToyTrainStep(benchmark::State& state) {
  TrainConfig cfg = toy_train_config(0, 2000);
  cfg.generator.tfan_position = state.range(0) ? TfanPosition::Both : TfanPosition::None;
  TrainState s(cfg);
  const Tensor x = filled({cfg.generator.input_bins, cfg.segment_frames}, 5);
  const Tensor y = filled({cfg.generator.input_bins, cfg.segment_frames}, 6);
  for (auto _ : state) benchmark::DoNotOptimize(train_step(s, x, y));
}
BENCHMARK(BM_ToyTrainStep)->ArgName("tfan")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_LogMel(benchmark::State& state) {
  Waveform w;
  w.samples.resize(static_cast<std::size_t>(state.range(0)) * w.sample_rate);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = 0.3 * std::sin(2 * std::numbers::pi * 220.0 * i / w.sample_rate);
  }
  for (auto _ : state) benchmark::DoNotOptimize(log_mel(w));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.samples.size()));
}
BENCHMARK(BM_LogMel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace cvc3

BENCHMARK_MAIN();
