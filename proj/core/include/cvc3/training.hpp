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

// Non-parallel CycleGAN training: segment sampling, one discriminator and one
// generator Adam update per iteration, checkpoints with bitwise resume.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cvc3/init.hpp"
#include "cvc3/key_value.hpp"
#include "cvc3/losses.hpp"
#include "cvc3/models.hpp"
#include "cvc3/signal.hpp"

namespace cvc3 {

struct TrainConfig {
  std::uint64_t iterations = 5000;
  std::size_t batch_size = 1;
  std::size_t segment_frames = 64;
  double lr_g = 0.0002;
  double lr_d = 0.0001;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  LossWeights weights{};
  std::uint64_t seed = 0;
  std::uint64_t checkpoint_every = 1000;
  GeneratorSpec generator = GeneratorSpec::desk_scale();
  DiscriminatorSpec discriminator = DiscriminatorSpec::desk_scale();

  void validate() const;
  bool operator==(const TrainConfig&) const = default;

  KeyValues to_key_values() const;
  static TrainConfig from_key_values(const KeyValues& kv);
};

struct AdamMoments {
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m, v;  // one entry per parameter tensor
};

/// In-place Adam update with bias correction using the current gradients:
/// p -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_update(std::vector<NamedParam*> params, AdamMoments& moments, double lr, double beta1,
                 double beta2, double eps);

struct TrainState {
  explicit TrainState(const TrainConfig& cfg);

  TrainConfig config;
  Generator g_xy, g_yx;
  Discriminator d_x, d_y, d2_x, d2_y;
  AdamMoments opt_g, opt_d;
  std::uint64_t iteration = 0;
  Rng rng;
  std::optional<FeatureStats> stats_x, stats_y;

  /// Every trainable tensor with a unique "network/param" name.
  std::vector<std::pair<std::string, NamedParam*>> named_parameters();
  std::vector<NamedParam*> generator_parameters();
  std::vector<NamedParam*> discriminator_parameters();
};

/// Uniform utterance choice, then uniform start offset; returns [Q, frames].
Tensor sample_segment(const std::vector<Tensor>& corpus, std::size_t frames, Rng& rng);

/// Normalizes with `stats` and reflection-pads utterances shorter than `min_frames`.
std::vector<Tensor> prepare_corpus(const std::vector<MelSpectrogram>& corpus, const FeatureStats& stats,
                                   std::size_t min_frames);

/// One discriminator update on detached fakes, then one generator update.
/// Increments state.iteration. Throws NumericError on non-finite losses.
LossReport train_step(TrainState& state, const Tensor& x_seg, const Tensor& y_seg);

// ------------------------------------------------------------------ checkpoints

constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize_checkpoint(TrainState& state);
void save_checkpoint(TrainState& state, const std::string& path);
/// Throws FormatError on corruption or version mismatch.
TrainState load_checkpoint(const std::string& path);
/// Additionally throws SpecMismatchError when the stored architecture differs.
TrainState load_checkpoint(const std::string& path, const GeneratorSpec& expected_g,
                           const DiscriminatorSpec& expected_d);

// ------------------------------------------------------------------ fit

struct FitOptions {
  std::string out_dir;       // checkpoints and losses.csv; empty = no files
  std::string resume_from;   // checkpoint to continue from
  std::optional<std::uint64_t> stop_at;  // stop early at this iteration
  std::optional<FeatureStats> stats_x, stats_y;
  std::function<void(const TrainState&, const LossReport&)> on_step;
};

struct FitResult {
  std::vector<LossReport> losses;  // this invocation only
  std::string last_checkpoint;
};

std::string checkpoint_name(std::uint64_t iteration);

/// Runs train_step until config.iterations (or stop_at). Writes a checkpoint
/// whenever the iteration count is a multiple of checkpoint_every, including
/// iteration 0, and at the end.
FitResult fit(TrainState& state, const std::vector<Tensor>& corpus_x,
              const std::vector<Tensor>& corpus_y, const FitOptions& opt);

}  // namespace cvc3
