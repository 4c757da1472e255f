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

// 2-1-2D generator with optional TFAN sites and PatchGAN discriminator.
//
// Generator layout (C = base_channels, Q = input_bins):
//   input     conv2d 1 -> 2C, k 5x15, GLU                        [C, Q, T]
//   down1/2   conv2d k 5x5 stride 2, IN, GLU                     [2C, Q/4, T/4]
//   to_1d     flatten to [2C*Q/4, T/4], conv1d k1 -> 2C, IN
//   res*      conv1d k3 -> 4C, IN, GLU, conv1d k3 -> 2C, IN, skip
//   to_2d     conv1d k1 -> 2C*Q/4, IN or 1D TFAN, reshape
//   up1       conv2d k5x5 -> 8C, pixel shuffle, IN or 2D TFAN, GLU  [C, Q/2, T/2]
//   up2       conv2d k5x5 -> 4C, pixel shuffle, IN or 2D TFAN, GLU  [C/2, Q, T]
//   output    conv2d -> 1, k 5x15
// Instance norms carry a learned per-channel scale and shift.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvc3/key_value.hpp"
#include "cvc3/tensor.hpp"
#include "cvc3/tfan.hpp"

namespace cvc3 {

enum class TfanPosition { None, OneDToTwoD, Upsampling, Both };

std::string to_string(TfanPosition p);
TfanPosition parse_tfan_position(const std::string& s);

struct GeneratorSpec {
  std::size_t input_bins = 80;
  std::size_t base_channels = 32;
  std::size_t n_residual_blocks = 6;
  TfanConfig tfan{};  // mode is set per site
  TfanPosition tfan_position = TfanPosition::Both;
  bool use_plain_in_when_none = true;

  void validate() const;
  bool operator==(const GeneratorSpec&) const = default;

  static GeneratorSpec paper_scale();
  static GeneratorSpec desk_scale();

  KeyValues to_key_values(const std::string& prefix = "") const;
  static GeneratorSpec from_key_values(const KeyValues& kv, const std::string& prefix = "");
};

struct DiscriminatorSpec {
  std::size_t base_channels = 32;
  std::size_t n_downsample = 3;
  bool second_last_freq_kernel_doubled = true;
  bool instance_norm = true;

  void validate() const;
  bool operator==(const DiscriminatorSpec&) const = default;

  static DiscriminatorSpec paper_scale();
  static DiscriminatorSpec desk_scale();

  KeyValues to_key_values(const std::string& prefix = "") const;
  static DiscriminatorSpec from_key_values(const KeyValues& kv, const std::string& prefix = "");
};

GeneratorSpec load_generator_spec(const std::string& path);
DiscriminatorSpec load_discriminator_spec(const std::string& path);

struct NamedParam {
  std::string name;
  Tensor tensor;
};

/// Shared parameter bookkeeping of the networks.
class Module {
 public:
  Module() = default;
  Module(const Module&) = delete;
  Module& operator=(const Module&) = delete;
  Module(Module&&) = default;
  Module& operator=(Module&&) = default;
  virtual ~Module() = default;

  std::vector<NamedParam>& parameters() { return params_; }
  const std::vector<NamedParam>& parameters() const { return params_; }
  std::size_t parameter_count() const;
  void zero_grad();
  /// Human-readable architecture, one layer per line.
  const std::vector<std::string>& layers() const { return layers_; }

 protected:
  Tensor& register_param(std::string name, Tensor t);
  void describe(std::string line) { layers_.push_back(std::move(line)); }

 private:
  std::vector<NamedParam> params_;
  std::vector<std::string> layers_;
};

struct Conv2dLayer {
  Tensor weight, bias;
  std::size_t stride_h = 1, stride_w = 1, pad_h = 0, pad_w = 0;
  Tensor operator()(const Tensor& x) const;
};

struct Conv1dLayer {
  Tensor weight, bias;
  std::size_t padding = 0;
  Tensor operator()(const Tensor& x) const;
};

/// Normalization site: instance norm with affine, TFAN, or identity.
struct NormSite {
  enum class Kind { Identity, InstanceNorm, Tfan } kind = Kind::InstanceNorm;
  Tensor gamma, beta;
  TfanParams tfan;
  TfanConfig tfan_cfg;
  Tensor operator()(const Tensor& f, const Tensor& source) const;
};

class Generator : public Module {
 public:
  Generator(const GeneratorSpec& spec, std::uint64_t seed);

  /// x: normalized source spectrogram [Q, T] with T divisible by 4.
  Tensor forward(const Tensor& x) const;
  const GeneratorSpec& spec() const { return spec_; }

  /// Final conv layer, exposed for zero-output checks.
  Conv2dLayer& output_layer() { return output_; }

 private:
  struct ResidualBlock {
    Conv1dLayer conv1, conv2;
    NormSite norm1, norm2;
  };
  struct UpBlock {
    Conv2dLayer conv;
    NormSite norm;
  };

  Conv2dLayer conv2d_layer(const std::string& name, std::size_t in, std::size_t out,
                           std::size_t kh, std::size_t kw, std::size_t stride, Rng& rng);
  Conv1dLayer conv1d_layer(const std::string& name, std::size_t in, std::size_t out,
                           std::size_t k, Rng& rng);
  NormSite affine_norm(const std::string& name, std::size_t channels);
  NormSite norm_site(const std::string& name, std::size_t channels, bool use_tfan, TfanMode mode,
                     Rng& rng);

  GeneratorSpec spec_;
  Conv2dLayer input_;
  Conv2dLayer down_[2];
  NormSite down_norm_[2];
  Conv1dLayer to_1d_;
  NormSite to_1d_norm_;
  std::vector<ResidualBlock> residual_;
  Conv1dLayer to_2d_;
  NormSite to_2d_norm_;
  UpBlock up_[2];
  Conv2dLayer output_;
};

/// Kernel/stride/padding of one conv along one axis.
struct AxisGeometry {
  std::size_t kernel, stride, pad;
};

/// Inclusive input interval seen by one patch cell along one axis, before
/// clipping to the input extent.
struct FieldInterval {
  long long lo, hi;
};

class Discriminator : public Module {
 public:
  Discriminator(const DiscriminatorSpec& spec, std::uint64_t seed);

  /// m: spectrogram [Q, T]; returns the patch map [Q', T'].
  Tensor forward(const Tensor& m) const;
  const DiscriminatorSpec& spec() const { return spec_; }

  /// Output patch-map extent for a given input, or ShapeError when the input
  /// is too small for the stack.
  std::pair<std::size_t, std::size_t> output_extent(std::size_t q, std::size_t t) const;

  /// Receptive field of patch cell (qi, ti) along frequency and time.
  std::pair<FieldInterval, FieldInterval> receptive_field(std::size_t qi, std::size_t ti) const;

  Conv2dLayer& output_layer() { return output_; }

 private:
  struct Block {
    Conv2dLayer conv;
    NormSite norm;
  };

  DiscriminatorSpec spec_;
  Conv2dLayer input_;
  std::vector<Block> blocks_;  // downsamples followed by the second-last conv
  Conv2dLayer output_;
};

}  // namespace cvc3
