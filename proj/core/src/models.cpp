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

#include "cvc3/models.hpp"

#include <sstream>

#include "cvc3/errors.hpp"
#include "cvc3/ops.hpp"

namespace cvc3 {

std::string to_string(TfanPosition p) {
  switch (p) {
    case TfanPosition::None: return "none";
    case TfanPosition::OneDToTwoD: return "one_d_to_two_d";
    case TfanPosition::Upsampling: return "upsampling";
    case TfanPosition::Both: return "both";
  }
  return "none";
}

TfanPosition parse_tfan_position(const std::string& s) {
  if (s == "none") return TfanPosition::None;
  if (s == "one_d_to_two_d" || s == "1d2d") return TfanPosition::OneDToTwoD;
  if (s == "upsampling") return TfanPosition::Upsampling;
  if (s == "both") return TfanPosition::Both;
  throw ConfigError("unknown tfan position '" + s + "'");
}

// ---------------------------------------------------------------- specs

void GeneratorSpec::validate() const {
  if (input_bins == 0 || input_bins % 4 != 0) {
    throw ConfigError("generator input_bins must be a positive multiple of 4");
  }
  if (base_channels < 2 || base_channels % 2 != 0) {
    throw ConfigError("generator base_channels must be even and >= 2");
  }
  tfan.validate();
}

GeneratorSpec GeneratorSpec::paper_scale() {
  GeneratorSpec s;
  s.base_channels = 128;
  s.tfan.hidden_channels = 128;
  return s;
}

GeneratorSpec GeneratorSpec::desk_scale() {
  GeneratorSpec s;
  s.base_channels = 32;
  s.tfan.hidden_channels = 32;
  return s;
}

KeyValues GeneratorSpec::to_key_values(const std::string& prefix) const {
  KeyValues kv;
  kv.set(prefix + "input_bins", std::uint64_t{input_bins});
  kv.set(prefix + "base_channels", std::uint64_t{base_channels});
  kv.set(prefix + "n_residual_blocks", std::uint64_t{n_residual_blocks});
  kv.set(prefix + "tfan_position", to_string(tfan_position));
  kv.set(prefix + "tfan_depth", std::uint64_t{tfan.depth});
  kv.set(prefix + "tfan_hidden_channels", std::uint64_t{tfan.hidden_channels});
  kv.set(prefix + "tfan_kernel_size", std::uint64_t{tfan.kernel_size});
  kv.set(prefix + "use_plain_in_when_none", use_plain_in_when_none);
  return kv;
}

GeneratorSpec GeneratorSpec::from_key_values(const KeyValues& kv, const std::string& prefix) {
  GeneratorSpec s;
  s.input_bins = kv.get_uint(prefix + "input_bins", s.input_bins);
  s.base_channels = kv.get_uint(prefix + "base_channels", s.base_channels);
  s.n_residual_blocks = kv.get_uint(prefix + "n_residual_blocks", s.n_residual_blocks);
  s.tfan_position = parse_tfan_position(kv.get_string(prefix + "tfan_position", to_string(s.tfan_position)));
  s.tfan.depth = kv.get_uint(prefix + "tfan_depth", s.tfan.depth);
  s.tfan.hidden_channels = kv.get_uint(prefix + "tfan_hidden_channels", s.tfan.hidden_channels);
  s.tfan.kernel_size = kv.get_uint(prefix + "tfan_kernel_size", s.tfan.kernel_size);
  s.use_plain_in_when_none = kv.get_bool(prefix + "use_plain_in_when_none", s.use_plain_in_when_none);
  s.validate();
  return s;
}

void DiscriminatorSpec::validate() const {
  if (base_channels < 1) throw ConfigError("discriminator base_channels must be >= 1");
  if (n_downsample < 1) throw ConfigError("discriminator n_downsample must be >= 1");
}

DiscriminatorSpec DiscriminatorSpec::paper_scale() {
  DiscriminatorSpec s;
  s.base_channels = 128;
  return s;
}

DiscriminatorSpec DiscriminatorSpec::desk_scale() { return DiscriminatorSpec{}; }

KeyValues DiscriminatorSpec::to_key_values(const std::string& prefix) const {
  KeyValues kv;
  kv.set(prefix + "base_channels", std::uint64_t{base_channels});
  kv.set(prefix + "n_downsample", std::uint64_t{n_downsample});
  kv.set(prefix + "second_last_freq_kernel_doubled", second_last_freq_kernel_doubled);
  kv.set(prefix + "instance_norm", instance_norm);
  return kv;
}

DiscriminatorSpec DiscriminatorSpec::from_key_values(const KeyValues& kv, const std::string& prefix) {
  DiscriminatorSpec s;
  s.base_channels = kv.get_uint(prefix + "base_channels", s.base_channels);
  s.n_downsample = kv.get_uint(prefix + "n_downsample", s.n_downsample);
  s.second_last_freq_kernel_doubled =
      kv.get_bool(prefix + "second_last_freq_kernel_doubled", s.second_last_freq_kernel_doubled);
  s.instance_norm = kv.get_bool(prefix + "instance_norm", s.instance_norm);
  s.validate();
  return s;
}

GeneratorSpec load_generator_spec(const std::string& path) {
  return GeneratorSpec::from_key_values(KeyValues::load(path));
}

DiscriminatorSpec load_discriminator_spec(const std::string& path) {
  return DiscriminatorSpec::from_key_values(KeyValues::load(path));
}

// ---------------------------------------------------------------- layers

std::size_t Module::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.numel();
  return n;
}

void Module::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

Tensor& Module::register_param(std::string name, Tensor t) {
  params_.push_back({std::move(name), std::move(t)});
  return params_.back().tensor;
}

Tensor Conv2dLayer::operator()(const Tensor& x) const {
  return conv2d(x, weight, bias, {stride_h, stride_w, pad_h, pad_w});
}

Tensor Conv1dLayer::operator()(const Tensor& x) const {
  return conv1d(x, weight, bias, {1, padding});
}

Tensor NormSite::operator()(const Tensor& f, const Tensor& source) const {
  switch (kind) {
    case Kind::Identity: return f;
    case Kind::InstanceNorm: return channel_affine(instance_norm(f), gamma, beta);
    case Kind::Tfan: return cvc3::tfan(f, source, tfan, tfan_cfg);
  }
  return f;
}

namespace {

std::string conv_line(const std::string& name, const char* kind, std::size_t in, std::size_t out,
                      std::size_t kh, std::size_t kw, std::size_t sh, std::size_t sw,
                      std::size_t ph, std::size_t pw) {
  std::ostringstream os;
  os << name << ' ' << kind << " in=" << in << " out=" << out << " kernel=" << kh << 'x' << kw
     << " stride=" << sh << 'x' << sw << " pad=" << ph << 'x' << pw;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- generator

Conv2dLayer Generator::conv2d_layer(const std::string& name, std::size_t in, std::size_t out,
                                    std::size_t kh, std::size_t kw, std::size_t stride, Rng& rng) {
  Conv2dLayer l;
  const std::size_t fan_in = in * kh * kw;
  l.weight = register_param(name + ".weight", uniform_param({out, in, kh, kw}, fan_in, rng));
  l.bias = register_param(name + ".bias", uniform_param({out}, fan_in, rng));
  l.stride_h = l.stride_w = stride;
  l.pad_h = kh / 2;
  l.pad_w = kw / 2;
  describe(conv_line(name, "conv2d", in, out, kh, kw, stride, stride, l.pad_h, l.pad_w));
  return l;
}

Conv1dLayer Generator::conv1d_layer(const std::string& name, std::size_t in, std::size_t out,
                                    std::size_t k, Rng& rng) {
  Conv1dLayer l;
  l.weight = register_param(name + ".weight", uniform_param({out, in, k}, in * k, rng));
  l.bias = register_param(name + ".bias", uniform_param({out}, in * k, rng));
  l.padding = k / 2;
  describe(conv_line(name, "conv1d", in, out, 1, k, 1, 1, 0, l.padding));
  return l;
}

NormSite Generator::affine_norm(const std::string& name, std::size_t channels) {
  NormSite n;
  n.kind = NormSite::Kind::InstanceNorm;
  n.gamma = register_param(name + ".gamma", constant_param({channels}, 1.0));
  n.beta = register_param(name + ".beta", constant_param({channels}, 0.0));
  describe(name + " instance_norm channels=" + std::to_string(channels));
  return n;
}

NormSite Generator::norm_site(const std::string& name, std::size_t channels, bool use_tfan,
                              TfanMode mode, Rng& rng) {
  if (!use_tfan) {
    if (spec_.tfan_position == TfanPosition::None && !spec_.use_plain_in_when_none) {
      describe(name + " identity channels=" + std::to_string(channels));
      return NormSite{NormSite::Kind::Identity, {}, {}, {}, {}};
    }
    return affine_norm(name, channels);
  }
  NormSite n;
  n.kind = NormSite::Kind::Tfan;
  n.tfan_cfg = spec_.tfan;
  n.tfan_cfg.mode = mode;
  const std::size_t cond = mode == TfanMode::OneD ? spec_.input_bins : 1;
  n.tfan = make_tfan_params(n.tfan_cfg, channels, cond, rng);
  for (std::size_t i = 0; i < n.tfan.trunk.size(); ++i) {
    const std::string p = name + ".tfan.trunk" + std::to_string(i);
    register_param(p + ".weight", n.tfan.trunk[i].weight);
    register_param(p + ".bias", n.tfan.trunk[i].bias);
  }
  register_param(name + ".tfan.gamma.weight", n.tfan.gamma_head.weight);
  register_param(name + ".tfan.gamma.bias", n.tfan.gamma_head.bias);
  register_param(name + ".tfan.beta.weight", n.tfan.beta_head.weight);
  register_param(name + ".tfan.beta.bias", n.tfan.beta_head.bias);
  std::ostringstream os;
  os << name << " tfan_" << to_string(mode) << " channels=" << channels << " cond=" << cond
     << " depth=" << n.tfan_cfg.depth << " hidden=" << n.tfan_cfg.hidden_channels
     << " kernel=" << n.tfan_cfg.kernel_size;
  describe(os.str());
  return n;
}

Generator::Generator(const GeneratorSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  Rng rng(seed);
  const std::size_t c = spec_.base_channels;
  const std::size_t q4 = spec_.input_bins / 4;
  const bool tfan_1d = spec_.tfan_position == TfanPosition::OneDToTwoD ||
                       spec_.tfan_position == TfanPosition::Both;
  const bool tfan_up = spec_.tfan_position == TfanPosition::Upsampling ||
                       spec_.tfan_position == TfanPosition::Both;

  input_ = conv2d_layer("input", 1, 2 * c, 5, 15, 1, rng);
  describe("input glu out=" + std::to_string(c));
  const std::size_t down_in[2] = {c, 2 * c};
  for (int i = 0; i < 2; ++i) {
    const std::string name = "down" + std::to_string(i + 1);
    down_[i] = conv2d_layer(name, down_in[i], 4 * c, 5, 5, 2, rng);
    down_norm_[i] = affine_norm(name + ".norm", 4 * c);
    describe(name + " glu out=" + std::to_string(2 * c));
  }
  describe("to_1d reshape channels=" + std::to_string(2 * c * q4));
  to_1d_ = conv1d_layer("to_1d", 2 * c * q4, 2 * c, 1, rng);
  to_1d_norm_ = affine_norm("to_1d.norm", 2 * c);
  for (std::size_t i = 0; i < spec_.n_residual_blocks; ++i) {
    const std::string name = "res" + std::to_string(i + 1);
    ResidualBlock b;
    b.conv1 = conv1d_layer(name + ".conv1", 2 * c, 4 * c, 3, rng);
    b.norm1 = affine_norm(name + ".norm1", 4 * c);
    describe(name + " glu out=" + std::to_string(2 * c));
    b.conv2 = conv1d_layer(name + ".conv2", 2 * c, 2 * c, 3, rng);
    b.norm2 = affine_norm(name + ".norm2", 2 * c);
    describe(name + " skip_add");
    residual_.push_back(std::move(b));
  }
  to_2d_ = conv1d_layer("to_2d", 2 * c, 2 * c * q4, 1, rng);
  to_2d_norm_ = norm_site("to_2d.norm", 2 * c * q4, tfan_1d, TfanMode::OneD, rng);
  describe("to_2d reshape channels=" + std::to_string(2 * c));
  const std::size_t up_in[2] = {2 * c, c};
  for (int i = 0; i < 2; ++i) {
    const std::string name = "up" + std::to_string(i + 1);
    const std::size_t in = up_in[i];
    up_[i].conv = conv2d_layer(name, in, 4 * in, 5, 5, 1, rng);
    describe(name + " pixel_shuffle r=2 out=" + std::to_string(in));
    up_[i].norm = norm_site(name + ".norm", in, tfan_up, TfanMode::TwoD, rng);
    describe(name + " glu out=" + std::to_string(in / 2));
  }
  output_ = conv2d_layer("output", c / 2, 1, 5, 15, 1, rng);
}

Tensor Generator::forward(const Tensor& x) const {
  if (x.rank() != 2 || x.dim(0) != spec_.input_bins) {
    throw ShapeError("generator: expected [" + std::to_string(spec_.input_bins) + ", T], got " +
                     shape_string(x.shape()));
  }
  const std::size_t q = x.dim(0), t = x.dim(1);
  if (t == 0 || t % 4 != 0) {
    throw ShapeError("generator: frame count " + std::to_string(t) + " must be a positive multiple of 4");
  }
  const std::size_t c = spec_.base_channels;

  Tensor h = glu(input_(reshape(x, {1, q, t})));
  for (int i = 0; i < 2; ++i) h = glu(down_norm_[i](down_[i](h), x));

  h = reshape(h, {2 * c * (q / 4), t / 4});
  h = to_1d_norm_(to_1d_(h), x);
  for (const auto& b : residual_) {
    Tensor r = glu(b.norm1(b.conv1(h), x));
    r = b.norm2(b.conv2(r), x);
    h = add(h, r);
  }
  h = to_2d_norm_(to_2d_(h), x);
  h = reshape(h, {2 * c, q / 4, t / 4});

  for (const auto& up : up_) h = glu(up.norm(pixel_shuffle(up.conv(h), 2), x));
  return reshape(output_(h), {q, t});
}

// ---------------------------------------------------------------- discriminator

Discriminator::Discriminator(const DiscriminatorSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  Rng rng(seed);
  const std::size_t c = spec_.base_channels;
  auto conv = [&](const std::string& name, std::size_t in, std::size_t out, std::size_t kh,
                  std::size_t kw, std::size_t stride, std::size_t ph, std::size_t pw) {
    Conv2dLayer l;
    const std::size_t fan_in = in * kh * kw;
    l.weight = register_param(name + ".weight", uniform_param({out, in, kh, kw}, fan_in, rng));
    l.bias = register_param(name + ".bias", uniform_param({out}, fan_in, rng));
    l.stride_h = l.stride_w = stride;
    l.pad_h = ph;
    l.pad_w = pw;
    describe(conv_line(name, "conv2d", in, out, kh, kw, stride, stride, ph, pw));
    return l;
  };
  auto norm = [&](const std::string& name, std::size_t channels) {
    NormSite n;
    if (!spec_.instance_norm) {
      n.kind = NormSite::Kind::Identity;
      return n;
    }
    n.kind = NormSite::Kind::InstanceNorm;
    n.gamma = register_param(name + ".gamma", constant_param({channels}, 1.0));
    n.beta = register_param(name + ".beta", constant_param({channels}, 0.0));
    describe(name + " instance_norm channels=" + std::to_string(channels));
    return n;
  };

  input_ = conv("input", 1, 2 * c, 3, 3, 1, 1, 1);
  describe("input glu out=" + std::to_string(c));
  std::size_t in = c;
  for (std::size_t i = 0; i < spec_.n_downsample; ++i) {
    const std::string name = "down" + std::to_string(i + 1);
    const std::size_t out = in * 2;
    Block b{conv(name, in, 2 * out, 3, 3, 2, 1, 1), norm(name + ".norm", 2 * out)};
    describe(name + " glu out=" + std::to_string(out));
    blocks_.push_back(std::move(b));
    in = out;
  }
  const std::size_t kf = spec_.second_last_freq_kernel_doubled ? 2 : 1;
  Block last{conv("penultimate", in, 2 * in, kf, 5, 1, 0, 2), norm("penultimate.norm", 2 * in)};
  describe("penultimate glu out=" + std::to_string(in));
  blocks_.push_back(std::move(last));
  output_ = conv("output", in, 1, 1, 3, 1, 0, 1);
}

std::pair<std::size_t, std::size_t> Discriminator::output_extent(std::size_t q, std::size_t t) const {
  auto step = [](std::size_t n, const Conv2dLayer& l, bool freq) -> long long {
    const std::size_t k = freq ? l.weight.dim(2) : l.weight.dim(3);
    const std::size_t s = freq ? l.stride_h : l.stride_w;
    const std::size_t p = freq ? l.pad_h : l.pad_w;
    if (n + 2 * p < k) return 0;
    return static_cast<long long>((n + 2 * p - k) / s + 1);
  };
  std::vector<const Conv2dLayer*> stack{&input_};
  for (const auto& b : blocks_) stack.push_back(&b.conv);
  stack.push_back(&output_);
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const long long nq = step(q, *stack[i], true);
    const long long nt = step(t, *stack[i], false);
    const bool normed = i >= 1 && i + 1 < stack.size() && spec_.instance_norm;
    if (nq < 1 || nt < 1 || (normed && nq * nt < 2)) {
      throw ShapeError("discriminator: input too small for the conv stack");
    }
    q = static_cast<std::size_t>(nq);
    t = static_cast<std::size_t>(nt);
  }
  return {q, t};
}

std::pair<FieldInterval, FieldInterval> Discriminator::receptive_field(std::size_t qi,
                                                                      std::size_t ti) const {
  std::vector<const Conv2dLayer*> stack{&input_};
  for (const auto& b : blocks_) stack.push_back(&b.conv);
  stack.push_back(&output_);
  FieldInterval fq{static_cast<long long>(qi), static_cast<long long>(qi)};
  FieldInterval ft{static_cast<long long>(ti), static_cast<long long>(ti)};
  for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
    const Conv2dLayer& l = **it;
    const auto kh = static_cast<long long>(l.weight.dim(2));
    const auto kw = static_cast<long long>(l.weight.dim(3));
    fq = {fq.lo * static_cast<long long>(l.stride_h) - static_cast<long long>(l.pad_h),
          fq.hi * static_cast<long long>(l.stride_h) - static_cast<long long>(l.pad_h) + kh - 1};
    ft = {ft.lo * static_cast<long long>(l.stride_w) - static_cast<long long>(l.pad_w),
          ft.hi * static_cast<long long>(l.stride_w) - static_cast<long long>(l.pad_w) + kw - 1};
  }
  return {fq, ft};
}

Tensor Discriminator::forward(const Tensor& m) const {
  if (m.rank() != 2) throw ShapeError("discriminator: expected [Q, T], got " + shape_string(m.shape()));
  output_extent(m.dim(0), m.dim(1));
  Tensor h = glu(input_(reshape(m, {1, m.dim(0), m.dim(1)})));
  for (const auto& b : blocks_) h = glu(b.norm(b.conv(h), m));
  h = output_(h);
  return reshape(h, {h.dim(1), h.dim(2)});
}

}  // namespace cvc3
