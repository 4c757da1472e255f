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

#include "cvc3/training.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cvc3/binary_io.hpp"
#include "cvc3/errors.hpp"
#include "cvc3/ops.hpp"

namespace cvc3 {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (batch_size != 1) throw ConfigError("only batch_size = 1 is supported");
  if (segment_frames == 0 || segment_frames % 4 != 0) {
    throw ConfigError("segment_frames must be a positive multiple of 4");
  }
  if (!(lr_g >= 0) || !(lr_d >= 0)) throw ConfigError("learning rates must be >= 0");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0)) throw ConfigError("adam_eps must be > 0");
  if (checkpoint_every == 0) throw ConfigError("checkpoint_every must be >= 1");
  weights.validate();
  generator.validate();
  discriminator.validate();
}

KeyValues TrainConfig::to_key_values() const {
  KeyValues kv;
  kv.set("iterations", iterations);
  kv.set("batch_size", std::uint64_t{batch_size});
  kv.set("segment_frames", std::uint64_t{segment_frames});
  kv.set("lr_g", lr_g);
  kv.set("lr_d", lr_d);
  kv.set("beta1", beta1);
  kv.set("beta2", beta2);
  kv.set("adam_eps", adam_eps);
  kv.set("lambda_cyc", weights.lambda_cyc);
  kv.set("lambda_id", weights.lambda_id);
  kv.set("id_cutoff_iters", weights.id_cutoff_iters);
  kv.set("seed", seed);
  kv.set("checkpoint_every", checkpoint_every);
  const KeyValues g = generator.to_key_values("generator.");
  const KeyValues d = discriminator.to_key_values("discriminator.");
  for (const auto& [k, v] : g.entries()) kv.set(k, v);
  for (const auto& [k, v] : d.entries()) kv.set(k, v);
  return kv;
}

TrainConfig TrainConfig::from_key_values(const KeyValues& kv) {
  TrainConfig c;
  c.iterations = kv.get_uint("iterations", c.iterations);
  c.batch_size = kv.get_uint("batch_size", c.batch_size);
  c.segment_frames = kv.get_uint("segment_frames", c.segment_frames);
  c.lr_g = kv.get_double("lr_g", c.lr_g);
  c.lr_d = kv.get_double("lr_d", c.lr_d);
  c.beta1 = kv.get_double("beta1", c.beta1);
  c.beta2 = kv.get_double("beta2", c.beta2);
  c.adam_eps = kv.get_double("adam_eps", c.adam_eps);
  c.weights.lambda_cyc = kv.get_double("lambda_cyc", c.weights.lambda_cyc);
  c.weights.lambda_id = kv.get_double("lambda_id", c.weights.lambda_id);
  c.weights.id_cutoff_iters = kv.get_uint("id_cutoff_iters", c.weights.id_cutoff_iters);
  c.seed = kv.get_uint("seed", c.seed);
  c.checkpoint_every = kv.get_uint("checkpoint_every", c.checkpoint_every);
  c.generator = GeneratorSpec::from_key_values(kv, "generator.");
  c.discriminator = DiscriminatorSpec::from_key_values(kv, "discriminator.");
  c.validate();
  return c;
}

void adam_update(std::vector<NamedParam*> params, AdamMoments& moments, double lr, double beta1,
                 double beta2, double eps) {
  if (moments.m.empty()) {
    for (auto* p : params) {
      moments.m.emplace_back(p->tensor.numel(), 0.0);
      moments.v.emplace_back(p->tensor.numel(), 0.0);
    }
  }
  if (moments.m.size() != params.size()) throw Error("Adam state does not match parameter list");
  ++moments.step;
  const double t = static_cast<double>(moments.step);
  const double c1 = 1.0 - std::pow(beta1, t);
  const double c2 = 1.0 - std::pow(beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i]->tensor;
    if (!p.has_grad()) continue;
    auto g = p.grad();
    auto w = p.data_mut();
    auto& m = moments.m[i];
    auto& v = moments.v[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
      v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
      w[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
    }
  }
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

void append(std::vector<NamedParam*>& out, Module& m) {
  for (auto& p : m.parameters()) out.push_back(&p);
}

}  // namespace

TrainState::TrainState(const TrainConfig& cfg)
    : config((cfg.validate(), cfg)),
      g_xy(cfg.generator, derive_seed(cfg.seed, 1)),
      g_yx(cfg.generator, derive_seed(cfg.seed, 2)),
      d_x(cfg.discriminator, derive_seed(cfg.seed, 3)),
      d_y(cfg.discriminator, derive_seed(cfg.seed, 4)),
      d2_x(cfg.discriminator, derive_seed(cfg.seed, 5)),
      d2_y(cfg.discriminator, derive_seed(cfg.seed, 6)),
      rng(derive_seed(cfg.seed, 7)) {}

std::vector<std::pair<std::string, NamedParam*>> TrainState::named_parameters() {
  std::vector<std::pair<std::string, NamedParam*>> out;
  const std::pair<const char*, Module*> nets[] = {{"g_xy", &g_xy}, {"g_yx", &g_yx},
                                                  {"d_x", &d_x},   {"d_y", &d_y},
                                                  {"d2_x", &d2_x}, {"d2_y", &d2_y}};
  for (const auto& [name, net] : nets) {
    for (auto& p : net->parameters()) out.emplace_back(std::string(name) + "/" + p.name, &p);
  }
  return out;
}

std::vector<NamedParam*> TrainState::generator_parameters() {
  std::vector<NamedParam*> out;
  append(out, g_xy);
  append(out, g_yx);
  return out;
}

std::vector<NamedParam*> TrainState::discriminator_parameters() {
  std::vector<NamedParam*> out;
  append(out, d_x);
  append(out, d_y);
  append(out, d2_x);
  append(out, d2_y);
  return out;
}

Tensor sample_segment(const std::vector<Tensor>& corpus, std::size_t frames, Rng& rng) {
  if (corpus.empty()) throw DataError("cannot sample from an empty corpus");
  std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);
  const Tensor& utt = corpus[pick(rng)];
  if (utt.rank() != 2) throw ShapeError("corpus entries must be [Q, T]");
  const std::size_t q = utt.dim(0), t = utt.dim(1);
  if (t < frames) {
    throw DataError("utterance of " + std::to_string(t) + " frames is shorter than the " +
                    std::to_string(frames) + "-frame segment");
  }
  std::uniform_int_distribution<std::size_t> offset_dist(0, t - frames);
  const std::size_t off = offset_dist(rng);
  std::vector<double> seg(q * frames);
  auto src = utt.data();
  for (std::size_t r = 0; r < q; ++r) {
    std::copy_n(src.begin() + r * t + off, frames, seg.begin() + r * frames);
  }
  return Tensor({q, frames}, std::move(seg));
}

std::vector<Tensor> prepare_corpus(const std::vector<MelSpectrogram>& corpus, const FeatureStats& stats,
                                   std::size_t min_frames) {
  std::vector<Tensor> out;
  out.reserve(corpus.size());
  for (const auto& m : corpus) {
    MelSpectrogram n = apply_norm(m, stats);
    if (n.frames() < min_frames) n = reflect_pad_frames(n, min_frames);
    out.push_back(to_tensor(n.data));
  }
  return out;
}

LossReport train_step(TrainState& s, const Tensor& x, const Tensor& y) {
  const std::uint64_t iter = s.iteration;
  const TrainConfig& cfg = s.config;
  try {
    const Tensor fake_y = s.g_xy.forward(x);
    const Tensor fake_x = s.g_yx.forward(y);
    const Tensor cyc_x = s.g_yx.forward(fake_y);
    const Tensor cyc_y = s.g_xy.forward(fake_x);

    // Discriminators see detached conversions.
    for (auto* p : s.discriminator_parameters()) p->tensor.zero_grad();
    const Tensor adv_d = add(adv_loss_d(s.d_y.forward(y), s.d_y.forward(fake_y.detach())),
                             adv_loss_d(s.d_x.forward(x), s.d_x.forward(fake_x.detach())));
    const Tensor adv2_d = add(adv_loss_d(s.d2_x.forward(x), s.d2_x.forward(cyc_x.detach())),
                              adv_loss_d(s.d2_y.forward(y), s.d2_y.forward(cyc_y.detach())));

    LossParts parts;
    parts.adv_d = adv_d;
    parts.adv2_d = adv2_d;
    const Tensor total_d = add(adv_d, adv2_d);
    total_d.backward();
    adam_update(s.discriminator_parameters(), s.opt_d, cfg.lr_d, cfg.beta1, cfg.beta2, cfg.adam_eps);

    // Generators against the freshly updated discriminators, which are
    // frozen for this pass.
    for (auto* p : s.generator_parameters()) p->tensor.zero_grad();
    const auto disc = s.discriminator_parameters();
    for (auto* p : disc) p->tensor.set_requires_grad(false);
    struct Unfreeze {
      const std::vector<NamedParam*>& params;
      ~Unfreeze() {
        for (auto* p : params) p->tensor.set_requires_grad(true);
      }
    } unfreeze{disc};
    parts.adv_g = add(adv_loss_g(s.d_y.forward(fake_y)), adv_loss_g(s.d_x.forward(fake_x)));
    parts.adv2_g = add(adv_loss_g(s.d2_x.forward(cyc_x)), adv_loss_g(s.d2_y.forward(cyc_y)));
    parts.cyc = cycle_loss(x, cyc_x, y, cyc_y);
    if (identity_active(cfg.weights, iter)) {
      parts.id = identity_loss(x, s.g_yx.forward(x), y, s.g_xy.forward(y));
    }
    const TotalLosses totals = total_losses(parts, cfg.weights, iter);
    totals.total_g.backward();
    adam_update(s.generator_parameters(), s.opt_g, cfg.lr_g, cfg.beta1, cfg.beta2, cfg.adam_eps);

    LossReport r;
    r.adv_g = parts.adv_g.item();
    r.adv_d = adv_d.item();
    r.adv2_g = parts.adv2_g.item();
    r.adv2_d = adv2_d.item();
    r.cyc = parts.cyc.item();
    r.id = parts.id.defined() ? parts.id.item() : 0.0;
    r.total_g = totals.total_g.item();
    r.total_d = total_d.item();
    if (!r.all_finite()) throw NumericError("non-finite loss");
    for (auto* p : s.generator_parameters()) p->tensor.zero_grad();
    ++s.iteration;
    return r;
  } catch (const NumericError& e) {
    throw NumericError("training diverged at iteration " + std::to_string(iter) + ": " + e.what());
  }
}

// ------------------------------------------------------------------ checkpoints

namespace {

constexpr char kMagic[8] = {'C', 'V', 'C', '3', 'C', 'K', 'P', 'T'};

struct StoredTensor {
  std::string name;
  Shape shape;
  const double* data;
};

void write_tensor(ByteWriter& w, const std::string& name, const Shape& shape, const double* data) {
  w.str(name);
  w.u32(static_cast<std::uint32_t>(shape.size()));
  for (auto d : shape) w.u64(d);
  w.f64s(data, shape_numel(shape));
}

std::uint32_t crc_of(const std::uint8_t* p, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void write_moments(ByteWriter& w, const std::string& prefix, const AdamMoments& m,
                   const std::vector<std::pair<std::string, NamedParam*>>& names) {
  for (std::size_t i = 0; i < m.m.size(); ++i) {
    const Shape shape = names[i].second->tensor.shape();
    write_tensor(w, prefix + ".m/" + names[i].first, shape, m.m[i].data());
    write_tensor(w, prefix + ".v/" + names[i].first, shape, m.v[i].data());
  }
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(TrainState& s) {
  ByteWriter w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.str(s.config.to_key_values().to_text());
  w.u64(s.iteration);
  std::ostringstream rng_text;
  rng_text << s.rng;
  w.str(rng_text.str());
  w.u64(s.opt_g.step);
  w.u64(s.opt_d.step);

  auto named = s.named_parameters();
  const std::size_t n_gen = s.generator_parameters().size();
  std::vector<std::pair<std::string, NamedParam*>> gen_names(named.begin(), named.begin() + n_gen);
  std::vector<std::pair<std::string, NamedParam*>> disc_names(named.begin() + n_gen, named.end());

  std::size_t count = named.size() + 2 * s.opt_g.m.size() + 2 * s.opt_d.m.size();
  if (s.stats_x) count += 2;
  if (s.stats_y) count += 2;
  w.u64(count);
  for (const auto& [name, p] : named) write_tensor(w, name, p->tensor.shape(), p->tensor.data().data());
  write_moments(w, "adam_g", s.opt_g, gen_names);
  write_moments(w, "adam_d", s.opt_d, disc_names);
  auto write_stats = [&](const std::string& prefix, const FeatureStats& st) {
    write_tensor(w, prefix + ".mean", {st.mean.size()}, st.mean.data());
    write_tensor(w, prefix + ".std", {st.std.size()}, st.std.data());
  };
  if (s.stats_x) write_stats("stats_x", *s.stats_x);
  if (s.stats_y) write_stats("stats_y", *s.stats_y);

  std::vector<std::uint8_t> bytes = w.buffer();
  const std::uint32_t crc = crc_of(bytes.data(), bytes.size());
  const auto* c = reinterpret_cast<const std::uint8_t*>(&crc);
  bytes.insert(bytes.end(), c, c + sizeof crc);
  return bytes;
}

void save_checkpoint(TrainState& state, const std::string& path) {
  write_file_atomic(path, serialize_checkpoint(state));
}

namespace {

TrainState parse_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& path) {
  if (bytes.size() < sizeof kMagic + 8) throw FormatError(path + ": file too short for a checkpoint");
  if (!std::equal(kMagic, kMagic + sizeof kMagic, bytes.begin())) {
    throw FormatError(path + ": not a checkpoint file");
  }
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, bytes.data() + body, 4);
  ByteReader r(bytes.data(), body);
  char magic[8];
  r.bytes(magic, sizeof magic);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  if (crc_of(bytes.data(), body) != stored_crc) throw FormatError(path + ": checksum mismatch");

  TrainConfig cfg;
  try {
    cfg = TrainConfig::from_key_values(KeyValues::parse(r.str()));
  } catch (const ConfigError& e) {
    throw FormatError(path + ": invalid stored configuration: " + e.what());
  }
  TrainState s(cfg);
  s.iteration = r.u64();
  {
    std::istringstream rng_text(r.str());
    rng_text >> s.rng;
    if (!rng_text) throw FormatError(path + ": invalid RNG state");
  }
  s.opt_g.step = r.u64();
  s.opt_d.step = r.u64();

  auto named = s.named_parameters();
  std::map<std::string, NamedParam*> by_name;
  for (auto& [n, p] : named) by_name[n] = p;
  const std::size_t n_gen = s.generator_parameters().size();
  std::map<std::string, std::pair<std::vector<double>*, std::size_t>> moment_slots;
  if (s.opt_g.step > 0) {
    s.opt_g.m.resize(n_gen);
    s.opt_g.v.resize(n_gen);
  }
  if (s.opt_d.step > 0) {
    s.opt_d.m.resize(named.size() - n_gen);
    s.opt_d.v.resize(named.size() - n_gen);
  }
  for (std::size_t i = 0; i < named.size(); ++i) {
    const bool gen = i < n_gen;
    AdamMoments& m = gen ? s.opt_g : s.opt_d;
    if (m.step == 0) continue;
    const std::size_t k = gen ? i : i - n_gen;
    const std::string prefix = gen ? "adam_g" : "adam_d";
    const std::size_t numel = named[i].second->tensor.numel();
    moment_slots[prefix + ".m/" + named[i].first] = {&m.m[k], numel};
    moment_slots[prefix + ".v/" + named[i].first] = {&m.v[k], numel};
  }

  FeatureStats sx, sy;
  const std::uint64_t count = r.u64();
  std::size_t params_seen = 0, moments_seen = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = r.str();
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw FormatError(path + ": implausible tensor rank for " + name);
    Shape shape(rank);
    for (auto& d : shape) d = r.u64();
    const std::size_t n = shape_numel(shape);
    if (n > r.remaining() / sizeof(double)) throw FormatError(path + ": truncated tensor " + name);
    std::vector<double> values(n);
    r.f64s(values.data(), n);

    if (auto it = by_name.find(name); it != by_name.end()) {
      Tensor& t = it->second->tensor;
      if (t.shape() != shape) throw FormatError(path + ": shape mismatch for " + name);
      std::copy(values.begin(), values.end(), t.data_mut().begin());
      ++params_seen;
    } else if (auto mt = moment_slots.find(name); mt != moment_slots.end()) {
      if (mt->second.second != n) throw FormatError(path + ": shape mismatch for " + name);
      *mt->second.first = std::move(values);
      ++moments_seen;
    } else if (name == "stats_x.mean") {
      sx.mean = std::move(values);
    } else if (name == "stats_x.std") {
      sx.std = std::move(values);
    } else if (name == "stats_y.mean") {
      sy.mean = std::move(values);
    } else if (name == "stats_y.std") {
      sy.std = std::move(values);
    } else {
      throw FormatError(path + ": unknown tensor " + name);
    }
  }
  if (r.remaining() != 0) throw FormatError(path + ": trailing bytes after tensors");
  if (params_seen != named.size() || moments_seen != moment_slots.size()) {
    throw FormatError(path + ": missing tensors");
  }
  if (!sx.mean.empty()) s.stats_x = std::move(sx);
  if (!sy.mean.empty()) s.stats_y = std::move(sy);
  return s;
}

}  // namespace

TrainState load_checkpoint(const std::string& path) {
  return parse_checkpoint(read_file_bytes(path), path);
}

TrainState load_checkpoint(const std::string& path, const GeneratorSpec& expected_g,
                           const DiscriminatorSpec& expected_d) {
  TrainState s = load_checkpoint(path);
  if (!(s.config.generator == expected_g)) {
    throw SpecMismatchError(path + ": stored generator spec differs from the requested one:\n" +
                            s.config.generator.to_key_values().to_text());
  }
  if (!(s.config.discriminator == expected_d)) {
    throw SpecMismatchError(path + ": stored discriminator spec differs from the requested one:\n" +
                            s.config.discriminator.to_key_values().to_text());
  }
  return s;
}

// ------------------------------------------------------------------ fit

std::string checkpoint_name(std::uint64_t iteration) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "checkpoint_%08llu.ckpt", static_cast<unsigned long long>(iteration));
  return buf;
}

namespace {

// Keeps the rows of an existing losses.csv that precede `iteration`.
std::vector<std::string> surviving_rows(const fs::path& csv, std::uint64_t iteration) {
  std::vector<std::string> rows;
  std::ifstream in(csv);
  if (!in) return rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    std::uint64_t it = 0;
    try {
      it = std::stoull(line.substr(0, comma));
    } catch (const std::exception&) {
      throw DataError(csv.string() + ": malformed row '" + line + "'");
    }
    if (it < iteration) rows.push_back(line);
  }
  return rows;
}

}  // namespace

FitResult fit(TrainState& state, const std::vector<Tensor>& corpus_x,
              const std::vector<Tensor>& corpus_y, const FitOptions& opt) {
  if (!opt.resume_from.empty()) {
    TrainState loaded = load_checkpoint(opt.resume_from, state.config.generator, state.config.discriminator);
    loaded.config.iterations = state.config.iterations;
    loaded.config.checkpoint_every = state.config.checkpoint_every;
    state = std::move(loaded);
  }
  if (opt.stats_x) state.stats_x = opt.stats_x;
  if (opt.stats_y) state.stats_y = opt.stats_y;

  FitResult result;
  const bool files = !opt.out_dir.empty();
  const fs::path dir(opt.out_dir);
  const fs::path csv = dir / "losses.csv";
  std::vector<std::string> rows;
  if (files) {
    fs::create_directories(dir);
    if (!opt.resume_from.empty()) rows = surviving_rows(csv, state.iteration);
  }
  auto flush_csv = [&] {
    std::string text = LossReport::csv_header() + "\n";
    for (const auto& row : rows) text += row + "\n";
    write_text_atomic(csv.string(), text);
  };
  auto checkpoint = [&] {
    result.last_checkpoint = (dir / checkpoint_name(state.iteration)).string();
    save_checkpoint(state, result.last_checkpoint);
    flush_csv();
  };

  const std::uint64_t end = opt.stop_at ? std::min(*opt.stop_at, state.config.iterations)
                                        : state.config.iterations;
  if (files && state.iteration % state.config.checkpoint_every == 0 && opt.resume_from.empty()) {
    checkpoint();
  }
  while (state.iteration < end) {
    const std::uint64_t iter = state.iteration;
    const Tensor x = sample_segment(corpus_x, state.config.segment_frames, state.rng);
    const Tensor y = sample_segment(corpus_y, state.config.segment_frames, state.rng);
    LossReport report;
    try {
      report = train_step(state, x, y);
    } catch (const NumericError&) {
      if (files) {
        save_checkpoint(state, (dir / ("diverged_" + checkpoint_name(iter))).string());
        flush_csv();
      }
      throw;
    }
    result.losses.push_back(report);
    if (files) rows.push_back(report.csv_row(iter));
    if (opt.on_step) opt.on_step(state, report);
    if (files && state.iteration % state.config.checkpoint_every == 0) checkpoint();
  }
  if (files && result.last_checkpoint != (dir / checkpoint_name(state.iteration)).string()) {
    checkpoint();
  }
  return result;
}

}  // namespace cvc3
