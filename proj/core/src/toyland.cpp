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

#include "cvc3/toyland.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "cvc3/errors.hpp"
#include "cvc3/metrics.hpp"
#include "cvc3/ops.hpp"

namespace cvc3 {

MelConfig ToySpec::toy_mel_config() {
  MelConfig cfg;
  cfg.fmax = 4000.0;
  return cfg;
}

void ToySpec::validate() const {
  if (!(f0_a_lo > 0 && f0_a_lo < f0_a_hi) || !(f0_b_lo > 0 && f0_b_lo < f0_b_hi)) {
    throw ConfigError("toy f0 ranges must satisfy 0 < lo < hi");
  }
  if (!(f0_a_hi < f0_b_lo || f0_b_hi < f0_a_lo)) throw ConfigError("toy f0 ranges must be disjoint");
  if (n_harmonics == 0) throw ConfigError("toy n_harmonics must be >= 1");
  if (n_utterances == 0 || n_heldout == 0) throw ConfigError("toy corpora must be non-empty");
  if (utterance_frames == 0 || utterance_frames % 4 != 0) {
    throw ConfigError("toy utterance_frames must be a positive multiple of 4");
  }
  if (!(background > 0)) throw ConfigError("toy background must be > 0");
  if (mel.mel_bins % 4 != 0) throw ConfigError("toy mel_bins must be divisible by 4");
}

KeyValues ToySpec::to_key_values(const std::string& prefix) const {
  KeyValues kv;
  kv.set(prefix + "f0_a_lo", f0_a_lo);
  kv.set(prefix + "f0_a_hi", f0_a_hi);
  kv.set(prefix + "f0_b_lo", f0_b_lo);
  kv.set(prefix + "f0_b_hi", f0_b_hi);
  kv.set(prefix + "n_harmonics", std::uint64_t{n_harmonics});
  kv.set(prefix + "n_utterances", std::uint64_t{n_utterances});
  kv.set(prefix + "n_heldout", std::uint64_t{n_heldout});
  kv.set(prefix + "utterance_frames", std::uint64_t{utterance_frames});
  kv.set(prefix + "background", background);
  kv.set(prefix + "mel_bins", std::uint64_t{mel.mel_bins});
  kv.set(prefix + "fmax", mel.fmax);
  kv.set(prefix + "seed", seed);
  return kv;
}

ToySpec ToySpec::from_key_values(const KeyValues& kv, const std::string& prefix) {
  ToySpec s;
  s.f0_a_lo = kv.get_double(prefix + "f0_a_lo", s.f0_a_lo);
  s.f0_a_hi = kv.get_double(prefix + "f0_a_hi", s.f0_a_hi);
  s.f0_b_lo = kv.get_double(prefix + "f0_b_lo", s.f0_b_lo);
  s.f0_b_hi = kv.get_double(prefix + "f0_b_hi", s.f0_b_hi);
  s.n_harmonics = kv.get_uint(prefix + "n_harmonics", s.n_harmonics);
  s.n_utterances = kv.get_uint(prefix + "n_utterances", s.n_utterances);
  s.n_heldout = kv.get_uint(prefix + "n_heldout", s.n_heldout);
  s.utterance_frames = kv.get_uint(prefix + "utterance_frames", s.utterance_frames);
  s.background = kv.get_double(prefix + "background", s.background);
  s.mel.mel_bins = kv.get_uint(prefix + "mel_bins", s.mel.mel_bins);
  s.mel.fmax = kv.get_double(prefix + "fmax", s.mel.fmax);
  s.seed = kv.get_uint(prefix + "seed", s.seed);
  s.validate();
  return s;
}

ToyEnvelope make_toy_envelope(std::size_t frames, Rng& rng) {
  std::uniform_real_distribution<double> cycles(0.5, 3.0), phase(0.0, 2.0 * std::numbers::pi),
      weight(0.3, 1.0), tilt(0.4, 1.0);
  ToyEnvelope env;
  env.log_gain.assign(frames, 0.0);
  for (int j = 0; j < 3; ++j) {
    const double c = cycles(rng), ph = phase(rng), w = weight(rng);
    for (std::size_t t = 0; t < frames; ++t) {
      env.log_gain[t] += w * std::sin(2.0 * std::numbers::pi * c * t / frames + ph);
    }
  }
  // Rescale to a 2.5 nepers dynamic range ending at 0.
  const auto [lo, hi] = std::minmax_element(env.log_gain.begin(), env.log_gain.end());
  const double mn = *lo, mx = *hi;
  for (auto& g : env.log_gain) g = mx > mn ? -2.5 * (mx - g) / (mx - mn) : 0.0;
  env.tilt = tilt(rng);
  return env;
}

MelSpectrogram render_toy_utterance(const ToySpec& spec, const ToyEnvelope& env, double f0) {
  const std::size_t q = spec.mel.mel_bins, frames = env.log_gain.size();
  // Spectral shape is shared by all frames; only the gain moves.
  std::vector<double> shape(q, 0.0);
  for (std::size_t k = 1; k <= spec.n_harmonics; ++k) {
    const double amp = std::pow(static_cast<double>(k), -env.tilt);
    const auto w = mel_filter_responses(spec.mel, static_cast<double>(k) * f0);
    for (std::size_t b = 0; b < q; ++b) shape[b] += amp * w[b];
  }
  MelSpectrogram m;
  m.sample_rate = spec.mel.sample_rate;
  m.hop = spec.mel.hop;
  m.window = spec.mel.window;
  m.data.resize(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(frames));
  for (std::size_t t = 0; t < frames; ++t) {
    const double gain = std::exp(env.log_gain[t]);
    for (std::size_t b = 0; b < q; ++b) {
      m.data(b, t) = std::log(std::max(spec.background + gain * shape[b], spec.mel.log_floor));
    }
  }
  return m;
}

ToyCorpus generate_toy_corpus(const ToySpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::uniform_real_distribution<double> f0_a(spec.f0_a_lo, spec.f0_a_hi), f0_b(spec.f0_b_lo, spec.f0_b_hi);
  ToyCorpus c;
  std::size_t next_id = 0;
  auto make = [&](std::uniform_real_distribution<double>& f0_dist) {
    ToyUtterance u;
    const ToyEnvelope env = make_toy_envelope(spec.utterance_frames, rng);
    u.f0 = f0_dist(rng);
    u.envelope_id = next_id++;
    u.mel = render_toy_utterance(spec, env, u.f0);
    return u;
  };
  for (std::size_t i = 0; i < spec.n_utterances; ++i) c.domain_a.push_back(make(f0_a));
  for (std::size_t i = 0; i < spec.n_utterances; ++i) c.domain_b.push_back(make(f0_b));
  for (std::size_t i = 0; i < spec.n_heldout; ++i) {
    const ToyEnvelope env = make_toy_envelope(spec.utterance_frames, rng);
    ToyOraclePair p;
    p.a.f0 = f0_a(rng);
    p.b.f0 = f0_b(rng);
    p.a.envelope_id = p.b.envelope_id = next_id++;
    p.a.mel = render_toy_utterance(spec, env, p.a.f0);
    p.b.mel = render_toy_utterance(spec, env, p.b.f0);
    c.oracle.push_back(std::move(p));
  }
  return c;
}

std::vector<MelSpectrogram> mels_of(const std::vector<ToyUtterance>& utts) {
  std::vector<MelSpectrogram> out;
  out.reserve(utts.size());
  for (const auto& u : utts) out.push_back(u.mel);
  return out;
}

// ------------------------------------------------------------------ harmonicity

namespace {

// Linear-frequency resampling of a mel column.
struct LinearGrid {
  std::vector<std::size_t> lower;  // mel bin below each grid point
  std::vector<double> frac;
  double f_lo = 0.0, step = 0.0;

  LinearGrid(const MelConfig& mel, std::size_t mel_bins, double step_hz, double max_hz) : step(step_hz) {
    MelConfig geom = mel;
    geom.mel_bins = mel_bins;
    const auto centres = mel_center_frequencies(geom);
    if (centres.size() < 2) throw ShapeError("harmonicity analysis needs at least 2 mel bins");
    f_lo = centres.front();
    const double f_hi = std::min(max_hz, centres.back());
    for (double f = f_lo; f <= f_hi; f += step_hz) {
      const auto it = std::upper_bound(centres.begin(), centres.end(), f);
      std::size_t hi = static_cast<std::size_t>(it - centres.begin());
      hi = std::clamp<std::size_t>(hi, 1, centres.size() - 1);
      const std::size_t lo = hi - 1;
      lower.push_back(lo);
      frac.push_back((f - centres[lo]) / (centres[hi] - centres[lo]));
    }
  }

  std::size_t size() const { return lower.size(); }

  std::vector<double> resample(const std::vector<double>& column) const {
    std::vector<double> out(size());
    for (std::size_t j = 0; j < size(); ++j) {
      out[j] = column[lower[j]] * (1.0 - frac[j]) + column[lower[j] + 1] * frac[j];
    }
    return out;
  }
};

// Subtracts a centred moving average of `width` samples (truncated at the edges).
std::vector<double> detrend(const std::vector<double>& x, std::size_t width) {
  const std::size_t n = x.size(), half = width / 2;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    out[i] = x[i] - (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

std::vector<double> column(const MelSpectrogram& m, std::size_t t) {
  std::vector<double> c(m.mel_bins());
  for (std::size_t q = 0; q < c.size(); ++q) c[q] = m.data(q, t);
  return c;
}

double sample_linear(const std::vector<double>& x, double pos) {
  if (pos <= 0) return x.front();
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= x.size()) return x.back();
  const double f = pos - i;
  return x[i] * (1.0 - f) + x[i + 1] * f;
}

}  // namespace

std::vector<double> frame_comb_strength(const MelSpectrogram& m, const HarmonicityConfig& cfg) {
  m.validate();
  const LinearGrid grid(cfg.mel, m.mel_bins(), cfg.grid_step_hz, cfg.max_hz);
  const auto width = static_cast<std::size_t>(std::lround(cfg.f0_max_hz / cfg.grid_step_hz));
  const auto lag_min = static_cast<std::size_t>(std::ceil(cfg.f0_min_hz / cfg.grid_step_hz));
  const auto lag_max = static_cast<std::size_t>(cfg.f0_max_hz / cfg.grid_step_hz);

  // Grid positions of the mel centres inside the analysed band: each bin
  // contributes one sample, so sparse high bands are not over-weighted.
  MelConfig geom = cfg.mel;
  geom.mel_bins = m.mel_bins();
  std::vector<double> anchors;
  for (double f : mel_center_frequencies(geom)) {
    const double pos = (f - grid.f_lo) / grid.step;
    if (pos >= 0 && pos <= static_cast<double>(grid.size() - 1)) anchors.push_back(pos);
  }
  constexpr std::size_t kMinPairs = 8;

  std::vector<double> out(m.frames(), 0.0);
  for (std::size_t t = 0; t < m.frames(); ++t) {
    const auto x = detrend(grid.resample(column(m, t)), width);
    double energy = 0;
    for (double v : x) energy += v * v;
    if (energy < 1e-12 * static_cast<double>(x.size())) continue;
    // A comb with period L correlates at lag L and anti-correlates at L/2;
    // smooth structure correlates at both and cancels.
    double best = 0.0;
    for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
      double aa = 0, bb = 0, cc = 0, ab = 0, ac = 0;
      std::size_t pairs = 0;
      for (double pos : anchors) {
        if (pos + static_cast<double>(lag) > static_cast<double>(x.size() - 1)) break;
        const double a = sample_linear(x, pos);
        const double b = sample_linear(x, pos + static_cast<double>(lag));
        const double c = sample_linear(x, pos + 0.5 * static_cast<double>(lag));
        aa += a * a;
        bb += b * b;
        cc += c * c;
        ab += a * b;
        ac += a * c;
        ++pairs;
      }
      if (pairs < kMinPairs) break;
      const double r_full = aa * bb > 1e-24 ? ab / std::sqrt(aa * bb) : 0.0;
      const double r_half = aa * cc > 1e-24 ? ac / std::sqrt(aa * cc) : 0.0;
      best = std::max(best, 0.5 * (r_full - r_half));
    }
    out[t] = best;
  }
  return out;
}

double harmonicity_score(const MelSpectrogram& m, const HarmonicityConfig& cfg) {
  const auto strength = frame_comb_strength(m, cfg);
  if (strength.empty()) return 0.0;
  std::size_t hits = 0;
  for (double s : strength) hits += s >= cfg.threshold ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(strength.size());
}

double estimate_f0(const MelSpectrogram& m, const HarmonicityConfig& cfg) {
  m.validate();
  const LinearGrid grid(cfg.mel, m.mel_bins(), cfg.grid_step_hz, cfg.max_hz);
  std::vector<double> avg(m.mel_bins(), 0.0);
  for (std::size_t q = 0; q < avg.size(); ++q) avg[q] = m.data.row(q).mean();
  const auto x = detrend(grid.resample(avg),
                         static_cast<std::size_t>(std::lround(cfg.f0_max_hz / cfg.grid_step_hz)));
  const double f_max = grid.f_lo + grid.step * static_cast<double>(grid.size() - 1);
  auto at_hz = [&](double hz) { return sample_linear(x, (hz - grid.f_lo) / grid.step); };

  double best_f0 = cfg.f0_min_hz, best = -std::numeric_limits<double>::infinity();
  for (double f0 = cfg.f0_min_hz; f0 <= cfg.f0_max_hz; f0 += 0.5) {
    double s = 0;
    std::size_t n = 0;
    for (std::size_t k = 1; k * f0 <= f_max; ++k) {
      if (k * f0 < grid.f_lo) continue;
      s += at_hz(k * f0) - at_hz((k - 0.5) * f0);
      ++n;
    }
    if (n == 0) continue;
    s /= static_cast<double>(n);
    if (s > best) {
      best = s;
      best_f0 = f0;
    }
  }
  return best_f0;
}

double mel_bin_position(const MelConfig& cfg, double hz) {
  const double m_lo = hz_to_mel(cfg.fmin), m_hi = hz_to_mel(cfg.upper_frequency());
  const double spacing = (m_hi - m_lo) / static_cast<double>(cfg.mel_bins + 1);
  return (hz_to_mel(hz) - m_lo) / spacing - 1.0;
}

bool f0_in_range(const MelConfig& cfg, double f0, double lo, double hi) {
  const double p = mel_bin_position(cfg, f0);
  return p >= mel_bin_position(cfg, lo) - 1.0 && p <= mel_bin_position(cfg, hi) + 1.0;
}

// ------------------------------------------------------------------ harnesses

GeneratorSpec toy_generator_spec(TfanPosition position, std::size_t tfan_depth) {
  GeneratorSpec s;
  s.input_bins = 80;
  s.base_channels = 8;
  s.n_residual_blocks = 3;
  s.tfan.depth = tfan_depth;
  s.tfan.hidden_channels = 8;
  s.tfan.kernel_size = 3;
  s.tfan_position = position;
  return s;
}

DiscriminatorSpec toy_discriminator_spec() {
  DiscriminatorSpec s;
  s.base_channels = 8;
  return s;
}

TrainConfig toy_train_config(std::uint64_t seed, std::uint64_t iterations) {
  TrainConfig c;
  c.iterations = iterations;
  c.seed = seed;
  c.checkpoint_every = std::max<std::uint64_t>(iterations, 1);
  // Identity mapping for the first 2% of training, the same share as
  // 10k of 500k iterations.
  c.weights.id_cutoff_iters = iterations / 50;
  c.generator = toy_generator_spec();
  c.discriminator = toy_discriminator_spec();
  return c;
}

namespace {

std::vector<Tensor> normalized(const std::vector<MelSpectrogram>& mels, const FeatureStats& stats) {
  std::vector<Tensor> out;
  for (const auto& m : mels) out.push_back(to_tensor(apply_norm(m, stats).data));
  return out;
}

MelSpectrogram denormalized(const Tensor& t, const FeatureStats& stats, const MelConfig& mel) {
  MelSpectrogram m;
  m.data = to_matrix(t);
  m.sample_rate = mel.sample_rate;
  m.hop = mel.hop;
  m.window = mel.window;
  return apply_denorm(m, stats);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct TrainedToy {
  TrainState state;
  FeatureStats stats_a, stats_b;
  std::vector<Tensor> heldout_a, heldout_b;
  double cycle_initial = 0.0;
};

TrainedToy train_toy(const ToyCorpus& corpus, const TrainConfig& cfg) {
  TrainedToy t{TrainState(cfg), {}, {}, {}, {}, 0.0};
  t.stats_a = compute_stats(mels_of(corpus.domain_a));
  t.stats_b = compute_stats(mels_of(corpus.domain_b));
  std::vector<MelSpectrogram> ha, hb;
  for (const auto& p : corpus.oracle) {
    ha.push_back(p.a.mel);
    hb.push_back(p.b.mel);
  }
  t.heldout_a = normalized(ha, t.stats_a);
  t.heldout_b = normalized(hb, t.stats_b);
  t.cycle_initial = validation_cycle_l1(t.state.g_xy, t.state.g_yx, t.heldout_a, t.heldout_b);
  const auto ca = prepare_corpus(mels_of(corpus.domain_a), t.stats_a, cfg.segment_frames);
  const auto cb = prepare_corpus(mels_of(corpus.domain_b), t.stats_b, cfg.segment_frames);
  FitOptions opt;
  opt.stats_x = t.stats_a;
  opt.stats_y = t.stats_b;
  fit(t.state, ca, cb, opt);
  return t;
}

}  // namespace

double validation_cycle_l1(const Generator& g_xy, const Generator& g_yx,
                           const std::vector<Tensor>& heldout_a, const std::vector<Tensor>& heldout_b) {
  if (heldout_a.empty() || heldout_a.size() != heldout_b.size()) {
    throw DataError("validation needs matching, non-empty held-out sets");
  }
  NoGradGuard no_grad;
  double total = 0.0;
  for (std::size_t i = 0; i < heldout_a.size(); ++i) {
    const Tensor& a = heldout_a[i];
    const Tensor& b = heldout_b[i];
    total += cycle_loss(a, g_yx.forward(g_xy.forward(a)), b, g_xy.forward(g_yx.forward(b))).item();
  }
  return total / static_cast<double>(heldout_a.size());
}

ToyRunResult run_toy_model(const ToyCorpus& corpus, const ToySpec& toy, const TrainConfig& cfg,
                           const HarmonicityConfig& hc) {
  const auto start = std::chrono::steady_clock::now();
  TrainedToy t = train_toy(corpus, cfg);
  HarmonicityConfig h = hc;
  h.mel = toy.mel;

  ToyRunResult r;
  r.position = cfg.generator.tfan_position;
  r.tfan_depth = cfg.generator.tfan.depth;
  r.seed = cfg.seed;
  r.cycle_l1_initial = t.cycle_initial;
  r.cycle_l1_final = validation_cycle_l1(t.state.g_xy, t.state.g_yx, t.heldout_a, t.heldout_b);

  NoGradGuard no_grad;
  double harm = 0.0;
  for (std::size_t i = 0; i < t.heldout_a.size(); ++i) {
    const MelSpectrogram to_b = denormalized(t.state.g_xy.forward(t.heldout_a[i]), t.stats_b, toy.mel);
    const MelSpectrogram to_a = denormalized(t.state.g_yx.forward(t.heldout_b[i]), t.stats_a, toy.mel);
    r.f0_in_range += f0_in_range(toy.mel, estimate_f0(to_b, h), toy.f0_b_lo, toy.f0_b_hi) ? 1 : 0;
    r.f0_in_range += f0_in_range(toy.mel, estimate_f0(to_a, h), toy.f0_a_lo, toy.f0_a_hi) ? 1 : 0;
    r.f0_checked += 2;
    harm += harmonicity_score(to_b, h) + harmonicity_score(to_a, h);
  }
  r.harmonicity = harm / static_cast<double>(r.f0_checked);
  r.seconds = seconds_since(start);
  return r;
}

ToyExperimentResult run_toy_experiment(const ToyExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const ToyCorpus corpus = generate_toy_corpus(cfg.toy);
  ToyExperimentResult res;
  std::size_t in_range = 0, checked = 0;
  for (auto seed : cfg.seeds) {
    TrainConfig tc = toy_train_config(seed, cfg.iterations);
    tc.generator = toy_generator_spec(TfanPosition::Both);
    res.tfan_runs.push_back(run_toy_model(corpus, cfg.toy, tc, cfg.harmonicity));
    tc.generator = toy_generator_spec(TfanPosition::None);
    res.none_runs.push_back(run_toy_model(corpus, cfg.toy, tc, cfg.harmonicity));
  }
  for (const auto& r : res.tfan_runs) {
    res.max_cycle_ratio = std::max(res.max_cycle_ratio, r.cycle_l1_final / r.cycle_l1_initial);
    in_range += r.f0_in_range;
    checked += r.f0_checked;
    res.harmonicity_tfan += r.harmonicity;
  }
  for (const auto& r : res.none_runs) res.harmonicity_none += r.harmonicity;
  if (!cfg.seeds.empty()) {
    res.harmonicity_tfan /= static_cast<double>(cfg.seeds.size());
    res.harmonicity_none /= static_cast<double>(cfg.seeds.size());
  }
  res.f0_in_range_fraction = checked ? static_cast<double>(in_range) / static_cast<double>(checked) : 0.0;
  res.seconds = seconds_since(start);
  return res;
}

std::string ToyExperimentResult::summary() const {
  std::ostringstream os;
  os << "position,seed,cycle_l1_initial,cycle_l1_final,f0_in_range,f0_checked,harmonicity,seconds\n";
  for (const auto* runs : {&tfan_runs, &none_runs}) {
    for (const auto& r : *runs) {
      os << to_string(r.position) << ',' << r.seed << ',' << format_double(r.cycle_l1_initial) << ','
         << format_double(r.cycle_l1_final) << ',' << r.f0_in_range << ',' << r.f0_checked << ','
         << format_double(r.harmonicity) << ',' << format_double(r.seconds) << '\n';
    }
  }
  os << "# max_cycle_ratio=" << format_double(max_cycle_ratio)
     << " f0_in_range_fraction=" << format_double(f0_in_range_fraction)
     << " harmonicity_tfan=" << format_double(harmonicity_tfan)
     << " harmonicity_none=" << format_double(harmonicity_none) << " seconds=" << format_double(seconds)
     << '\n';
  return os.str();
}

std::vector<AblationRow> run_ablation(const AblationConfig& cfg) {
  const ToyCorpus corpus = generate_toy_corpus(cfg.toy);
  std::vector<AblationRow> rows;
  for (auto depth : cfg.depths) {
    for (auto position : cfg.positions) {
      TrainConfig tc = toy_train_config(cfg.seed, cfg.iterations);
      tc.generator = toy_generator_spec(position, depth);
      TrainedToy t = train_toy(corpus, tc);
      NoGradGuard no_grad;
      EvalReport report;
      for (std::size_t i = 0; i < t.heldout_a.size(); ++i) {
        const MelSpectrogram conv =
            denormalized(t.state.g_xy.forward(t.heldout_a[i]), t.stats_b, cfg.toy.mel);
        report.utterances.push_back(score_pair("heldout_" + std::to_string(i),
                                               mel_cepstrum(corpus.oracle[i].b.mel), mel_cepstrum(conv)));
      }
      finalize_report(report);
      rows.push_back({depth, position, report.mean_mcd_db, report.mean_msd_db});
    }
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "depth,position,mcd_db,msd_db,mcd_msd\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.2f/%.2f", r.mcd_db, r.msd_db);
    out += std::to_string(r.depth) + ',' + to_string(r.position) + ',' + format_double(r.mcd_db) + ',' +
           format_double(r.msd_db) + ',' + buf + '\n';
  }
  return out;
}

}  // namespace cvc3
