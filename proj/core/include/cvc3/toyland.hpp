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

// Synthetic two-domain corpora of harmonic combs rendered directly in
// log-mel space, a comb-structure score, and the experiment harnesses that
// train on them (toy conversion experiment and TFAN ablation).
//
// An utterance with fundamental f0 and time envelope e(t) is
//   M[q, t] = background + sum_k e(t) * a_k * w_q(k * f0),   log(max(M, floor))
// where w_q is the unit-peak mel filter q and a_k = k^(-tilt).

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvc3/models.hpp"
#include "cvc3/signal.hpp"
#include "cvc3/training.hpp"

namespace cvc3 {

struct ToySpec {
  double f0_a_lo = 100.0, f0_a_hi = 140.0;
  double f0_b_lo = 200.0, f0_b_hi = 280.0;
  std::size_t n_harmonics = 8;
  std::size_t n_utterances = 40;  // training utterances per domain
  std::size_t n_heldout = 8;      // oracle pairs
  std::size_t utterance_frames = 128;
  double background = 1e-3;
  MelConfig mel = toy_mel_config();
  std::uint64_t seed = 0;

  void validate() const;
  KeyValues to_key_values(const std::string& prefix = "") const;
  static ToySpec from_key_values(const KeyValues& kv, const std::string& prefix = "");

  /// 80 bins up to 4 kHz: harmonics of both domains stay resolved.
  static MelConfig toy_mel_config();
};

/// Smooth time envelope plus spectral tilt; shared between oracle renderings.
struct ToyEnvelope {
  std::vector<double> log_gain;  // per frame
  double tilt = 0.7;
};

struct ToyUtterance {
  MelSpectrogram mel;
  double f0 = 0.0;
  std::size_t envelope_id = 0;
};

struct ToyOraclePair {
  ToyUtterance a, b;  // same envelope, f0 from domain A and B
};

struct ToyCorpus {
  std::vector<ToyUtterance> domain_a, domain_b;
  std::vector<ToyOraclePair> oracle;  // envelopes never used for training
};

ToyEnvelope make_toy_envelope(std::size_t frames, Rng& rng);
MelSpectrogram render_toy_utterance(const ToySpec& spec, const ToyEnvelope& env, double f0);
ToyCorpus generate_toy_corpus(const ToySpec& spec);

std::vector<MelSpectrogram> mels_of(const std::vector<ToyUtterance>& utts);

struct HarmonicityConfig {
  MelConfig mel{};           // geometry of the analysed spectrogram
  double grid_step_hz = 5.0;  // linear-frequency resampling step
  double max_hz = 2500.0;
  double f0_min_hz = 60.0;
  double f0_max_hz = 500.0;
  /// Frame is harmonic when its peak normalized autocorrelation over the f0
  /// lag range reaches this value. Frozen from tools/calibrate_harmonicity.
  double threshold = 0.50;
};

/// Per-frame peak normalized autocorrelation of the detrended log-mel column
/// resampled onto a linear frequency grid; 0 for flat (silent) frames.
std::vector<double> frame_comb_strength(const MelSpectrogram& m, const HarmonicityConfig& cfg);

/// Fraction of frames with a dominant comb peak, in [0, 1].
double harmonicity_score(const MelSpectrogram& m, const HarmonicityConfig& cfg = {});

/// Fundamental maximizing the mean peak-minus-trough harmonic contrast of the
/// time-averaged column, searched on a 0.5 Hz grid.
double estimate_f0(const MelSpectrogram& m, const HarmonicityConfig& cfg = {});

/// Fractional mel-bin position of a frequency (0 = first filter centre).
double mel_bin_position(const MelConfig& cfg, double hz);

/// f0 inside [lo, hi] with one mel bin of slack on either side.
bool f0_in_range(const MelConfig& cfg, double f0, double lo, double hi);

// ------------------------------------------------------------------ harnesses

/// Reduced model used by the toy harnesses on a single CPU core.
GeneratorSpec toy_generator_spec(TfanPosition position = TfanPosition::Both, std::size_t tfan_depth = 3);
DiscriminatorSpec toy_discriminator_spec();
TrainConfig toy_train_config(std::uint64_t seed, std::uint64_t iterations);

struct ToyRunResult {
  TfanPosition position = TfanPosition::Both;
  std::size_t tfan_depth = 3;
  std::uint64_t seed = 0;
  double cycle_l1_initial = 0.0;
  double cycle_l1_final = 0.0;
  std::size_t f0_in_range = 0;   // held-out conversions, both directions
  std::size_t f0_checked = 0;
  double harmonicity = 0.0;      // mean over held-out conversions
  double seconds = 0.0;
};

struct ToyExperimentConfig {
  ToySpec toy{};
  std::uint64_t iterations = 2000;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  HarmonicityConfig harmonicity{};
};

struct ToyExperimentResult {
  std::vector<ToyRunResult> tfan_runs, none_runs;
  double max_cycle_ratio = 0.0;     // worst final/initial over TFAN runs
  double f0_in_range_fraction = 0.0;
  double harmonicity_tfan = 0.0;
  double harmonicity_none = 0.0;
  double seconds = 0.0;

  std::string summary() const;
};

/// Mean held-out cycle L1 on normalized features, both directions summed.
double validation_cycle_l1(const Generator& g_xy, const Generator& g_yx,
                           const std::vector<Tensor>& heldout_a, const std::vector<Tensor>& heldout_b);

/// Trains one model on the toy corpus and scores its held-out conversions.
ToyRunResult run_toy_model(const ToyCorpus& corpus, const ToySpec& toy, const TrainConfig& cfg,
                           const HarmonicityConfig& hc);

/// TFAN (both positions) against tfan_position = none over the configured seeds.
ToyExperimentResult run_toy_experiment(const ToyExperimentConfig& cfg);

struct AblationRow {
  std::size_t depth = 0;
  TfanPosition position = TfanPosition::Both;
  double mcd_db = 0.0;
  double msd_db = 0.0;
};

struct AblationConfig {
  ToySpec toy{};
  std::uint64_t iterations = 100;
  std::uint64_t seed = 0;
  std::vector<std::size_t> depths{1, 2, 3, 4};
  std::vector<TfanPosition> positions{TfanPosition::OneDToTwoD, TfanPosition::Upsampling,
                                      TfanPosition::Both};
};

/// Held-out A->B conversions scored against the oracle B renderings.
std::vector<AblationRow> run_ablation(const AblationConfig& cfg);

/// "depth,position,mcd_db,msd_db,mcd_msd" with the last column as "MCD/MSD".
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace cvc3
