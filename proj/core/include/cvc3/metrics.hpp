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

// Objective evaluation: DTW alignment, mel-cepstral distortion (MCD) and
// modulation-spectra distance (MSD). Coefficient 0 (energy) is excluded
// from every distance.
//
//   MCD = mean over path of (10 / ln 10) * sqrt(2 * sum_{d>=1} (c_ref - c_conv)^2)
//   MSD = mean over coefficients d>=1 and Hann windows (32 frames, hop 16) of
//         the RMS over DFT bins of the dB difference between the modulation
//         spectra of the aligned trajectories; magnitudes floored at -120 dB.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cvc3/signal.hpp"

namespace cvc3 {

struct AlignedPair {
  std::vector<std::pair<std::size_t, std::size_t>> path;  // (ref frame, conv frame)
  std::size_t ref_len = 0;
  std::size_t conv_len = 0;
  double cost = 0.0;  // sum of frame distances along the path
};

/// Euclidean distance between ref frame i and conv frame j over coefficients 1..D-1.
double frame_distance(const MelCepstrum& ref, std::size_t i, const MelCepstrum& conv, std::size_t j);

/// Minimal-cost monotone, continuous alignment. Ties prefer the diagonal
/// step, then the ref-only step, then the conv-only step.
AlignedPair dtw_align(const MelCepstrum& ref, const MelCepstrum& conv);

double mcd(const MelCepstrum& ref, const MelCepstrum& conv, const AlignedPair& path);

struct MsdConfig {
  std::size_t window = 32;
  std::size_t hop = 16;
  double floor_db = -120.0;
};

double msd(const MelCepstrum& ref, const MelCepstrum& conv, const AlignedPair& path,
           const MsdConfig& cfg = {});

struct UtteranceScore {
  std::string id;
  double mcd_db = 0.0;
  double msd_db = 0.0;
};

struct EvalReport {
  std::vector<UtteranceScore> utterances;  // manifest order
  double mean_mcd_db = 0.0;
  double mean_msd_db = 0.0;
  std::vector<std::string> failures;  // unpaired or unreadable entries
  std::string config_echo;

  std::string to_csv() const;
  std::string to_text() const;
};

/// MCD and MSD of one target/converted pair after DTW alignment.
UtteranceScore score_pair(const std::string& id, const MelCepstrum& target, const MelCepstrum& converted);

/// Fills the corpus means from the utterance scores.
void finalize_report(EvalReport& report);

/// Manifest lines are "converted_path<TAB>target_path"; relative paths are
/// resolved against converted_dir and target_dir. Files ending in .wav are
/// analysed from audio, anything else is read as a spectrogram file.
/// Throws DataError for an empty manifest; per-entry problems are collected
/// in EvalReport::failures.
EvalReport evaluate_pair(const std::string& target_dir, const std::string& converted_dir,
                         const std::string& manifest_path);

}  // namespace cvc3
