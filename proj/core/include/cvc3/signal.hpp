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

// Waveform I/O and log mel-spectrogram features.
//
// Conventions: periodic Hann window of length 1024 (= FFT size), hop 256,
// reflection padding of window/2 on both sides, 80 triangular HTK-mel filters
// spanning 0 Hz to Nyquist with unit peak, natural-log compression with a
// floor of 1e-5. Mel-cepstra are the orthonormal DCT-II of each log-mel
// column truncated to 35 coefficients; this stands in for WORLD analysis and
// supports relative comparisons only.

#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "cvc3/tensor.hpp"

namespace cvc3 {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMatrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic>;

constexpr int kDefaultSampleRate = 22050;

struct Waveform {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
  void validate() const;
};

struct MelConfig {
  int sample_rate = kDefaultSampleRate;
  std::size_t window = 1024;  // also the FFT size
  std::size_t hop = 256;
  std::size_t mel_bins = 80;
  double fmin = 0.0;
  double fmax = -1.0;  // <= 0 selects Nyquist
  double log_floor = 1e-5;

  double upper_frequency() const { return fmax > 0.0 ? fmax : sample_rate / 2.0; }
  std::size_t fft_bins() const { return window / 2 + 1; }
};

struct MelSpectrogram {
  Matrix data;  // mel_bins x frames, natural-log magnitude
  int sample_rate = kDefaultSampleRate;
  std::size_t hop = 256;
  std::size_t window = 1024;

  std::size_t mel_bins() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t frames() const { return static_cast<std::size_t>(data.cols()); }
  void validate() const;
};

struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t mel_bins() const { return mean.size(); }
};

constexpr double kStatsStdFloor = 1e-5;

struct MelCepstrum {
  Matrix coeffs;  // order x frames, coefficient 0 is the energy term

  std::size_t order() const { return static_cast<std::size_t>(coeffs.rows()); }
  std::size_t frames() const { return static_cast<std::size_t>(coeffs.cols()); }
};

constexpr std::size_t kMelCepstrumOrder = 35;

// ------------------------------------------------------------------ audio I/O

/// Reads 8/16/24/32-bit PCM or 32/64-bit float WAV, downmixes to mono and
/// resamples to `target_rate` when it differs.
Waveform load_wav(const std::string& path, int target_rate = kDefaultSampleRate);

/// Writes 16-bit PCM mono, clipping to [-1, 1].
void write_wav(const std::string& path, const Waveform& w);

/// Output length of resample(): ceil(n * to / from).
std::size_t resampled_length(std::size_t n, int from_rate, int to_rate);

/// Hann-windowed sinc interpolation with 32 zero crossings per side.
std::vector<double> resample(const std::vector<double>& x, int from_rate, int to_rate);

// ------------------------------------------------------------------ STFT

/// Number of frames for `len` samples under centered (reflection-padded) framing.
std::size_t stft_frame_count(std::size_t len, std::size_t window, std::size_t hop);

std::vector<double> hann_window(std::size_t n);

/// Complex STFT, (window/2 + 1) x frames. Throws DataError if the waveform
/// is shorter than one window.
ComplexMatrix stft(const std::vector<double>& samples, std::size_t window = 1024,
                   std::size_t hop = 256);

/// Weighted overlap-add inverse of stft(); returns hop * (frames - 1) samples.
std::vector<double> istft(const ComplexMatrix& spec, std::size_t window = 1024,
                          std::size_t hop = 256);

// ------------------------------------------------------------------ mel features

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Center frequencies (Hz) of the mel filters, one per mel bin.
std::vector<double> mel_center_frequencies(const MelConfig& cfg);

/// Response of mel filter `bin` to a pure frequency `hz` (triangle with unit peak).
double mel_filter_response(const MelConfig& cfg, std::size_t bin, double hz);
/// Responses of every mel filter to `hz`.
std::vector<double> mel_filter_responses(const MelConfig& cfg, double hz);

/// mel_bins x fft_bins matrix of filter weights at the FFT bin frequencies.
Matrix mel_filterbank(const MelConfig& cfg);

MelSpectrogram log_mel(const Waveform& w, const MelConfig& cfg = {});

FeatureStats compute_stats(const std::vector<MelSpectrogram>& corpus);
MelSpectrogram apply_norm(const MelSpectrogram& m, const FeatureStats& stats);
MelSpectrogram apply_denorm(const MelSpectrogram& m, const FeatureStats& stats);

/// Text format: optional '#' comment lines, then mel_bins, the mean row and
/// the std row, whitespace-separated decimals.
void save_stats(const std::string& path, const FeatureStats& stats, const std::string& comment = "");
FeatureStats load_stats(const std::string& path);

MelCepstrum mel_cepstrum(const MelSpectrogram& m, std::size_t order = kMelCepstrumOrder);

/// Approximate inversion for listening checks. Starts from zero phase; each
/// iteration re-estimates phase from the STFT of the current waveform.
Waveform griffin_lim(const MelSpectrogram& m, std::size_t iters = 32, const MelConfig& cfg = {});

// ------------------------------------------------------------------ tensors and files

Tensor to_tensor(const Matrix& m);
Matrix to_matrix(const Tensor& t);

/// Binary spectrogram file: "CVC3MEL\0", then little-endian u32 version,
/// mel_bins, frames, sample_rate, hop, window, then mel_bins*frames f64
/// values in row-major order.
void save_spectrogram(const std::string& path, const MelSpectrogram& m);
MelSpectrogram load_spectrogram(const std::string& path);

/// Reflection padding of the frame axis up to at least `frames` columns.
MelSpectrogram reflect_pad_frames(const MelSpectrogram& m, std::size_t frames);

}  // namespace cvc3
