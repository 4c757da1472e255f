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

#include "cvc3/signal.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unsupported/Eigen/FFT>

#include "cvc3/binary_io.hpp"
#include "cvc3/errors.hpp"
#include "cvc3/key_value.hpp"

namespace cvc3 {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::FFT<double> half_spectrum_fft() {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  return fft;
}

std::uint16_t read_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

double decode_sample(const std::uint8_t* p, int format, int bits) {
  if (format == 3) {
    if (bits == 32) {
      float f;
      std::memcpy(&f, p, 4);
      return f;
    }
    double d;
    std::memcpy(&d, p, 8);
    return d;
  }
  switch (bits) {
    case 8: return (static_cast<double>(p[0]) - 128.0) / 128.0;
    case 16: return static_cast<std::int16_t>(read_u16(p)) / 32768.0;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default: return static_cast<std::int32_t>(read_u32(p)) / 2147483648.0;
  }
}

}  // namespace

// ------------------------------------------------------------------ types

void Waveform::validate() const {
  if (sample_rate <= 0) throw DataError("sample rate must be positive");
  for (double s : samples) {
    if (!std::isfinite(s)) throw NumericError("waveform contains non-finite samples");
  }
}

void MelSpectrogram::validate() const {
  if (data.cols() < 1 || data.rows() < 1) throw DataError("spectrogram must have at least one frame");
  if (!data.allFinite()) throw NumericError("spectrogram contains non-finite values");
}

// ------------------------------------------------------------------ audio I/O

Waveform load_wav(const std::string& path, int target_rate) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DataError(path + ": not a RIFF/WAVE file");
  }
  int format = 0, channels = 0, rate = 0, bits = 0;
  const std::uint8_t* pcm = nullptr;
  std::size_t pcm_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw DataError(path + ": truncated fmt chunk");
      format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = static_cast<int>(read_u32(chunk + 12));
      bits = read_u16(chunk + 22);
      if (format == 0xFFFE && avail >= 26) format = read_u16(chunk + 8 + 24);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      pcm = chunk + 8;
      pcm_size = avail;
    }
    pos = body + size + (size & 1);
  }
  if (format == 0 || pcm == nullptr) throw DataError(path + ": missing fmt or data chunk");
  const bool pcm_ok = format == 1 && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  const bool float_ok = format == 3 && (bits == 32 || bits == 64);
  if (!pcm_ok && !float_ok) {
    throw DataError(path + ": unsupported encoding (format " + std::to_string(format) + ", " +
                    std::to_string(bits) + " bits)");
  }
  if (channels < 1 || rate <= 0) throw DataError(path + ": invalid channel count or sample rate");
  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * (bits / 8);
  const std::size_t n = pcm_size / frame_bytes;
  if (n == 0) throw DataError(path + ": empty audio");

  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      acc += decode_sample(pcm + i * frame_bytes + static_cast<std::size_t>(c) * (bits / 8), format, bits);
    }
    w.samples[i] = std::clamp(acc / channels, -1.0, 1.0);
  }
  w.validate();
  if (target_rate > 0 && rate != target_rate) {
    w.samples = resample(w.samples, rate, target_rate);
    w.sample_rate = target_rate;
  }
  return w;
}

void write_wav(const std::string& path, const Waveform& w) {
  w.validate();
  ByteWriter out;
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  out.bytes("RIFF", 4);
  out.u32(36 + data_bytes);
  out.bytes("WAVEfmt ", 8);
  out.u32(16);
  const std::uint16_t fmt_fields[2] = {1, 1};  // PCM, mono
  out.bytes(fmt_fields, 4);
  out.u32(static_cast<std::uint32_t>(w.sample_rate));
  out.u32(static_cast<std::uint32_t>(w.sample_rate) * 2);
  const std::uint16_t block[2] = {2, 16};
  out.bytes(block, 4);
  out.bytes("data", 4);
  out.u32(data_bytes);
  for (double s : w.samples) {
    const auto v = static_cast<std::int16_t>(std::lround(std::clamp(s, -1.0, 1.0) * 32767.0));
    out.bytes(&v, 2);
  }
  write_file_atomic(path, out.buffer());
}

std::size_t resampled_length(std::size_t n, int from_rate, int to_rate) {
  const auto num = static_cast<unsigned long long>(n) * static_cast<unsigned long long>(to_rate);
  return static_cast<std::size_t>((num + from_rate - 1) / from_rate);
}

std::vector<double> resample(const std::vector<double>& x, int from_rate, int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) throw DataError("resample: rates must be positive");
  if (from_rate == to_rate) return x;
  constexpr int kZeroCrossings = 32;
  const double ratio = static_cast<double>(to_rate) / from_rate;
  const double cutoff = std::min(1.0, ratio);
  const double half_width = kZeroCrossings / cutoff;
  std::vector<double> y(resampled_length(x.size(), from_rate, to_rate));
  const auto n = static_cast<long long>(x.size());
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double t = static_cast<double>(j) / ratio;
    const auto lo = std::max<long long>(0, static_cast<long long>(std::ceil(t - half_width)));
    const auto hi = std::min<long long>(n - 1, static_cast<long long>(std::floor(t + half_width)));
    double acc = 0.0;
    for (long long i = lo; i <= hi; ++i) {
      const double u = t - static_cast<double>(i);
      const double a = cutoff * u;
      const double sinc = a == 0.0 ? 1.0 : std::sin(kPi * a) / (kPi * a);
      const double win = 0.5 + 0.5 * std::cos(kPi * u / half_width);
      acc += x[static_cast<std::size_t>(i)] * cutoff * sinc * win;
    }
    y[j] = acc;
  }
  return y;
}

// ------------------------------------------------------------------ STFT

std::size_t stft_frame_count(std::size_t len, std::size_t window, std::size_t hop) {
  const std::size_t padded = len + 2 * (window / 2);
  if (padded < window) return 0;
  return 1 + (padded - window) / hop;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

ComplexMatrix stft(const std::vector<double>& samples, std::size_t window, std::size_t hop) {
  if (window < 2 || hop == 0) throw DataError("stft: invalid window or hop");
  if (samples.size() < window) {
    throw DataError("stft: waveform of " + std::to_string(samples.size()) +
                    " samples is shorter than one frame (" + std::to_string(window) + ")");
  }
  const std::size_t pad = window / 2;
  std::vector<double> padded(samples.size() + 2 * pad);
  const std::size_t n = samples.size();
  for (std::size_t i = 0; i < padded.size(); ++i) {
    // Reflection without repeating the edge sample.
    long long k = static_cast<long long>(i) - static_cast<long long>(pad);
    if (k < 0) k = -k;
    if (k >= static_cast<long long>(n)) k = 2 * static_cast<long long>(n) - 2 - k;
    padded[i] = samples[static_cast<std::size_t>(k)];
  }
  const std::size_t frames = stft_frame_count(n, window, hop);
  const auto win = hann_window(window);
  auto fft = half_spectrum_fft();
  ComplexMatrix out(window / 2 + 1, frames);
  std::vector<double> frame(window);
  std::vector<std::complex<double>> spec;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < window; ++i) frame[i] = padded[t * hop + i] * win[i];
    fft.fwd(spec, frame);
    for (std::size_t k = 0; k <= window / 2; ++k) out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) = spec[k];
  }
  return out;
}

std::vector<double> istft(const ComplexMatrix& spec, std::size_t window, std::size_t hop) {
  if (static_cast<std::size_t>(spec.rows()) != window / 2 + 1) {
    throw ShapeError("istft: spectrum has " + std::to_string(spec.rows()) + " bins, expected " +
                     std::to_string(window / 2 + 1));
  }
  const auto frames = static_cast<std::size_t>(spec.cols());
  if (frames == 0) return {};
  const std::size_t pad = window / 2;
  const std::size_t total = window + hop * (frames - 1);
  std::vector<double> acc(total, 0.0), wsum(total, 0.0);
  const auto win = hann_window(window);
  auto fft = half_spectrum_fft();
  std::vector<std::complex<double>> column(window / 2 + 1);
  std::vector<double> frame;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < column.size(); ++k) column[k] = spec(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t));
    fft.inv(frame, column, static_cast<int>(window));
    for (std::size_t i = 0; i < window; ++i) {
      acc[t * hop + i] += frame[i] * win[i];
      wsum[t * hop + i] += win[i] * win[i];
    }
  }
  const std::size_t len = hop * (frames - 1);
  std::vector<double> out(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double w = wsum[i + pad];
    out[i] = w > 1e-10 ? acc[i + pad] / w : 0.0;
  }
  return out;
}

// ------------------------------------------------------------------ mel features

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

std::vector<double> mel_edges(const MelConfig& cfg) {
  const double lo = hz_to_mel(cfg.fmin);
  const double hi = hz_to_mel(cfg.upper_frequency());
  std::vector<double> edges(cfg.mel_bins + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cfg.mel_bins + 1));
  }
  return edges;
}

double triangle(double lo, double center, double hi, double hz) {
  if (hz <= lo || hz >= hi) return 0.0;
  return hz <= center ? (hz - lo) / (center - lo) : (hi - hz) / (hi - center);
}

}  // namespace

std::vector<double> mel_center_frequencies(const MelConfig& cfg) {
  auto edges = mel_edges(cfg);
  return {edges.begin() + 1, edges.end() - 1};
}

double mel_filter_response(const MelConfig& cfg, std::size_t bin, double hz) {
  const auto edges = mel_edges(cfg);
  return triangle(edges[bin], edges[bin + 1], edges[bin + 2], hz);
}

std::vector<double> mel_filter_responses(const MelConfig& cfg, double hz) {
  const auto edges = mel_edges(cfg);
  std::vector<double> out(cfg.mel_bins);
  for (std::size_t q = 0; q < cfg.mel_bins; ++q) out[q] = triangle(edges[q], edges[q + 1], edges[q + 2], hz);
  return out;
}

Matrix mel_filterbank(const MelConfig& cfg) {
  const auto edges = mel_edges(cfg);
  const std::size_t bins = cfg.fft_bins();
  Matrix fb = Matrix::Zero(static_cast<Eigen::Index>(cfg.mel_bins), static_cast<Eigen::Index>(bins));
  for (std::size_t q = 0; q < cfg.mel_bins; ++q) {
    for (std::size_t k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * cfg.sample_rate / static_cast<double>(cfg.window);
      fb(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(k)) = triangle(edges[q], edges[q + 1], edges[q + 2], hz);
    }
  }
  return fb;
}

MelSpectrogram log_mel(const Waveform& w, const MelConfig& cfg) {
  w.validate();
  if (w.sample_rate != cfg.sample_rate) {
    throw DataError("log_mel: waveform rate " + std::to_string(w.sample_rate) +
                    " differs from feature rate " + std::to_string(cfg.sample_rate));
  }
  const ComplexMatrix spec = stft(w.samples, cfg.window, cfg.hop);
  const Eigen::MatrixXd mag = spec.cwiseAbs();
  MelSpectrogram m;
  m.sample_rate = cfg.sample_rate;
  m.hop = cfg.hop;
  m.window = cfg.window;
  m.data = (mel_filterbank(cfg) * mag).array().max(cfg.log_floor).log().matrix();
  return m;
}

FeatureStats compute_stats(const std::vector<MelSpectrogram>& corpus) {
  if (corpus.empty()) throw DataError("compute_stats: empty corpus");
  const std::size_t q = corpus.front().mel_bins();
  std::size_t frames = 0;
  for (const auto& m : corpus) {
    if (m.mel_bins() != q) throw ShapeError("compute_stats: mel-bin count differs across corpus");
    frames += m.frames();
  }
  if (frames == 0) throw DataError("compute_stats: corpus has no frames");
  FeatureStats s;
  s.mean.assign(q, 0.0);
  s.std.assign(q, 0.0);
  for (const auto& m : corpus) {
    for (std::size_t r = 0; r < q; ++r) s.mean[r] += m.data.row(static_cast<Eigen::Index>(r)).sum();
  }
  for (auto& v : s.mean) v /= static_cast<double>(frames);
  for (const auto& m : corpus) {
    for (std::size_t r = 0; r < q; ++r) {
      s.std[r] += (m.data.row(static_cast<Eigen::Index>(r)).array() - s.mean[r]).square().sum();
    }
  }
  for (auto& v : s.std) v = std::max(std::sqrt(v / static_cast<double>(frames)), kStatsStdFloor);
  for (std::size_t r = 0; r < q; ++r) {
    if (!std::isfinite(s.mean[r]) || !std::isfinite(s.std[r])) {
      throw NumericError("compute_stats: statistics of mel bin " + std::to_string(r) + " overflow");
    }
  }
  return s;
}

namespace {

void check_stats(const MelSpectrogram& m, const FeatureStats& stats) {
  if (stats.mean.size() != m.mel_bins() || stats.std.size() != m.mel_bins()) {
    throw ShapeError("feature stats cover " + std::to_string(stats.mean.size()) +
                     " bins, spectrogram has " + std::to_string(m.mel_bins()));
  }
}

}  // namespace

MelSpectrogram apply_norm(const MelSpectrogram& m, const FeatureStats& stats) {
  check_stats(m, stats);
  MelSpectrogram out = m;
  for (std::size_t r = 0; r < m.mel_bins(); ++r) {
    auto row = out.data.row(static_cast<Eigen::Index>(r));
    row = (row.array() - stats.mean[r]) / stats.std[r];
  }
  return out;
}

MelSpectrogram apply_denorm(const MelSpectrogram& m, const FeatureStats& stats) {
  check_stats(m, stats);
  MelSpectrogram out = m;
  for (std::size_t r = 0; r < m.mel_bins(); ++r) {
    auto row = out.data.row(static_cast<Eigen::Index>(r));
    row = row.array() * stats.std[r] + stats.mean[r];
  }
  return out;
}

void save_stats(const std::string& path, const FeatureStats& stats, const std::string& comment) {
  std::ostringstream os;
  os << "# feature stats: mel_bins, mean row, std row\n";
  std::istringstream lines(comment);
  for (std::string line; std::getline(lines, line);) os << "# " << line << '\n';
  os << stats.mel_bins() << '\n';
  for (const auto* row : {&stats.mean, &stats.std}) {
    for (std::size_t i = 0; i < row->size(); ++i) os << (i ? " " : "") << format_double((*row)[i]);
    os << '\n';
  }
  write_text_atomic(path, os.str());
}

FeatureStats load_stats(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stats file " + path);
  std::string content, line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') continue;
    content += line + '\n';
  }
  std::istringstream is(content);
  std::size_t q = 0;
  if (!(is >> q) || q == 0) throw DataError(path + ": missing mel_bins");
  FeatureStats s;
  s.mean.resize(q);
  s.std.resize(q);
  for (auto& v : s.mean)
    if (!(is >> v)) throw DataError(path + ": truncated mean row");
  for (auto& v : s.std)
    if (!(is >> v) || !(v > 0.0)) throw DataError(path + ": truncated or non-positive std row");
  return s;
}

MelCepstrum mel_cepstrum(const MelSpectrogram& m, std::size_t order) {
  const std::size_t q = m.mel_bins();
  if (order > q) {
    throw DataError("mel_cepstrum: order " + std::to_string(order) + " exceeds mel bins " + std::to_string(q));
  }
  Matrix dct(static_cast<Eigen::Index>(order), static_cast<Eigen::Index>(q));
  for (std::size_t k = 0; k < order; ++k) {
    const double s = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(q));
    for (std::size_t n = 0; n < q; ++n) {
      dct(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n)) =
          s * std::cos(kPi * static_cast<double>(k) * (2.0 * static_cast<double>(n) + 1.0) / (2.0 * static_cast<double>(q)));
    }
  }
  MelCepstrum c;
  c.coeffs = dct * m.data;
  return c;
}

Waveform griffin_lim(const MelSpectrogram& m, std::size_t iters, const MelConfig& cfg_in) {
  m.validate();
  MelConfig cfg = cfg_in;
  cfg.sample_rate = m.sample_rate;
  cfg.hop = m.hop;
  cfg.window = m.window;
  cfg.mel_bins = m.mel_bins();
  const Matrix fb = mel_filterbank(cfg);
  const Eigen::MatrixXd pinv = Eigen::MatrixXd(fb).completeOrthogonalDecomposition().pseudoInverse();
  const Eigen::MatrixXd mel_mag = m.data.array().exp().matrix();
  const Eigen::MatrixXd target = (pinv * mel_mag).cwiseMax(0.0);

  ComplexMatrix spec = target.cast<std::complex<double>>();
  std::vector<double> y = istft(spec, cfg.window, cfg.hop);
  for (std::size_t it = 0; it < iters; ++it) {
    const ComplexMatrix est = stft(y, cfg.window, cfg.hop);
    for (Eigen::Index t = 0; t < spec.cols(); ++t) {
      for (Eigen::Index k = 0; k < spec.rows(); ++k) {
        const std::complex<double> e = est(k, t);
        const double a = std::abs(e);
        spec(k, t) = a > 1e-12 ? target(k, t) * (e / a) : std::complex<double>(target(k, t), 0.0);
      }
    }
    y = istft(spec, cfg.window, cfg.hop);
  }
  Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples = std::move(y);
  return w;
}

// ------------------------------------------------------------------ tensors and files

Tensor to_tensor(const Matrix& m) {
  std::vector<double> values(m.data(), m.data() + m.size());
  return Tensor({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())}, std::move(values));
}

Matrix to_matrix(const Tensor& t) {
  if (t.rank() != 2) throw ShapeError("to_matrix: expected a rank-2 tensor");
  Matrix m(static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
  std::copy(t.data().begin(), t.data().end(), m.data());
  return m;
}

namespace {
constexpr char kSpectrogramMagic[8] = {'C', 'V', 'C', '3', 'M', 'E', 'L', '\0'};
constexpr std::uint32_t kSpectrogramVersion = 1;
}  // namespace

void save_spectrogram(const std::string& path, const MelSpectrogram& m) {
  m.validate();
  ByteWriter out;
  out.bytes(kSpectrogramMagic, 8);
  out.u32(kSpectrogramVersion);
  out.u32(static_cast<std::uint32_t>(m.mel_bins()));
  out.u32(static_cast<std::uint32_t>(m.frames()));
  out.u32(static_cast<std::uint32_t>(m.sample_rate));
  out.u32(static_cast<std::uint32_t>(m.hop));
  out.u32(static_cast<std::uint32_t>(m.window));
  out.f64s(m.data.data(), static_cast<std::size_t>(m.data.size()));
  write_file_atomic(path, out.buffer());
}

MelSpectrogram load_spectrogram(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  ByteReader in(bytes.data(), bytes.size());
  try {
    char magic[8];
    in.bytes(magic, 8);
    if (std::memcmp(magic, kSpectrogramMagic, 8) != 0) throw FormatError("bad magic");
    const auto version = in.u32();
    if (version != kSpectrogramVersion) throw FormatError("unsupported version " + std::to_string(version));
    const auto q = in.u32();
    const auto t = in.u32();
    MelSpectrogram m;
    m.sample_rate = static_cast<int>(in.u32());
    m.hop = in.u32();
    m.window = in.u32();
    if (q == 0 || t == 0) throw FormatError("empty spectrogram");
    if (in.remaining() != static_cast<std::size_t>(q) * t * sizeof(double)) {
      throw FormatError("payload size does not match header");
    }
    m.data.resize(q, t);
    in.f64s(m.data.data(), static_cast<std::size_t>(q) * t);
    m.validate();
    return m;
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

MelSpectrogram reflect_pad_frames(const MelSpectrogram& m, std::size_t frames) {
  const std::size_t t = m.frames();
  if (t >= frames) return m;
  MelSpectrogram out = m;
  out.data.resize(m.data.rows(), static_cast<Eigen::Index>(frames));
  for (std::size_t j = 0; j < frames; ++j) {
    // Reflect without repeating the edge; a single frame is repeated.
    std::size_t src = j;
    if (t == 1) {
      src = 0;
    } else {
      const std::size_t period = 2 * (t - 1);
      src = j % period;
      if (src >= t) src = period - src;
    }
    out.data.col(static_cast<Eigen::Index>(j)) = m.data.col(static_cast<Eigen::Index>(src));
  }
  return out;
}

}  // namespace cvc3
