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

#include "cvc3/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <unsupported/Eigen/FFT>

#include "cvc3/errors.hpp"
#include "cvc3/key_value.hpp"

namespace cvc3 {

namespace {

void check_pair(const MelCepstrum& ref, const MelCepstrum& conv) {
  if (ref.frames() == 0 || conv.frames() == 0) throw DataError("metrics: empty cepstrum sequence");
  if (ref.order() != conv.order()) {
    throw ShapeError("metrics: cepstral order " + std::to_string(ref.order()) + " vs " +
                     std::to_string(conv.order()));
  }
  if (ref.order() < 2) throw ShapeError("metrics: need at least two cepstral coefficients");
}

void check_path(const MelCepstrum& ref, const MelCepstrum& conv, const AlignedPair& p) {
  check_pair(ref, conv);
  if (p.path.empty()) throw DataError("metrics: empty alignment path");
  for (const auto& [i, j] : p.path) {
    if (i >= ref.frames() || j >= conv.frames()) throw ShapeError("metrics: path index out of range");
  }
}

}  // namespace

double frame_distance(const MelCepstrum& ref, std::size_t i, const MelCepstrum& conv, std::size_t j) {
  double s = 0.0;
  for (Eigen::Index d = 1; d < ref.coeffs.rows(); ++d) {
    const double diff = ref.coeffs(d, static_cast<Eigen::Index>(i)) - conv.coeffs(d, static_cast<Eigen::Index>(j));
    s += diff * diff;
  }
  return std::sqrt(s);
}

AlignedPair dtw_align(const MelCepstrum& ref, const MelCepstrum& conv) {
  check_pair(ref, conv);
  const std::size_t n = ref.frames(), m = conv.frames();
  std::vector<double> acc(n * m);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * m + j]; };
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double best = 0.0;
      if (i > 0 || j > 0) {
        const double diag = (i > 0 && j > 0) ? at(i - 1, j - 1) : inf;
        const double up = i > 0 ? at(i - 1, j) : inf;
        const double left = j > 0 ? at(i, j - 1) : inf;
        best = std::min({diag, up, left});
      }
      at(i, j) = best + frame_distance(ref, i, conv, j);
    }
  }
  AlignedPair out;
  out.ref_len = n;
  out.conv_len = m;
  out.cost = at(n - 1, m - 1);
  std::size_t i = n - 1, j = m - 1;
  out.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    const double diag = (i > 0 && j > 0) ? at(i - 1, j - 1) : inf;
    const double up = i > 0 ? at(i - 1, j) : inf;
    const double left = j > 0 ? at(i, j - 1) : inf;
    if (diag <= up && diag <= left) {
      --i;
      --j;
    } else if (up <= left) {
      --i;
    } else {
      --j;
    }
    out.path.emplace_back(i, j);
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

double mcd(const MelCepstrum& ref, const MelCepstrum& conv, const AlignedPair& path) {
  check_path(ref, conv, path);
  const double k = 10.0 / std::numbers::ln10;
  double total = 0.0;
  for (const auto& [i, j] : path.path) {
    const double d = frame_distance(ref, i, conv, j);
    total += k * std::sqrt(2.0 * d * d);
  }
  return total / static_cast<double>(path.path.size());
}

double msd(const MelCepstrum& ref, const MelCepstrum& conv, const AlignedPair& path, const MsdConfig& cfg) {
  check_path(ref, conv, path);
  const std::size_t len = path.path.size();
  if (len < cfg.window) {
    throw DataError("msd: aligned length " + std::to_string(len) + " is shorter than the " +
                    std::to_string(cfg.window) + "-frame modulation window");
  }
  const std::size_t windows = 1 + (len - cfg.window) / cfg.hop;
  const auto win = hann_window(cfg.window);
  const double floor_mag = std::pow(10.0, cfg.floor_db / 20.0);
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> buf(cfg.window);
  std::vector<std::complex<double>> spec, fa, fb;
  double total = 0.0;
  for (Eigen::Index d = 1; d < ref.coeffs.rows(); ++d) {
    for (std::size_t w = 0; w < windows; ++w) {
      for (std::size_t k = 0; k < cfg.window; ++k) {
        const auto i = path.path[w * cfg.hop + k].first;
        buf[k] = ref.coeffs(d, static_cast<Eigen::Index>(i)) * win[k];
      }
      fft.fwd(spec, buf);
      fa = spec;
      for (std::size_t k = 0; k < cfg.window; ++k) {
        const auto j = path.path[w * cfg.hop + k].second;
        buf[k] = conv.coeffs(d, static_cast<Eigen::Index>(j)) * win[k];
      }
      fft.fwd(spec, buf);
      fb = spec;
      double sq = 0.0;
      for (std::size_t bin = 0; bin < fa.size(); ++bin) {
        const double diff = 20.0 * (std::log10(std::max(std::abs(fa[bin]), floor_mag)) -
                                    std::log10(std::max(std::abs(fb[bin]), floor_mag)));
        sq += diff * diff;
      }
      total += std::sqrt(sq / static_cast<double>(fa.size()));
    }
  }
  return total / static_cast<double>((ref.coeffs.rows() - 1) * static_cast<Eigen::Index>(windows));
}

UtteranceScore score_pair(const std::string& id, const MelCepstrum& target, const MelCepstrum& converted) {
  const AlignedPair path = dtw_align(target, converted);
  return {id, mcd(target, converted, path), msd(target, converted, path)};
}

void finalize_report(EvalReport& report) {
  report.mean_mcd_db = report.mean_msd_db = 0.0;
  if (report.utterances.empty()) return;
  for (const auto& u : report.utterances) {
    report.mean_mcd_db += u.mcd_db;
    report.mean_msd_db += u.msd_db;
  }
  report.mean_mcd_db /= static_cast<double>(report.utterances.size());
  report.mean_msd_db /= static_cast<double>(report.utterances.size());
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << "utterance,mcd_db,msd_db\n";
  for (const auto& u : utterances) os << u.id << ',' << format_double(u.mcd_db) << ',' << format_double(u.msd_db) << '\n';
  os << "mean," << format_double(mean_mcd_db) << ',' << format_double(mean_msd_db) << '\n';
  return os.str();
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << "utterances: " << utterances.size() << '\n';
  for (const auto& u : utterances) os << "  " << u.id << "  MCD " << u.mcd_db << " dB  MSD " << u.msd_db << " dB\n";
  os << "mean  MCD/MSD = " << mean_mcd_db << "/" << mean_msd_db << " dB\n";
  if (!failures.empty()) {
    os << "failures: " << failures.size() << '\n';
    for (const auto& f : failures) os << "  " << f << '\n';
  }
  if (!config_echo.empty()) {
    os << "config:\n";
    std::istringstream lines(config_echo);
    for (std::string line; std::getline(lines, line);) os << "  " << line << '\n';
  }
  return os.str();
}

namespace {

MelCepstrum load_cepstrum(const std::filesystem::path& p) {
  if (p.extension() == ".wav") return mel_cepstrum(log_mel(load_wav(p.string())));
  return mel_cepstrum(load_spectrogram(p.string()));
}

std::filesystem::path resolve(const std::string& dir, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || dir.empty()) return path;
  return std::filesystem::path(dir) / path;
}

}  // namespace

EvalReport evaluate_pair(const std::string& target_dir, const std::string& converted_dir,
                         const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open manifest " + manifest_path);
  std::vector<std::pair<std::string, std::string>> entries;
  EvalReport report;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      report.failures.push_back("line " + std::to_string(line_no) + ": unpaired entry '" + line + "'");
      continue;
    }
    entries.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  if (entries.empty() && report.failures.empty()) throw DataError("manifest " + manifest_path + " is empty");
  for (const auto& [conv, target] : entries) {
    const auto conv_path = resolve(converted_dir, conv);
    const auto target_path = resolve(target_dir, target);
    try {
      report.utterances.push_back(
          score_pair(conv_path.stem().string(), load_cepstrum(target_path), load_cepstrum(conv_path)));
    } catch (const Error& e) {
      report.failures.push_back(conv + ": " + e.what());
    }
  }
  finalize_report(report);
  return report;
}

}  // namespace cvc3
