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

// Brute-force calibration of the harmonicity frame threshold: comb
// strengths of 100 white-noise spectrograms (i.i.d. log-mel values and
// log-mel of white-noise audio) against the toy corpus combs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "cvc3/init.hpp"
#include "cvc3/toyland.hpp"

using namespace cvc3;

namespace {

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(p * static_cast<double>(v.size() - 1))];
}

}  // namespace

int main() {
  const ToySpec toy;
  HarmonicityConfig hc;
  hc.mel = toy.mel;
  Rng rng(0);
  std::normal_distribution<double> n01;

  std::vector<double> noise;
  for (int i = 0; i < 100; ++i) {
    MelSpectrogram m;
    m.data = Matrix(80, 128);
    for (Eigen::Index k = 0; k < m.data.size(); ++k) m.data.data()[k] = n01(rng);
    const auto s = frame_comb_strength(m, hc);
    noise.insert(noise.end(), s.begin(), s.end());
  }
  std::vector<double> audio_noise;
  HarmonicityConfig audio_hc;  // default analysis geometry
  for (int i = 0; i < 100; ++i) {
    Waveform w;
    w.samples.resize(256 * 127);
    for (auto& x : w.samples) x = 0.1 * n01(rng);
    const auto s = frame_comb_strength(log_mel(w), audio_hc);
    audio_noise.insert(audio_noise.end(), s.begin(), s.end());
  }
  std::vector<double> comb;
  const ToyCorpus corpus = generate_toy_corpus(toy);
  for (const auto* dom : {&corpus.domain_a, &corpus.domain_b}) {
    for (const auto& u : *dom) {
      const auto s = frame_comb_strength(u.mel, hc);
      comb.insert(comb.end(), s.begin(), s.end());
    }
  }
  for (const auto& [name, v] : {std::pair{"iid log-mel noise", &noise}, std::pair{"white-noise audio", &audio_noise},
                                std::pair{"toy combs", &comb}}) {
    std::printf("%-18s frames=%zu min=%.4f q50=%.4f q95=%.4f q99=%.4f max=%.4f\n", name, v->size(),
                *std::min_element(v->begin(), v->end()), quantile(*v, 0.5), quantile(*v, 0.95),
                quantile(*v, 0.99), *std::max_element(v->begin(), v->end()));
  }
  // Frozen rule: midpoint between the 99th percentile of i.i.d. log-mel
  // noise and the weakest clean-comb frame, rounded to 0.01.
  const double comb_min = *std::min_element(comb.begin(), comb.end());
  const double threshold = std::round(50.0 * (quantile(noise, 0.99) + comb_min)) / 100.0;
  std::printf("threshold=%.2f\n", threshold);
  for (const auto& [name, v] : {std::pair{"iid log-mel noise", &noise}, std::pair{"white-noise audio", &audio_noise}}) {
    // Per-spectrogram scores: frames were appended in blocks of 128.
    double worst = 0.0;
    for (std::size_t i = 0; i + 128 <= v->size(); i += 128) {
      const auto hits = std::count_if(v->begin() + i, v->begin() + i + 128, [&](double x) { return x >= threshold; });
      worst = std::max(worst, static_cast<double>(hits) / 128.0);
    }
    std::printf("%-18s worst score at threshold: %.4f\n", name, worst);
  }
  return 0;
}
