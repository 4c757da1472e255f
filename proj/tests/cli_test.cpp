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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "cvc3/errors.hpp"
#include "cvc3/training.hpp"
#include "test_util.hpp"

namespace cvc3 {
namespace {

namespace fs = std::filesystem;
using testing::scratch_dir;

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

MelSpectrogram random_mel(std::size_t bins, std::size_t frames, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(-4.0, 1.5);
  MelSpectrogram m;
  m.data.resize(static_cast<Eigen::Index>(bins), static_cast<Eigen::Index>(frames));
  for (Eigen::Index i = 0; i < m.data.size(); ++i) m.data.data()[i] = n(rng);
  return m;
}

Waveform tone(double hz, double seconds) {
  Waveform w;
  w.samples.resize(static_cast<std::size_t>(seconds * w.sample_rate));
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = 0.3 * std::sin(2.0 * 3.141592653589793 * hz * static_cast<double>(i) / w.sample_rate);
  }
  return w;
}

// Tiny two-domain corpus and architecture files for end-to-end runs.
struct TinySetup {
  fs::path root, x, y, gspec, dspec;

  explicit TinySetup(const std::string& name) : root(scratch_dir(name)) {
    x = root / "x";
    y = root / "y";
    fs::create_directories(x);
    fs::create_directories(y);
    for (std::size_t i = 0; i < 3; ++i) {
      save_spectrogram((x / ("x" + std::to_string(i) + ".mel")).string(), random_mel(16, 20 + 3 * i, 10 + i));
      save_spectrogram((y / ("y" + std::to_string(i) + ".mel")).string(), random_mel(16, 24 + i, 20 + i));
    }
    gspec = root / "g.spec";
    write_file(gspec,
               "input_bins = 16\nbase_channels = 2\nn_residual_blocks = 1\ntfan_position = both\n"
               "tfan_depth = 1\ntfan_hidden_channels = 2\ntfan_kernel_size = 3\n");
    dspec = root / "d.spec";
    write_file(dspec, "base_channels = 2\nn_downsample = 2\n");
  }

  std::vector<std::string> train_args(const fs::path& out, std::uint64_t iterations = 4) const {
    return {"train", "--source-dir", x.string(), "--target-dir", y.string(), "--out-dir", out.string(),
            "--generator-spec", gspec.string(), "--discriminator-spec", dspec.string(), "--iterations",
            std::to_string(iterations), "--checkpoint-every", "2", "--segment-frames", "16", "--seed", "3"};
  }
};

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, cli::kUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(cli({"train"}).code, cli::kUsage);
  EXPECT_EQ(cli({"extract", "--wav-dir", "a", "--out-dir", "b", "--bogus"}).code, cli::kUsage);
  const CliRun help = cli({"--help"});
  EXPECT_EQ(help.code, cli::kOk);
  EXPECT_NE(help.out.find("extract"), std::string::npos);
  const CliRun version = cli({"--version"});
  EXPECT_EQ(version.code, cli::kOk);
  EXPECT_NE(version.out.find(cli::tool_version()), std::string::npos);
}

TEST(Cli, ExtractTwoWavs) {
  const auto dir = scratch_dir("cli_extract");
  fs::create_directories(dir / "wav");
  write_wav((dir / "wav" / "a.wav").string(), tone(220.0, 0.5));
  write_wav((dir / "wav" / "b.wav").string(), tone(330.0, 0.4));
  const std::vector<std::string> args{"extract", "--wav-dir", (dir / "wav").string(), "--out-dir",
                                      (dir / "out").string(), "--stats-out", (dir / "out" / "stats.txt").string()};
  ASSERT_EQ(cli(args).code, cli::kOk);
  std::size_t mel_files = 0;
  for (const auto& e : fs::directory_iterator(dir / "out")) mel_files += e.path().extension() == ".mel";
  EXPECT_EQ(mel_files, 2u);
  std::vector<std::string> before;
  for (const char* f : {"a.mel", "b.mel", "stats.txt", "run_config.ini"}) before.push_back(slurp(dir / "out" / f));
  const CliRun again = cli(args);
  ASSERT_EQ(again.code, cli::kOk) << again.err;
  std::size_t k = 0;
  for (const char* f : {"a.mel", "b.mel", "stats.txt", "run_config.ini"}) {
    EXPECT_EQ(slurp(dir / "out" / f), before[k++]) << f;
  }
  const MelSpectrogram a = load_spectrogram((dir / "out" / "a.mel").string());
  EXPECT_EQ(a.mel_bins(), 80u);
  EXPECT_EQ(a.frames(), 11025u / 256 + 1);
  const FeatureStats s = load_stats((dir / "out" / "stats.txt").string());
  EXPECT_EQ(s.mean.size(), 80u);
}

TEST(Cli, ExtractErrors) {
  const auto dir = scratch_dir("cli_extract_errors");
  fs::create_directories(dir / "empty");
  EXPECT_EQ(cli({"extract", "--wav-dir", (dir / "empty").string(), "--out-dir", (dir / "o").string()}).code,
            cli::kData);
  EXPECT_EQ(cli({"extract", "--wav-dir", (dir / "missing").string(), "--out-dir", (dir / "o").string()}).code,
            cli::kData);
  fs::create_directories(dir / "mixed");
  write_wav((dir / "mixed" / "good.wav").string(), tone(200.0, 0.3));
  write_file(dir / "mixed" / "bad.wav", "RIFF----not a wave file");
  const CliRun r = cli({"extract", "--wav-dir", (dir / "mixed").string(), "--out-dir", (dir / "o").string()});
  EXPECT_EQ(r.code, cli::kData);
  EXPECT_NE(r.err.find("bad.wav"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "o" / "good.mel"));
}

TEST(Cli, PlotIsDeterministicAndCsvRoundTrips) {
  const auto dir = scratch_dir("cli_plot");
  const MelSpectrogram m = random_mel(80, 37, 5);
  save_spectrogram((dir / "m.mel").string(), m);
  for (const char* out : {"p1", "p2"}) {
    ASSERT_EQ(cli({"plot", (dir / "m.mel").string(), "--out-dir", (dir / out).string()}).code, cli::kOk);
  }
  const std::string img = slurp(dir / "p1" / "spectrograms.ppm");
  EXPECT_EQ(img, slurp(dir / "p2" / "spectrograms.ppm"));
  EXPECT_EQ(img.rfind("P6\n37 80\n255\n", 0), 0u);
  EXPECT_EQ(img.size(), std::string("P6\n37 80\n255\n").size() + 37 * 80 * 3);
  const Matrix back = cli::parse_matrix_csv(slurp(dir / "p1" / "m.csv"));
  EXPECT_TRUE(back == m.data);
  EXPECT_NE(slurp(dir / "p1" / "run_config.ini").find("command=\"plot\""), std::string::npos);

  EXPECT_EQ(cli({"plot", (dir / "nothing.mel").string(), "--out-dir", (dir / "p3").string()}).code, cli::kData);
}

TEST(Cli, PpmPanelsSideBySide) {
  const std::string img = cli::render_ppm({random_mel(10, 5, 1), random_mel(10, 7, 2)});
  EXPECT_EQ(img.rfind("P6\n16 10\n255\n", 0), 0u);
  EXPECT_THROW(cli::render_ppm({random_mel(10, 5, 1), random_mel(12, 5, 2)}), DataError);
}

TEST(Cli, EvaluateIdenticalIsAllZero) {
  const auto dir = scratch_dir("cli_eval");
  std::string manifest;
  for (int i = 0; i < 2; ++i) {
    const std::string name = "u" + std::to_string(i) + ".mel";
    save_spectrogram((dir / name).string(), random_mel(80, 40, 30 + i));
    manifest += name + "\t" + name + "\n";
  }
  write_file(dir / "manifest.tsv", manifest);
  const CliRun r = cli({"evaluate", "--target-dir", dir.string(), "--converted-dir", dir.string(), "--manifest",
                     (dir / "manifest.tsv").string(), "--out-dir", (dir / "report").string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(slurp(dir / "report" / "report.csv"), "utterance,mcd_db,msd_db\nu0,0,0\nu1,0,0\nmean,0,0\n");
  EXPECT_NE(r.out.find("config:"), std::string::npos);

  write_file(dir / "empty.tsv", "");
  EXPECT_EQ(cli({"evaluate", "--target-dir", dir.string(), "--converted-dir", dir.string(), "--manifest",
                 (dir / "empty.tsv").string(), "--out-dir", (dir / "report2").string()})
                .code,
            cli::kData);
}

TEST(Cli, TrainIsDeterministicAndResumable) {
  const TinySetup s("cli_train");
  ASSERT_EQ(cli(s.train_args(s.root / "a")).code, cli::kOk);
  const CliRun b = cli(s.train_args(s.root / "b"));
  ASSERT_EQ(b.code, cli::kOk) << b.err;
  const std::string last = checkpoint_name(4);
  EXPECT_EQ(slurp(s.root / "a" / last), slurp(s.root / "b" / last));
  EXPECT_EQ(slurp(s.root / "a" / "losses.csv"), slurp(s.root / "b" / "losses.csv"));
  EXPECT_FALSE(slurp(s.root / "a" / last).empty());

  auto first = s.train_args(s.root / "c");
  first.insert(first.end(), {"--stop-at", "2"});
  ASSERT_EQ(cli(first).code, cli::kOk);
  EXPECT_FALSE(fs::exists(s.root / "c" / last));
  auto resumed = s.train_args(s.root / "c");
  resumed.insert(resumed.end(), {"--resume", (s.root / "c" / checkpoint_name(2)).string()});
  const CliRun r = cli(resumed);
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(slurp(s.root / "a" / last), slurp(s.root / "c" / last));
  EXPECT_EQ(slurp(s.root / "a" / "losses.csv"), slurp(s.root / "c" / "losses.csv"));

  const std::string echo = slurp(s.root / "a" / "run_config.ini");
  EXPECT_NE(echo.find("tool_version=\"" + cli::tool_version() + "\""), std::string::npos);
  EXPECT_NE(echo.find("command=\"train\""), std::string::npos);
  EXPECT_NE(echo.find("iterations=4"), std::string::npos);
}

TEST(Cli, TrainErrors) {
  const TinySetup s("cli_train_errors");
  auto args = s.train_args(s.root / "o");
  args.insert(args.end(), {"--lr-g", "-1"});
  EXPECT_EQ(cli(args).code, cli::kUsage);

  // Mel-bin count disagrees with the generator.
  fs::create_directories(s.root / "wide");
  save_spectrogram((s.root / "wide" / "w.mel").string(), random_mel(20, 30, 1));
  args = s.train_args(s.root / "o");
  args[2] = (s.root / "wide").string();
  EXPECT_EQ(cli(args).code, cli::kData);

  // Feature statistics overflow.
  fs::create_directories(s.root / "huge");
  MelSpectrogram huge = random_mel(16, 30, 2);
  huge.data.setConstant(1e308);
  save_spectrogram((s.root / "huge" / "h.mel").string(), huge);
  args = s.train_args(s.root / "o");
  args[2] = (s.root / "huge").string();
  const CliRun r = cli(args);
  EXPECT_EQ(r.code, cli::kNumeric) << r.err;
}

TEST(Cli, ShippedDefaultsMatchBuiltInDefaults) {
  const std::string ini = std::string(CVC3_SPEC_DIR) + "/../../configs/default.ini";
  ASSERT_TRUE(fs::exists(ini));
  const TinySetup s("cli_defaults");
  ASSERT_EQ(cli(s.train_args(s.root / "plain", 1)).code, cli::kOk);
  auto with_ini = s.train_args(s.root / "plain", 1);
  with_ini.insert(with_ini.begin(), {"--config", ini});
  const std::string plain = slurp(s.root / "plain" / "run_config.ini");
  ASSERT_EQ(cli(with_ini).code, cli::kOk);
  EXPECT_EQ(slurp(s.root / "plain" / "run_config.ini"), plain);

  const auto toy = (s.root / "toy").string();
  ASSERT_EQ(cli({"toy-corpus", "--out-dir", toy, "--toy-utterances", "1", "--toy-heldout", "1"}).code, cli::kOk);
  const std::string toy_plain = slurp(s.root / "toy" / "run_config.ini");
  ASSERT_EQ(cli({"--config", ini, "toy-corpus", "--out-dir", toy, "--toy-utterances", "1", "--toy-heldout", "1"}).code,
            cli::kOk);
  EXPECT_EQ(slurp(s.root / "toy" / "run_config.ini"), toy_plain);
}

TEST(Cli, ConvertWithZeroedOutputLayerGivesTheMeanBaseline) {
  const TinySetup s("cli_convert");
  ASSERT_EQ(cli(s.train_args(s.root / "t", 2)).code, cli::kOk);
  TrainState state = load_checkpoint((s.root / "t" / checkpoint_name(2)).string());
  for (Tensor* t : {&state.g_xy.output_layer().weight, &state.g_xy.output_layer().bias}) {
    auto v = t->data_mut();
    std::fill(v.begin(), v.end(), 0.0);
  }
  const fs::path ckpt = s.root / "zeroed.ckpt";
  save_checkpoint(state, ckpt.string());

  fs::create_directories(s.root / "src");
  save_spectrogram((s.root / "src" / "odd.mel").string(), random_mel(16, 22, 40));
  const CliRun r = cli({"convert", "--checkpoint", ckpt.string(), "--src-dir", (s.root / "src").string(),
                     "--out-dir", (s.root / "conv").string(), "--direction", "xy", "--griffin-lim",
                     "--gl-iters", "2"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const MelSpectrogram out = load_spectrogram((s.root / "conv" / "odd.mel").string());
  ASSERT_EQ(out.mel_bins(), 16u);
  ASSERT_EQ(out.frames(), 22u);
  std::vector<MelSpectrogram> ys;
  for (std::size_t i = 0; i < 3; ++i) ys.push_back(load_spectrogram((s.y / ("y" + std::to_string(i) + ".mel")).string()));
  const FeatureStats sy = compute_stats(ys);
  for (std::size_t q = 0; q < 16; ++q) {
    for (std::size_t t = 0; t < 22; ++t) EXPECT_NEAR(out.data(q, t), sy.mean[q], 1e-12);
  }
  EXPECT_TRUE(fs::exists(s.root / "conv" / "odd.approx-griffinlim.wav"));

  // Architecture check against an explicit spec.
  write_file(s.root / "other.spec", "input_bins = 16\nbase_channels = 4\nn_residual_blocks = 1\n");
  const CliRun mismatch = cli({"convert", "--checkpoint", ckpt.string(), "--src-dir", (s.root / "src").string(),
                            "--out-dir", (s.root / "conv2").string(), "--generator-spec",
                            (s.root / "other.spec").string()});
  EXPECT_EQ(mismatch.code, cli::kData);
  EXPECT_NE(mismatch.err.find("spec"), std::string::npos);

  EXPECT_EQ(cli({"convert", "--checkpoint", (s.root / "none.ckpt").string(), "--src-dir",
                 (s.root / "src").string(), "--out-dir", (s.root / "conv3").string()})
                .code,
            cli::kData);
}

TEST(Cli, ToyCorpusAndAblate) {
  const auto dir = scratch_dir("cli_toy");
  ASSERT_EQ(cli({"toy-corpus", "--out-dir", (dir / "corpus").string(), "--toy-utterances", "2",
                 "--toy-heldout", "2", "--toy-frames", "64"})
                .code,
            cli::kOk);
  EXPECT_TRUE(fs::exists(dir / "corpus" / "domain_a" / "a_001.mel"));
  EXPECT_TRUE(fs::exists(dir / "corpus" / "heldout_b" / "h_001.mel"));
  EXPECT_EQ(slurp(dir / "corpus" / "manifest.tsv"), "h_000.mel\th_000.mel\nh_001.mel\th_001.mel\n");

  const CliRun r = cli({"ablate", "--out-dir", (dir / "ablate").string(), "--iterations", "1", "--toy-utterances",
                     "2", "--toy-heldout", "1", "--toy-frames", "64"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const std::string csv = slurp(dir / "ablate" / "ablation.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
  EXPECT_EQ(csv.find("nan"), std::string::npos);
  for (const char* pos : {"one_d_to_two_d", "upsampling", "both"}) EXPECT_NE(csv.find(pos), std::string::npos);
}

}  // namespace
}  // namespace cvc3
