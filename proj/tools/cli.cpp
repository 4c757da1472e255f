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

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cvc3/binary_io.hpp"
#include "cvc3/errors.hpp"
#include "cvc3/metrics.hpp"
#include "cvc3/models.hpp"
#include "cvc3/toyland.hpp"
#include "cvc3/training.hpp"

#ifndef CVC3_VERSION
#define CVC3_VERSION "0.0.0"
#endif

namespace cvc3::cli {

namespace fs = std::filesystem;

std::string tool_version() { return CVC3_VERSION; }

namespace {

constexpr const char* kSpectrogramExt = ".mel";

// ------------------------------------------------------------------ options

struct ModelOptions {
  std::string scale = "desk";
  std::string generator_spec;
  std::string discriminator_spec;
  std::string tfan_position;
  std::size_t tfan_depth = 0;  // 0 keeps the scale default

  GeneratorSpec generator() const {
    GeneratorSpec g;
    if (!generator_spec.empty()) {
      g = load_generator_spec(generator_spec);
    } else if (scale == "paper") {
      g = GeneratorSpec::paper_scale();
    } else if (scale == "toy") {
      g = toy_generator_spec();
    } else {
      g = GeneratorSpec::desk_scale();
    }
    if (!tfan_position.empty()) g.tfan_position = parse_tfan_position(tfan_position);
    if (tfan_depth != 0) g.tfan.depth = tfan_depth;
    g.validate();
    return g;
  }

  DiscriminatorSpec discriminator() const {
    if (!discriminator_spec.empty()) return load_discriminator_spec(discriminator_spec);
    if (scale == "paper") return DiscriminatorSpec::paper_scale();
    if (scale == "toy") return toy_discriminator_spec();
    return DiscriminatorSpec::desk_scale();
  }
};

void add_model_options(CLI::App* app, ModelOptions& o) {
  app->add_option("--scale", o.scale, "Architecture preset")
      ->check(CLI::IsMember({"desk", "paper", "toy"}))
      ->capture_default_str();
  app->add_option("--generator-spec", o.generator_spec, "Generator spec file (overrides --scale)");
  app->add_option("--discriminator-spec", o.discriminator_spec,
                  "Discriminator spec file (overrides --scale)");
  app->add_option("--tfan-position", o.tfan_position, "none | one_d_to_two_d | upsampling | both");
  app->add_option("--tfan-depth", o.tfan_depth, "TFAN trunk depth (0 = preset)")->capture_default_str();
}

void add_mel_options(CLI::App* app, MelConfig& m) {
  app->add_option("--sample-rate", m.sample_rate, "Analysis sample rate (Hz)")->capture_default_str();
  app->add_option("--window", m.window, "STFT window and FFT size")->capture_default_str();
  app->add_option("--hop", m.hop, "STFT hop")->capture_default_str();
  app->add_option("--mel-bins", m.mel_bins, "Mel filters")->capture_default_str();
  app->add_option("--fmin", m.fmin, "Lowest filter edge (Hz)")->capture_default_str();
  app->add_option("--fmax", m.fmax, "Highest filter edge (Hz, <= 0 for Nyquist)")->capture_default_str();
}

struct Options {
  MelConfig mel;
  ModelOptions model;

  // extract
  std::string wav_dir, out_dir, stats_out;
  // train
  std::string source_dir, target_dir, stats_source, stats_target, resume;
  TrainConfig train;
  std::uint64_t stop_at = 0;
  // convert
  std::string checkpoint, src_dir, direction = "xy";
  bool griffin_lim = false;
  std::size_t gl_iters = 32;
  // evaluate
  std::string converted_dir, manifest;
  // ablate / toy
  AblationConfig ablation;
  ToySpec toy;
  std::uint64_t toy_iterations = 2000;
  std::vector<std::uint64_t> toy_seeds{0, 1, 2};
  // plot
  std::vector<std::string> plot_files;
};

// ------------------------------------------------------------------ helpers

std::vector<fs::path> list_files(const std::string& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct NamedMel {
  std::string stem;
  MelSpectrogram mel;
};

std::vector<NamedMel> load_mel_dir(const std::string& dir) {
  std::vector<NamedMel> out;
  for (const auto& p : list_files(dir, kSpectrogramExt)) out.push_back({p.stem().string(), load_spectrogram(p.string())});
  if (out.empty()) throw DataError("no " + std::string(kSpectrogramExt) + " files in " + dir);
  return out;
}

std::vector<MelSpectrogram> mels(const std::vector<NamedMel>& v) {
  std::vector<MelSpectrogram> out;
  for (const auto& m : v) out.push_back(m.mel);
  return out;
}

std::string make_echo(const std::string& command, const CLI::App* sub) {
  std::string text = "# cvc3 " + tool_version() + " resolved configuration\n";
  text += "tool_version=\"" + tool_version() + "\"\n";
  text += "command=\"" + command + "\"\n";
  text += sub->config_to_str(true, false);
  return text;
}

void write_echo(const std::string& dir, const std::string& echo) {
  fs::create_directories(dir);
  write_text_atomic((fs::path(dir) / "run_config.ini").string(), echo);
}

void write_text(const fs::path& path, const std::string& text) { write_text_atomic(path.string(), text); }

// ------------------------------------------------------------------ commands

int cmd_extract(const Options& o, const std::string& echo, std::ostream& out, std::ostream& err) {
  const auto wavs = list_files(o.wav_dir, ".wav");
  if (wavs.empty()) throw DataError("no .wav files in " + o.wav_dir);
  fs::create_directories(o.out_dir);
  std::vector<MelSpectrogram> ok;
  std::vector<std::string> failures;
  for (const auto& w : wavs) {
    try {
      const MelSpectrogram m = log_mel(load_wav(w.string(), o.mel.sample_rate), o.mel);
      save_spectrogram((fs::path(o.out_dir) / (w.stem().string() + kSpectrogramExt)).string(), m);
      ok.push_back(m);
    } catch (const Error& e) {
      failures.push_back(w.string() + ": " + e.what());
    }
  }
  if (!o.stats_out.empty()) {
    if (ok.empty()) throw DataError("no utterance could be analysed; stats not written");
    save_stats(o.stats_out, compute_stats(ok), echo);
  }
  write_echo(o.out_dir, echo);
  out << "extracted " << ok.size() << " of " << wavs.size() << " files into " << o.out_dir << '\n';
  for (const auto& f : failures) err << "error: " << f << '\n';
  return failures.empty() ? kOk : kData;
}

int cmd_train(const Options& o, const std::string& echo, std::ostream& out) {
  TrainConfig cfg = o.train;
  cfg.generator = o.model.generator();
  cfg.discriminator = o.model.discriminator();
  cfg.validate();
  const auto xs = load_mel_dir(o.source_dir);
  const auto ys = load_mel_dir(o.target_dir);
  const FeatureStats sx = o.stats_source.empty() ? compute_stats(mels(xs)) : load_stats(o.stats_source);
  const FeatureStats sy = o.stats_target.empty() ? compute_stats(mels(ys)) : load_stats(o.stats_target);
  if (sx.mel_bins() != cfg.generator.input_bins || sy.mel_bins() != cfg.generator.input_bins) {
    throw DataError("feature stats have " + std::to_string(sx.mel_bins()) + "/" +
                    std::to_string(sy.mel_bins()) + " bins; the generator expects " +
                    std::to_string(cfg.generator.input_bins));
  }
  const auto cx = prepare_corpus(mels(xs), sx, cfg.segment_frames);
  const auto cy = prepare_corpus(mels(ys), sy, cfg.segment_frames);

  TrainState state(cfg);
  FitOptions opt;
  opt.out_dir = o.out_dir;
  opt.resume_from = o.resume;
  if (o.stop_at > 0) opt.stop_at = o.stop_at;
  opt.stats_x = sx;
  opt.stats_y = sy;
  write_echo(o.out_dir, echo);
  const FitResult r = fit(state, cx, cy, opt);
  out << "trained to iteration " << state.iteration << "; last checkpoint " << r.last_checkpoint << '\n';
  if (!r.losses.empty()) out << "last losses: " << r.losses.back().csv_row(state.iteration - 1) << '\n';
  return kOk;
}

int cmd_convert(const Options& o, const std::string& echo, std::ostream& out) {
  TrainState state = load_checkpoint(o.checkpoint);
  if (!o.model.generator_spec.empty() && !(load_generator_spec(o.model.generator_spec) == state.config.generator)) {
    throw SpecMismatchError(o.checkpoint + ": generator spec differs from " + o.model.generator_spec);
  }
  const bool xy = o.direction == "xy";
  const Generator& g = xy ? state.g_xy : state.g_yx;
  std::optional<FeatureStats> in_stats = xy ? state.stats_x : state.stats_y;
  std::optional<FeatureStats> out_stats = xy ? state.stats_y : state.stats_x;
  if (!o.stats_source.empty()) in_stats = load_stats(o.stats_source);
  if (!o.stats_target.empty()) out_stats = load_stats(o.stats_target);
  if (!in_stats || !out_stats) {
    throw DataError("missing feature stats: the checkpoint stores none; pass --stats-source and --stats-target");
  }
  const auto inputs = load_mel_dir(o.src_dir);
  fs::create_directories(o.out_dir);
  NoGradGuard no_grad;
  for (const auto& [stem, m] : inputs) {
    const std::size_t t = m.frames();
    const std::size_t padded = (t + 3) / 4 * 4;
    const MelSpectrogram norm = apply_norm(reflect_pad_frames(m, padded), *in_stats);
    MelSpectrogram conv = norm;
    conv.data = to_matrix(g.forward(to_tensor(norm.data))).leftCols(static_cast<Eigen::Index>(t));
    conv = apply_denorm(conv, *out_stats);
    save_spectrogram((fs::path(o.out_dir) / (stem + kSpectrogramExt)).string(), conv);
    if (o.griffin_lim) {
      MelConfig mc = o.mel;
      mc.sample_rate = conv.sample_rate;
      mc.hop = conv.hop;
      mc.window = conv.window;
      mc.mel_bins = conv.mel_bins();
      write_wav((fs::path(o.out_dir) / (stem + ".approx-griffinlim.wav")).string(),
                griffin_lim(conv, o.gl_iters, mc));
    }
  }
  write_echo(o.out_dir, echo);
  out << "converted " << inputs.size() << " files (" << o.direction << ") into " << o.out_dir << '\n';
  return kOk;
}

int cmd_evaluate(const Options& o, const std::string& echo, std::ostream& out, std::ostream& err) {
  EvalReport report = evaluate_pair(o.target_dir, o.converted_dir, o.manifest);
  report.config_echo = echo;
  fs::create_directories(o.out_dir);
  write_text(fs::path(o.out_dir) / "report.csv", report.to_csv());
  write_echo(o.out_dir, echo);
  out << report.to_text();
  for (const auto& f : report.failures) err << "error: " << f << '\n';
  return report.failures.empty() ? kOk : kData;
}

int cmd_ablate(const Options& o, const std::string& echo, std::ostream& out) {
  AblationConfig cfg = o.ablation;
  cfg.toy = o.toy;
  const auto rows = run_ablation(cfg);
  const std::string csv = ablation_csv(rows);
  fs::create_directories(o.out_dir);
  write_text(fs::path(o.out_dir) / "ablation.csv", csv);
  write_echo(o.out_dir, echo);
  out << csv;
  for (const auto& r : rows) {
    if (!std::isfinite(r.mcd_db) || !std::isfinite(r.msd_db)) {
      throw NumericError("non-finite score for depth " + std::to_string(r.depth) + ", " + to_string(r.position));
    }
  }
  return kOk;
}

int cmd_plot(const Options& o, const std::string& echo, std::ostream& out) {
  std::vector<MelSpectrogram> ms;
  fs::create_directories(o.out_dir);
  for (const auto& f : o.plot_files) {
    ms.push_back(load_spectrogram(f));
    write_text(fs::path(o.out_dir) / (fs::path(f).stem().string() + ".csv"), matrix_csv(ms.back().data));
  }
  write_text(fs::path(o.out_dir) / "spectrograms.ppm", render_ppm(ms));
  write_echo(o.out_dir, echo);
  out << "plotted " << ms.size() << " spectrogram(s) into " << o.out_dir << '\n';
  return kOk;
}

int cmd_toy_corpus(const Options& o, const std::string& echo, std::ostream& out) {
  const ToyCorpus c = generate_toy_corpus(o.toy);
  const fs::path root(o.out_dir);
  for (const char* d : {"domain_a", "domain_b", "heldout_a", "heldout_b"}) fs::create_directories(root / d);
  char name[32];
  for (std::size_t i = 0; i < c.domain_a.size(); ++i) {
    std::snprintf(name, sizeof name, "a_%03zu.mel", i);
    save_spectrogram((root / "domain_a" / name).string(), c.domain_a[i].mel);
  }
  for (std::size_t i = 0; i < c.domain_b.size(); ++i) {
    std::snprintf(name, sizeof name, "b_%03zu.mel", i);
    save_spectrogram((root / "domain_b" / name).string(), c.domain_b[i].mel);
  }
  std::string manifest;
  for (std::size_t i = 0; i < c.oracle.size(); ++i) {
    std::snprintf(name, sizeof name, "h_%03zu.mel", i);
    save_spectrogram((root / "heldout_a" / name).string(), c.oracle[i].a.mel);
    save_spectrogram((root / "heldout_b" / name).string(), c.oracle[i].b.mel);
    manifest += std::string(name) + "\t" + name + "\n";
  }
  write_text(root / "manifest.tsv", manifest);
  write_echo(o.out_dir, echo);
  out << "wrote " << c.domain_a.size() << "+" << c.domain_b.size() << " training and " << c.oracle.size()
      << " held-out utterances into " << o.out_dir << '\n';
  return kOk;
}

int cmd_toy_experiment(const Options& o, const std::string& echo, std::ostream& out) {
  ToyExperimentConfig cfg;
  cfg.toy = o.toy;
  cfg.iterations = o.toy_iterations;
  cfg.seeds = o.toy_seeds;
  const ToyExperimentResult r = run_toy_experiment(cfg);
  fs::create_directories(o.out_dir);
  write_text(fs::path(o.out_dir) / "toy_experiment.csv", r.summary());
  write_echo(o.out_dir, echo);
  out << r.summary();
  return kOk;
}

void add_toy_options(CLI::App* app, ToySpec& t) {
  app->add_option("--toy-seed", t.seed, "Corpus seed")->capture_default_str();
  app->add_option("--toy-utterances", t.n_utterances, "Training utterances per domain")->capture_default_str();
  app->add_option("--toy-heldout", t.n_heldout, "Held-out oracle pairs")->capture_default_str();
  app->add_option("--toy-frames", t.utterance_frames, "Frames per utterance")->capture_default_str();
}

}  // namespace

// ------------------------------------------------------------------ plotting

std::string render_ppm(const std::vector<MelSpectrogram>& spectrograms) {
  if (spectrograms.empty()) throw DataError("nothing to plot");
  const std::size_t rows = spectrograms.front().mel_bins();
  constexpr std::size_t kGap = 4;
  std::size_t width = 0;
  for (const auto& m : spectrograms) {
    if (m.mel_bins() != rows) throw DataError("spectrograms to plot must share the mel-bin count");
    width += m.frames();
  }
  width += kGap * (spectrograms.size() - 1);
  // Viridis anchor colours.
  static const double anchors[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  std::string img = "P6\n" + std::to_string(width) + " " + std::to_string(rows) + "\n255\n";
  const std::size_t header = img.size();
  img.resize(header + width * rows * 3, static_cast<char>(255));
  std::size_t x0 = 0;
  for (const auto& m : spectrograms) {
    const double lo = m.data.minCoeff(), hi = m.data.maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;
    for (std::size_t q = 0; q < rows; ++q) {
      const std::size_t y = rows - 1 - q;
      for (std::size_t t = 0; t < m.frames(); ++t) {
        const double v = (m.data(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(t)) - lo) / span * 4.0;
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(v), 3);
        const double f = v - static_cast<double>(i);
        char* px = img.data() + header + (y * width + x0 + t) * 3;
        for (int k = 0; k < 3; ++k) {
          px[k] = static_cast<char>(std::lround(anchors[i][k] * (1 - f) + anchors[i + 1][k] * f));
        }
      }
    }
    x0 += m.frames() + kGap;
  }
  return img;
}

std::string matrix_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  return out;
}

Matrix parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) throw DataError("ragged matrix CSV");
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return m;
}

// ------------------------------------------------------------------ entry

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"CycleGAN voice conversion with time-frequency adaptive normalization", "cvc3"};
  app.set_version_flag("--version", tool_version());
  app.set_config("--config", "", "INI file with one [section] per subcommand");
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.require_subcommand(1);

  Options o;

  auto* extract = app.add_subcommand("extract", "WAV directory -> log-mel spectrogram files and feature stats");
  extract->add_option("--wav-dir", o.wav_dir, "Input directory of .wav files")->required();
  extract->add_option("--out-dir", o.out_dir, "Output directory for .mel files")->required();
  extract->add_option("--stats-out", o.stats_out, "Write normalization stats (training split only)");
  add_mel_options(extract, o.mel);

  auto* train = app.add_subcommand("train", "Train both conversion directions");
  train->add_option("--source-dir", o.source_dir, "Domain X spectrogram files")->required();
  train->add_option("--target-dir", o.target_dir, "Domain Y spectrogram files")->required();
  train->add_option("--stats-source", o.stats_source, "Domain X stats (default: computed)");
  train->add_option("--stats-target", o.stats_target, "Domain Y stats (default: computed)");
  train->add_option("--out-dir", o.out_dir, "Checkpoints and losses.csv")->required();
  train->add_option("--resume", o.resume, "Continue from this checkpoint");
  train->add_option("--stop-at", o.stop_at, "Stop early at this iteration (0 = run to the end)")->capture_default_str();
  train->add_option("--iterations", o.train.iterations, "Total iterations")->capture_default_str();
  train->add_option("--seed", o.train.seed, "Initialization and sampling seed")->capture_default_str();
  train->add_option("--checkpoint-every", o.train.checkpoint_every, "Checkpoint period")->capture_default_str();
  train->add_option("--segment-frames", o.train.segment_frames, "Training segment length")->capture_default_str();
  train->add_option("--lr-g", o.train.lr_g, "Generator learning rate")->capture_default_str();
  train->add_option("--lr-d", o.train.lr_d, "Discriminator learning rate")->capture_default_str();
  train->add_option("--beta1", o.train.beta1, "Adam beta1")->capture_default_str();
  train->add_option("--beta2", o.train.beta2, "Adam beta2")->capture_default_str();
  train->add_option("--lambda-cyc", o.train.weights.lambda_cyc, "Cycle-consistency weight")->capture_default_str();
  train->add_option("--lambda-id", o.train.weights.lambda_id, "Identity-mapping weight")->capture_default_str();
  train->add_option("--id-cutoff", o.train.weights.id_cutoff_iters, "Iterations with identity loss")
      ->capture_default_str();
  add_model_options(train, o.model);

  auto* convert = app.add_subcommand("convert", "Convert spectrogram files with a trained checkpoint");
  convert->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  convert->add_option("--src-dir", o.src_dir, "Input spectrogram files")->required();
  convert->add_option("--out-dir", o.out_dir, "Converted spectrogram files")->required();
  convert->add_option("--direction", o.direction, "xy (source->target) or yx")
      ->check(CLI::IsMember({"xy", "yx"}))
      ->capture_default_str();
  convert->add_option("--stats-source", o.stats_source, "Input-domain stats (default: from checkpoint)");
  convert->add_option("--stats-target", o.stats_target, "Output-domain stats (default: from checkpoint)");
  convert->add_option("--generator-spec", o.model.generator_spec, "Expected generator spec");
  convert->add_flag("--griffin-lim", o.griffin_lim, "Also write approximate Griffin-Lim audio");
  convert->add_option("--gl-iters", o.gl_iters, "Griffin-Lim iterations")->capture_default_str();

  auto* evaluate = app.add_subcommand("evaluate", "MCD/MSD of converted against target spectrograms");
  evaluate->add_option("--target-dir", o.target_dir, "Reference files")->required();
  evaluate->add_option("--converted-dir", o.converted_dir, "Converted files")->required();
  evaluate->add_option("--manifest", o.manifest, "converted<TAB>target per line")->required();
  evaluate->add_option("--out-dir", o.out_dir, "report.csv destination")->required();

  auto* ablate = app.add_subcommand("ablate", "TFAN depth x position table on the toy task");
  ablate->add_option("--out-dir", o.out_dir, "ablation.csv destination")->required();
  ablate->add_option("--iterations", o.ablation.iterations, "Training iterations per configuration")
      ->capture_default_str();
  ablate->add_option("--seed", o.ablation.seed, "Model seed")->capture_default_str();
  add_toy_options(ablate, o.toy);

  auto* plot = app.add_subcommand("plot", "Heatmap image and CSV dumps of spectrogram files");
  plot->add_option("files", o.plot_files, "Spectrogram files")->required();
  plot->add_option("--out-dir", o.out_dir, "Output directory")->required();

  auto* toy_corpus = app.add_subcommand("toy-corpus", "Write the synthetic two-domain corpus");
  toy_corpus->add_option("--out-dir", o.out_dir, "Output directory")->required();
  add_toy_options(toy_corpus, o.toy);

  auto* toy_exp = app.add_subcommand("toy-experiment", "TFAN vs no-TFAN conversion on the toy corpus");
  toy_exp->add_option("--out-dir", o.out_dir, "Output directory")->required();
  toy_exp->add_option("--iterations", o.toy_iterations, "Iterations per model")->capture_default_str();
  toy_exp->add_option("--seeds", o.toy_seeds, "Model seeds")->capture_default_str();
  add_toy_options(toy_exp, o.toy);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o_out, o_err;
    const int code = app.exit(e, o_out, o_err);
    out << o_out.str();
    err << o_err.str();
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  const std::string echo = make_echo(name, sub);
  try {
    if (name == "extract") return cmd_extract(o, echo, out, err);
    if (name == "train") return cmd_train(o, echo, out);
    if (name == "convert") return cmd_convert(o, echo, out);
    if (name == "evaluate") return cmd_evaluate(o, echo, out, err);
    if (name == "ablate") return cmd_ablate(o, echo, out);
    if (name == "plot") return cmd_plot(o, echo, out);
    if (name == "toy-corpus") return cmd_toy_corpus(o, echo, out);
    if (name == "toy-experiment") return cmd_toy_experiment(o, echo, out);
    err << "error: unknown command " << name << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const SpecMismatchError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("cvc3");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace cvc3::cli
