// Copyright 2026 The Artivae Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// artivae: corpus generation, articulatory-model fitting, feature
// extraction, VAE training and the convergence/denoising experiments behind
// a single binary.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "artivae/arvae.hpp"
#include "artivae/articulatory.hpp"
#include "artivae/experiments.hpp"
#include "artivae/features.hpp"
#include "artivae/synthcorpus.hpp"
#include "artivae/version.hpp"
#include "artivae/wav.hpp"

namespace {

namespace fs = std::filesystem;
using namespace artivae;

bool g_quiet = false;

void info(const std::string& message) {
  if (!g_quiet) std::cerr << "artivae: " << message << "\n";
}

std::string version_banner() {
  std::ostringstream out;
  out << "artivae " << kToolVersion << "\n"
      << "formats: " << kFormatGpca << " " << kFormatFeat << " " << kFormatVae
      << "\n";
  return out.str();
}

std::vector<std::optional<double>> parse_snrs(
    const std::vector<std::string>& tokens) {
  std::vector<std::optional<double>> snrs;
  for (const auto& token : tokens) {
    if (token == "clean" || token == "none") {
      snrs.push_back(std::nullopt);
    } else {
      try {
        snrs.push_back(std::stod(token));
      } catch (const std::exception&) {
        throw CLI::ValidationError("--snrs",
                                   "expected 'clean' or a dB value, got '" +
                                       token + "'");
      }
    }
  }
  return snrs;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Articulatory-regularized VAE experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", version_banner());
  app.set_config("--config", "", "Key-value config file with CLI defaults");
  app.add_flag("--quiet", g_quiet, "Suppress progress messages");

  // gen-corpus -------------------------------------------------------------
  auto* gen = app.add_subcommand("gen-corpus",
                                 "Generate a seeded synthetic parallel corpus");
  SynthConfig synth_config;
  std::string gen_out;
  bool gen_no_audio = false;
  gen->add_option("--out", gen_out, "Output corpus directory")->required();
  gen->add_option("--utterances", synth_config.n_utterances,
                  "Number of utterances");
  gen->add_option("--frames", synth_config.frames_per_utterance,
                  "Frames per utterance at 100 Hz");
  gen->add_option("--n-params", synth_config.n_params,
                  "Articulatory parameters (6 or 7)")
      ->check(CLI::IsMember({6, 7}));
  gen->add_option("--seed", synth_config.seed, "Corpus seed");
  gen->add_option("--coil-noise", synth_config.coil_noise_sigma,
                  "EMA coil noise sigma in standardized units");
  gen->add_option("--nonlinearity", synth_config.nonlinearity_scale,
                  "Hidden gain of the articulatory-to-spectral map");
  gen->add_flag("--no-audio", gen_no_audio,
                "Skip audio synthesis (EMA and features only)");
  gen->callback([&] {
    synth_config.with_audio = !gen_no_audio;
    info("generating corpus into " + gen_out);
    const SynthCorpus corpus = generate_corpus(synth_config);
    const std::string manifest = write_corpus(corpus, gen_out);
    std::cout << manifest << "\n";
  });

  // fit-artic --------------------------------------------------------------
  auto* fit = app.add_subcommand(
      "fit-artic", "Fit the guided-PCA articulatory model from EMA CSVs");
  std::vector<std::string> ema_paths;
  std::string model_out;
  fit->add_option("ema_csv", ema_paths, "EMA CSV files (concatenated)")
      ->required()
      ->expected(-1);
  fit->add_option("--out", model_out, "Output model JSON path")->required();
  fit->callback([&] {
    std::vector<EmaFrame> frames;
    CoilLayout layout;
    bool first = true;
    for (const auto& path : ema_paths) {
      EmaCsv csv = read_ema_csv(path);
      if (first) {
        layout = csv.layout;
        first = false;
      } else if (csv.layout.has_velum != layout.has_velum) {
        throw std::runtime_error("fit-artic: layouts differ between " +
                                 ema_paths.front() + " and " + path);
      }
      frames.insert(frames.end(), csv.frames.begin(), csv.frames.end());
    }
    info("fitting guided PCA on " + std::to_string(frames.size()) + " frames");
    const GuidedPcaModel model = fit_guided_pca(frames, layout);
    save_gpca_model(model_out, model);
    std::cout << model_out << "\n";
  });

  // features ---------------------------------------------------------------
  auto* feats = app.add_subcommand(
      "features", "Extract 18 Bark-scale cepstral coefficients from a WAV");
  std::string wav_in, feats_out;
  feats->add_option("wav", wav_in, "Input WAV (16-bit PCM mono)")->required();
  feats->add_option("--out", feats_out,
                    "Output feature file (.csv or binary)")
      ->required();
  feats->callback([&] {
    const AudioSignal audio = read_wav(wav_in);
    const auto frames = bark_cepstrum(audio);
    write_features(feats_out, frames);
    info("wrote " + std::to_string(frames.size()) + " frames");
    std::cout << feats_out << "\n";
  });

  // train ------------------------------------------------------------------
  auto* train_cmd = app.add_subcommand(
      "train", "Train one VAE/AR-VAE on a corpus and write a checkpoint");
  std::string train_corpus, train_out;
  TrainConfig train_config;
  double train_snr = 0.0;
  std::uint64_t train_mix_seed = 2026;
  train_cmd->add_option("--corpus", train_corpus, "Corpus directory")
      ->required();
  train_cmd->add_option("--out", train_out, "Output directory")->required();
  train_cmd->add_option("--alpha", train_config.alpha,
                        "Articulatory regularization weight");
  train_cmd->add_option("--seed", train_config.seed, "Training seed");
  train_cmd->add_option("--epochs", train_config.epochs, "Training epochs");
  train_cmd->add_option("--batch-size", train_config.batch_size, "Batch size");
  train_cmd->add_option("--lr", train_config.learning_rate, "Learning rate");
  train_cmd->add_option("--split", train_config.split_fraction,
                        "Training fraction of the 80/20-style split");
  auto* snr_opt = train_cmd->add_option(
      "--snr", train_snr,
      "Denoising mode: mix babble at this SNR (dB) and train to reconstruct "
      "clean features from the noisy ones");
  train_cmd->add_option("--mix-seed", train_mix_seed,
                        "Seed for the babble crop offsets");
  train_cmd->callback([&] {
    const LoadedCorpus corpus = load_corpus(train_corpus);
    train_config.denoising = snr_opt->count() > 0;
    const std::optional<double> snr =
        train_config.denoising ? std::optional<double>(train_snr)
                               : std::nullopt;
    const auto frames = corpus_parallel_frames(corpus, snr, train_mix_seed);
    info("training alpha=" + std::to_string(train_config.alpha) + " on " +
         std::to_string(frames.size()) + " frames");
    const TrainResult result = train(train_config, frames);

    fs::create_directories(train_out);
    Checkpoint ckpt;
    ckpt.params = result.params;
    ckpt.alpha = train_config.alpha;
    ckpt.seed = train_config.seed;
    ckpt.in_scaler = result.in_scaler;
    ckpt.target_scaler = result.target_scaler;
    ckpt.model_label = train_config.alpha == 0.0 ? "vae" : "ar-vae";
    const std::string ckpt_path = train_out + "/checkpoint_" +
                                  ckpt.model_label + "_seed" +
                                  std::to_string(train_config.seed) + ".json";
    save_checkpoint(ckpt_path, ckpt);

    const std::string curve_path = train_out + "/curve.csv";
    std::ostringstream curve;
    curve << "epoch,test_mse\n";
    char buf[32];
    for (std::size_t e = 0; e < result.curve.size(); ++e) {
      std::snprintf(buf, sizeof buf, "%.17g", result.curve[e]);
      curve << e << "," << buf << "\n";
    }
    std::ofstream f(curve_path, std::ios::trunc);
    if (!f) throw std::runtime_error("train: cannot open " + curve_path);
    f << curve.str();
    std::cout << ckpt_path << "\n";
  });

  // exp --------------------------------------------------------------------
  auto* exp = app.add_subcommand("exp", "Run a multi-seed experiment");
  exp->require_subcommand(1);
  exp->fallthrough();

  std::string exp_corpus, exp_out;
  std::size_t exp_seeds = 5;
  std::size_t exp_epochs = 30;
  std::uint64_t exp_base_seed = 1000;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--corpus", exp_corpus, "Corpus directory")->required();
    cmd->add_option("--out", exp_out, "Report output directory")->required();
    cmd->add_option("--seeds", exp_seeds, "Seeds per configuration");
    cmd->add_option("--epochs", exp_epochs, "Training epochs");
    cmd->add_option("--base-seed", exp_base_seed, "First training seed");
  };

  auto* conv = exp->add_subcommand(
      "convergence", "Learning-speed comparison across alpha values");
  std::vector<double> conv_alphas{0.0, 0.25, 1.0};
  add_common(conv);
  conv->add_option("--alphas", conv_alphas,
                   "Regularization weights to compare")
      ->delimiter(',');
  conv->callback([&] {
    const LoadedCorpus corpus = load_corpus(exp_corpus);
    ConvergenceConfig config;
    config.alphas = conv_alphas;
    config.n_seeds = exp_seeds;
    config.epochs = exp_epochs;
    config.base_seed = exp_base_seed;
    info("running convergence experiment");
    const ConvergenceReport report = run_convergence(corpus, config);
    emit_report(report, exp_out);
    std::cout << exp_out << "/summary.json\n";
  });

  auto* den = exp->add_subcommand(
      "denoising", "VAE vs AR-VAE on babble-noise denoising across SNRs");
  std::vector<std::string> den_snrs{"clean", "10", "5", "0"};
  double den_alpha = 1.0;
  std::uint64_t den_mix_seed = 2026;
  add_common(den);
  den->add_option("--snrs", den_snrs,
                  "SNR conditions ('clean' or dB values)")
      ->delimiter(',');
  den->add_option("--alpha", den_alpha, "AR-VAE regularization weight");
  den->add_option("--mix-seed", den_mix_seed,
                  "Seed for the babble crop offsets");
  den->callback([&] {
    const LoadedCorpus corpus = load_corpus(exp_corpus);
    DenoisingConfig config;
    config.snrs = parse_snrs(den_snrs);
    config.regularized_alpha = den_alpha;
    config.n_seeds = exp_seeds;
    config.epochs = exp_epochs;
    config.base_seed = exp_base_seed;
    config.mix_seed = den_mix_seed;
    info("running denoising experiment");
    const DenoisingReport report = run_denoising(corpus, config);
    emit_report(report, exp_out);
    std::cout << exp_out << "/summary.json\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "artivae: error: " << e.what() << "\n";
    return 1;
  }
}
