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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "artivae/experiments.hpp"
#include "artivae/synthcorpus.hpp"

using namespace artivae;
namespace fs = std::filesystem;

namespace {

// Mini corpus shared by the tests in this file; just enough frames to train.
const LoadedCorpus& mini_corpus() {
  static const LoadedCorpus corpus = [] {
    SynthConfig config;
    config.n_utterances = 16;
    config.frames_per_utterance = 40;
    config.seed = 404;
    const auto dir = fs::temp_directory_path() / "artivae_exp_corpus";
    fs::remove_all(dir);
    write_corpus(generate_corpus(config), dir.string());
    return load_corpus(dir.string());
  }();
  return corpus;
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

ConvergenceConfig mini_convergence() {
  ConvergenceConfig config;
  config.alphas = {0.0, 1.0};
  config.n_seeds = 2;
  config.epochs = 4;
  config.base_seed = 50;
  return config;
}

DenoisingConfig mini_denoising() {
  DenoisingConfig config;
  config.snrs = {std::nullopt, 0.0};
  config.n_seeds = 2;
  config.epochs = 4;
  config.base_seed = 50;
  return config;
}

}  // namespace

TEST_CASE("run_convergence: structure, fit, determinism") {
  ConvergenceConfig config = mini_convergence();
  config.alphas = {0.0};
  config.n_seeds = 1;
  const ConvergenceReport report = run_convergence(mini_corpus(), config);
  REQUIRE(report.per_alpha.size() == 1);
  CHECK(report.per_alpha[0].curves.size() == 1);
  CHECK(report.per_alpha[0].curves[0].size() == 4);
  CHECK(report.per_alpha[0].fit.rate >= 0.0);
  CHECK(report.per_alpha[0].final_mean ==
        report.per_alpha[0].curves[0].back());

  const ConvergenceReport again = run_convergence(mini_corpus(), config);
  CHECK(report.per_alpha[0].curves[0] == again.per_alpha[0].curves[0]);
}

TEST_CASE("run_convergence: per-seed curves differ, paired counts bounded") {
  const ConvergenceReport report =
      run_convergence(mini_corpus(), mini_convergence());
  REQUIRE(report.per_alpha.size() == 2);
  CHECK(report.per_alpha[0].alpha == 0.0);
  CHECK(report.per_alpha[1].alpha == 1.0);
  CHECK(report.per_alpha[0].curves[0] != report.per_alpha[0].curves[1]);
  CHECK(report.seeds_favoring_regularized_epoch10 <= 2);
  CHECK(report.seeds_favoring_regularized_final <= 2);

  // Mean curve really is the mean over seeds.
  for (std::size_t e = 0; e < 4; ++e) {
    const double expected = 0.5 * (report.per_alpha[0].curves[0][e] +
                                   report.per_alpha[0].curves[1][e]);
    CHECK(report.per_alpha[0].mean_curve[e] ==
          doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("run_denoising: clean condition equals the convergence code path") {
  ConvergenceConfig conv = mini_convergence();
  conv.alphas = {0.0};
  conv.n_seeds = 1;
  const ConvergenceReport conv_report = run_convergence(mini_corpus(), conv);

  DenoisingConfig den = mini_denoising();
  den.snrs = {std::nullopt};
  den.n_seeds = 1;
  const DenoisingReport den_report = run_denoising(mini_corpus(), den);

  CHECK(den_report.cells[0][0].curves[0] == conv_report.per_alpha[0].curves[0]);
}

TEST_CASE("run_denoising: structure and curve bookkeeping") {
  const DenoisingReport report = run_denoising(mini_corpus(), mini_denoising());
  REQUIRE(report.cells.size() == 2);
  for (const auto& pair : report.cells)
    for (const auto& cell : pair) {
      CHECK(cell.curves.size() == 2);
      for (const auto& curve : cell.curves) CHECK(curve.size() == 4);
      CHECK(cell.finals.size() == 2);
    }
  CHECK(report.seeds_favoring_regularized.size() == 2);

  // Noisy-condition inputs genuinely differ from the clean ones.
  CHECK(report.cells[1][0].curves[0] != report.cells[0][0].curves[0]);
}

TEST_CASE("emit_report: file invariants and byte determinism") {
  const ConvergenceConfig config = mini_convergence();
  const ConvergenceReport report = run_convergence(mini_corpus(), config);

  const auto dir1 = fs::temp_directory_path() / "artivae_exp_out1";
  const auto dir2 = fs::temp_directory_path() / "artivae_exp_out2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  emit_report(report, dir1.string());
  emit_report(run_convergence(mini_corpus(), config), dir2.string());

  // curves.csv row count: |alphas| * n_seeds * epochs + header.
  const std::string curves = slurp(dir1 / "curves.csv");
  const std::size_t rows = std::count(curves.begin(), curves.end(), '\n');
  CHECK(rows == 2 * 2 * 4 + 1);

  CHECK(slurp(dir1 / "curves.csv") == slurp(dir2 / "curves.csv"));
  CHECK(slurp(dir1 / "summary.json") == slurp(dir2 / "summary.json"));
  CHECK(slurp(dir1 / "fig_curves.csv") == slurp(dir2 / "fig_curves.csv"));
  CHECK(fs::exists(dir1 / "config.json"));
  CHECK(fs::exists(dir1 / "README.md"));

  // summary.json round trip reproduces the aggregates exactly.
  const auto summary = nlohmann::json::parse(slurp(dir1 / "summary.json"));
  for (std::size_t a = 0; a < report.per_alpha.size(); ++a) {
    const auto& entry = summary.at("per_alpha").at(a);
    CHECK(std::abs(entry.at("final_mean_mse").get<double>() -
                   report.per_alpha[a].final_mean) < 1e-12);
    CHECK(std::abs(entry.at("final_std_mse").get<double>() -
                   report.per_alpha[a].final_std) < 1e-12);
    CHECK(std::abs(entry.at("exp_fit").at("rate").get<double>() -
                   report.per_alpha[a].fit.rate) < 1e-12);
  }
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("emit_report: denoising layout") {
  const DenoisingReport report = run_denoising(mini_corpus(), mini_denoising());
  const auto dir = fs::temp_directory_path() / "artivae_exp_out3";
  fs::remove_all(dir);
  emit_report(report, dir.string());

  const std::string curves = slurp(dir / "curves.csv");
  const std::size_t rows = std::count(curves.begin(), curves.end(), '\n');
  CHECK(rows == 2 * 2 * 2 * 4 + 1);  // snr x model x seed x epoch
  CHECK(curves.find("clean,vae,") != std::string::npos);
  CHECK(curves.find("0,ar-vae,") != std::string::npos);

  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary.at("conditions").size() == 2);
  CHECK(summary.at("conditions").at(0).at("snr").get<std::string>() == "clean");
  fs::remove_all(dir);
}

TEST_CASE("reports track the corpus seed through the manifest hash") {
  SynthConfig config;
  config.n_utterances = 12;
  config.frames_per_utterance = 40;
  config.seed = 11;
  const auto dir_a = fs::temp_directory_path() / "artivae_exp_hash_a";
  const auto dir_b = fs::temp_directory_path() / "artivae_exp_hash_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  write_corpus(generate_corpus(config), dir_a.string());
  config.seed = 12;
  write_corpus(generate_corpus(config), dir_b.string());

  const LoadedCorpus a = load_corpus(dir_a.string());
  const LoadedCorpus b = load_corpus(dir_b.string());
  CHECK(a.manifest_hash != b.manifest_hash);

  ConvergenceConfig cc = mini_convergence();
  cc.alphas = {0.0};
  cc.n_seeds = 1;
  cc.epochs = 1;
  const ConvergenceReport ra = run_convergence(a, cc);
  const ConvergenceReport rb = run_convergence(b, cc);
  CHECK(ra.corpus_hash != rb.corpus_hash);
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("experiment results do not depend on the thread cap") {
  const ConvergenceConfig config = mini_convergence();
  setenv("ARTIVAE_THREADS", "2", 1);
  const ConvergenceReport threaded = run_convergence(mini_corpus(), config);
  unsetenv("ARTIVAE_THREADS");
  const ConvergenceReport serial = run_convergence(mini_corpus(), config);
  for (std::size_t a = 0; a < serial.per_alpha.size(); ++a)
    for (std::size_t s = 0; s < serial.per_alpha[a].curves.size(); ++s)
      CHECK(serial.per_alpha[a].curves[s] == threaded.per_alpha[a].curves[s]);
}
