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

#ifndef ARTIVAE_EXPERIMENTS_HPP_
#define ARTIVAE_EXPERIMENTS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "artivae/arvae.hpp"
#include "artivae/features.hpp"
#include "artivae/numerics.hpp"
#include "artivae/synthcorpus.hpp"

namespace artivae {

// Number of training jobs run concurrently; reads ARTIVAE_THREADS and
// defaults to 1. Results are identical for any value because jobs are
// independent and the reports are assembled in configuration order.
std::size_t experiment_threads();

// Builds the aligned (x, a, x_noisy) frame stream for one corpus condition:
// the articulatory model is fitted on the corpus EMA, clean features come
// from the corpus feature files, and for a noisy condition each utterance's
// audio is mixed with a babble crop (offset seeded per utterance from
// mix_seed, shared across SNRs) before re-analysis.
std::vector<ParallelFrame> corpus_parallel_frames(
    const LoadedCorpus& corpus, std::optional<double> snr_db,
    std::uint64_t mix_seed);

struct ConvergenceConfig {
  std::vector<double> alphas{0.0, 0.25, 1.0};
  std::size_t n_seeds = 5;
  std::size_t epochs = 30;
  std::uint64_t base_seed = 1000;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
};

struct AlphaSummary {
  double alpha = 0.0;
  std::vector<std::vector<double>> curves;  // n_seeds x epochs
  std::vector<double> mean_curve;
  ExpFit fit;  // of the mean curve over epoch indices
  double final_mean = 0.0;
  double final_std = 0.0;
};

struct ConvergenceReport {
  ConvergenceConfig config;
  std::uint64_t corpus_hash = 0;
  std::vector<AlphaSummary> per_alpha;  // ascending alpha
  // Paired comparisons against alpha = 0 (same seed, same split/init/eps):
  // seeds where some alpha > 0 is strictly better.
  std::size_t seeds_favoring_regularized_epoch10 = 0;
  std::size_t seeds_favoring_regularized_final = 0;
};

ConvergenceReport run_convergence(const LoadedCorpus& corpus,
                                  const ConvergenceConfig& config);

struct DenoisingConfig {
  // nullopt is the no-noise condition.
  std::vector<std::optional<double>> snrs{std::nullopt, 10.0, 5.0, 0.0};
  double regularized_alpha = 1.0;
  std::size_t n_seeds = 5;
  std::size_t epochs = 30;
  std::uint64_t base_seed = 1000;
  std::uint64_t mix_seed = 2026;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
};

struct DenoisingCell {
  std::vector<std::vector<double>> curves;  // n_seeds x epochs
  std::vector<double> finals;
  double final_mean = 0.0;
  double final_std = 0.0;
};

struct DenoisingReport {
  DenoisingConfig config;
  std::uint64_t corpus_hash = 0;
  // cells[snr][0] is the plain VAE (alpha 0), cells[snr][1] the regularized
  // model; paired per seed.
  std::vector<std::array<DenoisingCell, 2>> cells;
  std::vector<std::size_t> seeds_favoring_regularized;  // per snr
};

DenoisingReport run_denoising(const LoadedCorpus& corpus,
                              const DenoisingConfig& config);

// Writes curves.csv, summary.json, config.json, the per-figure CSVs and a
// README describing the layout.
void emit_report(const ConvergenceReport& report, const std::string& out_dir);
void emit_report(const DenoisingReport& report, const std::string& out_dir);

std::string snr_label(const std::optional<double>& snr_db);

}  // namespace artivae

#endif  // ARTIVAE_EXPERIMENTS_HPP_
