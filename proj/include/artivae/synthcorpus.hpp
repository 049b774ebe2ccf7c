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

#ifndef ARTIVAE_SYNTHCORPUS_HPP_
#define ARTIVAE_SYNTHCORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "artivae/articulatory.hpp"
#include "artivae/features.hpp"
#include "artivae/matrix.hpp"
#include "artivae/rng.hpp"

namespace artivae {

struct SynthConfig {
  std::size_t n_utterances = 50;
  std::size_t frames_per_utterance = 100;
  std::size_t n_params = 6;  // 6 or 7 (with velum)
  std::size_t source_dims = 2;
  std::uint64_t seed = 0;
  double nonlinearity_scale = 1.0;
  double coil_noise_sigma = 0.05;     // in standardized coil units
  double cepstra_noise_sigma = 0.01;  // observation noise on features
  bool with_audio = true;
};

// Seeded one-hidden-layer random network mapping [a; source] to the 18
// cepstral coefficients.
struct SpectralNet {
  Matrix w_hidden;  // 64 x (n_params + source_dims)
  std::vector<double> b_hidden;
  Matrix w_out;  // 18 x 64
  std::vector<double> b_out;
};

struct GroundTruth {
  Matrix ema_mixing;             // dims x n_params, orthogonal columns
  std::vector<double> ema_mean;  // dims
  SpectralNet spectral;
};

struct SynthUtterance {
  Matrix a_true;   // frames x n_params, standardized corpus-wide
  Matrix source;   // frames x source_dims
  std::vector<EmaFrame> ema;
  std::vector<CepstralFrame> cepstra_gen;
  AudioSignal audio;                    // quantized to the 16-bit grid
  std::vector<CepstralFrame> features;  // bark_cepstrum(audio)
};

struct SynthCorpus {
  SynthConfig config;
  CoilLayout layout;
  GroundTruth truth;
  std::vector<SynthUtterance> utterances;
  AudioSignal babble;  // unit RMS, longer than any utterance
};

// Standardized articulatory and source trajectories for the whole corpus:
// critically damped second-order responses to random targets drawn every
// 150 ms, sampled at 100 Hz.
struct Trajectories {
  std::vector<Matrix> a;       // per utterance, frames x n_params
  std::vector<Matrix> source;  // per utterance, frames x source_dims
};
Trajectories gen_trajectories(const SynthConfig& config);

GroundTruth make_ground_truth(const SynthConfig& config);

// y(t) = M a(t) + mean + coil noise; frame times follow the analysis-window
// centers of the companion audio (0.01 t + 0.01).
std::vector<EmaFrame> gen_ema(const GroundTruth& truth, const Matrix& a_true,
                              double noise_sigma, RngStream& rng);

// x(t) = spectral net([a(t); source(t)]) + observation noise.
std::vector<CepstralFrame> gen_cepstra(const GroundTruth& truth,
                                       const Matrix& a_true,
                                       const Matrix& source,
                                       double noise_sigma, RngStream& rng);

// Random-phase overlap-add synthesis of the per-frame spectral envelopes;
// output peak-normalized to 0.3 and quantized to the 16-bit grid so the
// in-memory signal equals what a WAV round trip yields.
AudioSignal synthesize_audio(const std::vector<CepstralFrame>& cepstra,
                             std::uint32_t sample_rate_hz, RngStream& rng);

// Sum of six independent speech-shaped tracks, normalized to unit RMS.
AudioSignal gen_babble(const SynthConfig& config, std::size_t min_samples);

SynthCorpus generate_corpus(const SynthConfig& config);

// On-disk corpus: per-utterance EMA CSV, feature file, WAV and ground-truth
// parameter CSV, one babble WAV, and manifest.json tying them together.
// Returns the manifest path.
std::string write_corpus(const SynthCorpus& corpus, const std::string& dir);

struct LoadedCorpus {
  CoilLayout layout;
  std::uint64_t seed = 0;
  std::size_t n_utterances = 0;
  std::vector<std::vector<EmaFrame>> ema;
  std::vector<std::vector<CepstralFrame>> features;
  std::vector<std::string> wav_paths;
  std::string babble_path;
  std::uint64_t manifest_hash = 0;  // FNV-1a of the manifest bytes
};
LoadedCorpus load_corpus(const std::string& dir);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace artivae

#endif  // ARTIVAE_SYNTHCORPUS_HPP_
