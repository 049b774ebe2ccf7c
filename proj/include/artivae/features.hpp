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

#ifndef ARTIVAE_FEATURES_HPP_
#define ARTIVAE_FEATURES_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "artivae/articulatory.hpp"
#include "artivae/matrix.hpp"
#include "artivae/rng.hpp"

namespace artivae {

inline constexpr std::size_t kNumCepstra = 18;

struct AudioSignal {
  std::vector<double> samples;  // nominal range [-1, 1]
  std::uint32_t sample_rate_hz = 16000;
};

// 18 Bark-scale cepstral coefficients for one 20 ms analysis frame.
struct CepstralFrame {
  std::array<double, kNumCepstra> coeffs{};
  double time_s = 0.0;  // frame-center time
};

// One aligned observation: acoustic features, the articulatory vector for
// the same instant, and optionally the noisy-feature counterpart used by the
// denoising task.
struct ParallelFrame {
  CepstralFrame x;
  ArticulatoryVector a;
  std::optional<CepstralFrame> x_noisy;
};

struct AlignResult {
  std::vector<ParallelFrame> frames;
  std::size_t dropped = 0;
};

// Traunmueller approximation of the Bark scale.
double hz_to_bark(double hz);
double bark_to_hz(double bark);

// Orthonormal DCT-II and its inverse (DCT-III); arbitrary length.
std::vector<double> dct_ortho(std::span<const double> x);
std::vector<double> idct_ortho(std::span<const double> x);

// Fixed analysis configuration for one sample rate: 20 ms periodic Hann
// window, 10 ms hop, power-of-two FFT, 18 triangular bands with edges
// uniform on the Bark scale from 0 to Nyquist.
struct BarkAnalyzer {
  std::uint32_t sample_rate_hz = 0;
  std::size_t win = 0;
  std::size_t hop = 0;
  std::size_t nfft = 0;
  std::vector<double> window;
  Matrix filterbank;  // kNumCepstra x (nfft/2 + 1)
};
BarkAnalyzer make_bark_analyzer(std::uint32_t sample_rate_hz);

// Log band energies (floored at 1e-10 before the log) for one windowed
// frame starting at `start`; building block of bark_cepstrum and of the
// band-domain tests.
std::vector<double> log_band_energies(const BarkAnalyzer& an,
                                      std::span<const double> samples,
                                      std::size_t start);

// 100 Hz cepstral analysis of an utterance. Frame count is
// (len - win) / hop + 1; audio shorter than one window is an error.
std::vector<CepstralFrame> bark_cepstrum(const AudioSignal& audio);

// Per-bin amplitude envelope reconstructed from one cepstral vector, used by
// the synthetic-audio generator. Bins outside filterbank coverage take the
// nearest covered value.
std::vector<double> spectral_envelope(const BarkAnalyzer& an,
                                      std::span<const double> coeffs);

// clean + g * noise[offset : offset+len], with g chosen so the clean-to-
// scaled-noise power ratio equals snr_db exactly. Sample rates must match
// and both signals must be non-silent.
AudioSignal mix_at_snr(const AudioSignal& clean, const AudioSignal& noise,
                       double snr_db, std::size_t noise_offset);
// Uniformly random admissible crop offset.
std::size_t draw_noise_offset(RngStream& rng, std::size_t clean_len,
                              std::size_t noise_len);

// Pairs streams by index, truncating to the shortest; `dropped` counts the
// frames discarded from the longer streams.
AlignResult align(const std::vector<CepstralFrame>& cepstra,
                  const std::vector<ArticulatoryVector>& artic,
                  const std::vector<CepstralFrame>* noisy = nullptr);

// Feature files: CSV with header c0..c17,time_s, or the binary
// "artivae-feat-v1" layout (16-byte magic, u32 dims, u64 count, little-
// endian f64 records of 18 coefficients followed by the frame time).
void write_features_csv(const std::string& path,
                        const std::vector<CepstralFrame>& frames);
std::vector<CepstralFrame> read_features_csv(const std::string& path);
void write_features_bin(const std::string& path,
                        const std::vector<CepstralFrame>& frames);
std::vector<CepstralFrame> read_features_bin(const std::string& path);
// Dispatch on the ".csv" extension, binary otherwise.
void write_features(const std::string& path,
                    const std::vector<CepstralFrame>& frames);
std::vector<CepstralFrame> read_features(const std::string& path);

}  // namespace artivae

#endif  // ARTIVAE_FEATURES_HPP_
