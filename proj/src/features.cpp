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

#include "artivae/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "artivae/fft.hpp"

namespace artivae {

namespace {

constexpr double kEnergyFloor = 1e-10;

}  // namespace

double hz_to_bark(double hz) { return 26.81 * hz / (1960.0 + hz) - 0.53; }

double bark_to_hz(double bark) {
  return 1960.0 * (bark + 0.53) / (26.28 - bark);
}

std::vector<double> dct_ortho(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  const double base = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += x[i] * std::cos(M_PI * (2.0 * i + 1.0) * k / (2.0 * n));
    out[k] = acc * (k == 0 ? base / std::sqrt(2.0) : base);
  }
  return out;
}

std::vector<double> idct_ortho(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  const double base = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double acc = x[0] * base / std::sqrt(2.0);
    for (std::size_t k = 1; k < n; ++k)
      acc += x[k] * base * std::cos(M_PI * (2.0 * i + 1.0) * k / (2.0 * n));
    out[i] = acc;
  }
  return out;
}

BarkAnalyzer make_bark_analyzer(std::uint32_t sample_rate_hz) {
  if (sample_rate_hz == 0)
    throw std::runtime_error("make_bark_analyzer: non-positive sample rate");
  BarkAnalyzer an;
  an.sample_rate_hz = sample_rate_hz;
  an.win = static_cast<std::size_t>(std::lround(0.020 * sample_rate_hz));
  an.hop = static_cast<std::size_t>(std::lround(0.010 * sample_rate_hz));
  if (an.win < 2 || an.hop < 1)
    throw std::runtime_error("make_bark_analyzer: sample rate too low");
  an.nfft = next_pow2(an.win);

  // Periodic Hann: sums to one at 50% overlap, which the overlap-add
  // synthesizer in the corpus generator relies on.
  an.window.resize(an.win);
  for (std::size_t i = 0; i < an.win; ++i)
    an.window[i] =
        0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / an.win);

  const std::size_t bins = an.nfft / 2 + 1;
  const double bark_lo = hz_to_bark(0.0);
  const double bark_hi = hz_to_bark(sample_rate_hz / 2.0);
  const double spacing = (bark_hi - bark_lo) / (kNumCepstra + 1);

  an.filterbank = Matrix(kNumCepstra, bins);
  for (std::size_t b = 0; b < kNumCepstra; ++b) {
    const double center = bark_lo + spacing * (b + 1);
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate_hz / an.nfft;
      const double w = 1.0 - std::abs(hz_to_bark(f) - center) / spacing;
      an.filterbank(b, k) = std::max(0.0, w);
    }
  }

  return an;
}

std::vector<double> log_band_energies(const BarkAnalyzer& an,
                                      std::span<const double> samples,
                                      std::size_t start) {
  std::vector<std::complex<double>> buf(an.nfft, 0.0);
  for (std::size_t i = 0; i < an.win; ++i)
    buf[i] = samples[start + i] * an.window[i];
  fft_inplace(buf, false);

  const std::size_t bins = an.nfft / 2 + 1;
  std::vector<double> energies(kNumCepstra, 0.0);
  for (std::size_t k = 0; k < bins; ++k) {
    const double p = std::norm(buf[k]);
    for (std::size_t b = 0; b < kNumCepstra; ++b) {
      const double w = an.filterbank(b, k);
      if (w > 0.0) energies[b] += w * p;
    }
  }
  for (double& e : energies) e = std::log(std::max(e, kEnergyFloor));
  return energies;
}

std::vector<CepstralFrame> bark_cepstrum(const AudioSignal& audio) {
  const BarkAnalyzer an = make_bark_analyzer(audio.sample_rate_hz);
  if (audio.samples.size() < an.win)
    throw std::runtime_error("bark_cepstrum: audio shorter than one window");
  for (double s : audio.samples)
    if (!std::isfinite(s))
      throw std::runtime_error("bark_cepstrum: non-finite sample");

  const std::size_t n_frames = (audio.samples.size() - an.win) / an.hop + 1;
  std::vector<CepstralFrame> frames(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * an.hop;
    const auto log_e = log_band_energies(an, audio.samples, start);
    const auto coeffs = dct_ortho(log_e);
    std::copy(coeffs.begin(), coeffs.end(), frames[f].coeffs.begin());
    frames[f].time_s =
        (static_cast<double>(start) + an.win / 2.0) / audio.sample_rate_hz;
  }
  return frames;
}

std::vector<double> spectral_envelope(const BarkAnalyzer& an,
                                      std::span<const double> coeffs) {
  const auto log_e = idct_ortho(coeffs);
  std::vector<double> band_energy(kNumCepstra);
  for (std::size_t b = 0; b < kNumCepstra; ++b)
    band_energy[b] = std::exp(log_e[b]);

  const std::size_t bins = an.nfft / 2 + 1;
  std::vector<double> env(bins, 0.0);
  double last_covered = std::sqrt(band_energy.front());
  for (std::size_t k = 0; k < bins; ++k) {
    double wsum = 0.0, acc = 0.0;
    for (std::size_t b = 0; b < kNumCepstra; ++b) {
      const double w = an.filterbank(b, k);
      wsum += w;
      acc += w * band_energy[b];
    }
    if (wsum > 1e-12) {
      last_covered = std::sqrt(acc / wsum);
      env[k] = last_covered;
    } else {
      env[k] = last_covered;
    }
  }
  return env;
}

AudioSignal mix_at_snr(const AudioSignal& clean, const AudioSignal& noise,
                       double snr_db, std::size_t noise_offset) {
  if (clean.sample_rate_hz != noise.sample_rate_hz)
    throw std::runtime_error("mix_at_snr: sample rate mismatch");
  const std::size_t n = clean.samples.size();
  if (noise_offset + n > noise.samples.size())
    throw std::runtime_error("mix_at_snr: noise crop out of range");

  double clean_power = 0.0, noise_power = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    clean_power += clean.samples[i] * clean.samples[i];
    noise_power +=
        noise.samples[noise_offset + i] * noise.samples[noise_offset + i];
  }
  if (clean_power <= 0.0)
    throw std::runtime_error("mix_at_snr: silent clean signal, SNR undefined");
  if (noise_power <= 0.0)
    throw std::runtime_error("mix_at_snr: silent noise crop, SNR undefined");

  const double gain =
      std::sqrt(clean_power / noise_power) * std::pow(10.0, -snr_db / 20.0);

  AudioSignal out;
  out.sample_rate_hz = clean.sample_rate_hz;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.samples[i] = clean.samples[i] + gain * noise.samples[noise_offset + i];
  return out;
}

std::size_t draw_noise_offset(RngStream& rng, std::size_t clean_len,
                              std::size_t noise_len) {
  if (noise_len < clean_len)
    throw std::runtime_error("draw_noise_offset: noise shorter than clean");
  return static_cast<std::size_t>(rng.below(noise_len - clean_len + 1));
}

AlignResult align(const std::vector<CepstralFrame>& cepstra,
                  const std::vector<ArticulatoryVector>& artic,
                  const std::vector<CepstralFrame>* noisy) {
  if (cepstra.empty() || artic.empty())
    throw std::runtime_error("align: empty input stream");
  std::size_t n = std::min(cepstra.size(), artic.size());
  if (noisy != nullptr) n = std::min(n, noisy->size());

  AlignResult out;
  out.frames.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.frames[i].x = cepstra[i];
    out.frames[i].a = artic[i];
    if (noisy != nullptr) out.frames[i].x_noisy = (*noisy)[i];
  }
  out.dropped = (cepstra.size() - n) + (artic.size() - n) +
                (noisy != nullptr ? noisy->size() - n : 0);
  return out;
}

void write_features_csv(const std::string& path,
                        const std::vector<CepstralFrame>& frames) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("write_features_csv: cannot open " + path);
  for (std::size_t c = 0; c < kNumCepstra; ++c) f << "c" << c << ",";
  f << "time_s\n";
  char buf[32];
  for (const auto& frame : frames) {
    for (double v : frame.coeffs) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      f << buf << ",";
    }
    std::snprintf(buf, sizeof buf, "%.17g", frame.time_s);
    f << buf << "\n";
  }
  if (!f) throw std::runtime_error("write_features_csv: write failed");
}

std::vector<CepstralFrame> read_features_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_features_csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error("read_features_csv: empty file " + path);

  std::vector<CepstralFrame> frames;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    CepstralFrame frame;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      double v;
      try {
        v = std::stod(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("read_features_csv: line " +
                                 std::to_string(line_no) +
                                 ": bad number '" + cell + "'");
      }
      if (col < kNumCepstra)
        frame.coeffs[col] = v;
      else if (col == kNumCepstra)
        frame.time_s = v;
      ++col;
    }
    if (col != kNumCepstra + 1)
      throw std::runtime_error("read_features_csv: line " +
                               std::to_string(line_no) + ": expected " +
                               std::to_string(kNumCepstra + 1) + " fields");
    frames.push_back(frame);
  }
  return frames;
}

namespace {

constexpr char kFeatMagic[16] = "artivae-feat-v1";  // includes the NUL

template <typename T>
void write_le(std::ofstream& f, T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  f.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& f) {
  unsigned char bytes[sizeof(T)];
  f.read(reinterpret_cast<char*>(bytes), sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace

void write_features_bin(const std::string& path,
                        const std::vector<CepstralFrame>& frames) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("write_features_bin: cannot open " + path);
  f.write(kFeatMagic, sizeof kFeatMagic);
  write_le<std::uint32_t>(f, kNumCepstra + 1);
  write_le<std::uint64_t>(f, frames.size());
  for (const auto& frame : frames) {
    for (double v : frame.coeffs) write_le<double>(f, v);
    write_le<double>(f, frame.time_s);
  }
  if (!f) throw std::runtime_error("write_features_bin: write failed");
}

std::vector<CepstralFrame> read_features_bin(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_features_bin: cannot open " + path);
  char magic[sizeof kFeatMagic];
  f.read(magic, sizeof magic);
  if (!f || std::memcmp(magic, kFeatMagic, sizeof magic) != 0)
    throw std::runtime_error("read_features_bin: bad magic in " + path);
  const auto dims = read_le<std::uint32_t>(f);
  const auto count = read_le<std::uint64_t>(f);
  if (dims != kNumCepstra + 1)
    throw std::runtime_error("read_features_bin: unexpected dims " +
                             std::to_string(dims));
  std::vector<CepstralFrame> frames(count);
  for (auto& frame : frames) {
    for (double& v : frame.coeffs) v = read_le<double>(f);
    frame.time_s = read_le<double>(f);
  }
  if (!f) throw std::runtime_error("read_features_bin: truncated " + path);
  return frames;
}

void write_features(const std::string& path,
                    const std::vector<CepstralFrame>& frames) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0)
    write_features_csv(path, frames);
  else
    write_features_bin(path, frames);
}

std::vector<CepstralFrame> read_features(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0)
    return read_features_csv(path);
  return read_features_bin(path);
}

}  // namespace artivae
